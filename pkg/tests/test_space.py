"""Root-system bookkeeping and spherical-function plumbing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpl import space as sp
from fpl import spectral as spec
from fpl.numerics import DomainError


@pytest.mark.parametrize("name,n", [("H2", 2), ("H3", 3), ("H4", 4),
                                    ("H5", 5)])
def test_preset_invariants(name, n):
    d = sp.preset(name)
    assert d.rank == 1
    assert d.dim_n == n
    assert d.m_alpha == n - 1
    assert d.m_2alpha == 0
    assert d.alpha_norm == 1.0
    assert d.rho_norm == pytest.approx((n - 1) / 2.0)
    assert d.dim_nu == d.rank + 2  # one positive reduced root in rank one


def test_preset_unknown_name():
    with pytest.raises((KeyError, ValueError)):
        sp.preset("H17")


@pytest.mark.parametrize("name,key", [("H2", "surface_s1"),
                                      ("H3", "surface_s2"),
                                      ("H4", "surface_s3"),
                                      ("H5", "surface_s4")])
def test_surface_constants(golden, name, key):
    got = sp.surface_constant(sp.preset(name))
    assert got == pytest.approx(golden[key], rel=1e-14)


def test_descriptor_text_roundtrip():
    d = sp.preset("H4").with_calibration(0.123)
    back = sp.SpaceDescriptor.from_text(d.to_text())
    assert back == d


def test_descriptor_text_rejects_tampering():
    text = sp.preset("H4").to_text().replace("rho_norm=1.5", "rho_norm=1.4")
    with pytest.raises(DomainError, match="inconsistent"):
        sp.SpaceDescriptor.from_text(text)


def test_require_calibrated_guard():
    with pytest.raises(DomainError, match="calibrate"):
        sp.preset("H2").require_calibrated()


@given(x=st.floats(min_value=1e-8, max_value=500.0))
@settings(max_examples=80, deadline=None)
def test_log_sinh_bounds(x):
    """log(x) <= log sinh x <= x - log 2 + tiny slack, monotone pieces."""
    v = float(sp.log_sinh(x))
    assert v >= math.log(x) - 1e-12
    assert v <= x - math.log(2.0) + math.log1p(math.exp(-2 * x)) + 1e-12


def test_cartan_density_h3_is_sinh_squared():
    d = sp.preset("H3")
    r = np.array([0.3, 1.0, 4.0, 40.0])
    want = 2.0 * np.log(np.sinh(np.minimum(r, 30.0)))
    got = np.asarray(sp.cartan_density_log(d, r))
    assert np.allclose(got[:3], want[:3], rtol=1e-13)
    assert got[3] == pytest.approx(2.0 * (40.0 - math.log(2.0)), rel=1e-13)


# ----------------------------------------------------------------------
# spherical functions phi_lambda (generic quadrature path vs golden)
# ----------------------------------------------------------------------
@pytest.mark.parametrize("r,key", [(0.5, "phi0_h2_r0p5"), (2.0, "phi0_h2_r2"),
                                   (5.0, "phi0_h2_r5")])
def test_phi0_h2_golden(golden, r, key):
    # the 2-d preset runs the pure quadrature path: ~1e-8 working accuracy
    got = spec.spherical_function(sp.preset("H2"), 0.0, r)
    assert float(got) == pytest.approx(golden[key], rel=1e-7)


@pytest.mark.parametrize("name,lam,r,key,tol", [
    ("H2", 1.3, 2.0, "phi_h2_lam13_r2", 1e-7),
    ("H4", 0.0, 2.0, "phi0_h4_r2", 1e-12),
    ("H4", 0.7, 3.0, "phi_h4_lam07_r3", 1e-12),
    ("H5", 0.0, 2.0, "phi0_h5_r2", 1e-12),
])
def test_phi_generic_golden(golden, name, lam, r, key, tol):
    got = spec.spherical_function(sp.preset(name), lam, r)
    assert float(got) == pytest.approx(golden[key], rel=tol)


def test_phi_h3_elementary():
    d = sp.preset("H3")
    for lam, r in ((0.7, 1.0), (2.5, 6.0)):
        got = float(spec.spherical_function(d, lam, r))
        assert got == pytest.approx(
            math.sin(lam * r) / (lam * math.sinh(r)), rel=1e-12)


def test_phi0_envelope_two_sided():
    """phi_0 =~ (1 + r) e^{-rho r} with constants inside [1/2, C1]."""
    for name in ("H2", "H3", "H4", "H5"):
        d = sp.preset(name)
        upper = max(1.0, sp.asymptotic_constants(d)["C1"])
        for r in (0.05, 0.2, 1.0, 3.0, 8.0, 15.0, 30.0):
            phi = float(spec.spherical_function(d, 0.0, r))
            env = math.exp(float(sp.phi0_envelope_log(d, r)))
            assert 0.5 * env <= phi <= upper * env * 1.0000001


def test_phi0_asymptotic_sharp():
    """phi_0(r) / (C1 r e^{-rho r}) -> 1 with an O(1/r) correction."""
    for name in ("H2", "H3", "H5"):
        d = sp.preset(name)
        gaps = []
        for r in (20.0, 40.0, 80.0):
            phi = float(spec.spherical_function(d, 0.0, r))
            asym = math.exp(float(sp.phi0_asymptotic_log(d, r)))
            gaps.append(abs(phi / asym - 1.0))
        assert gaps[-1] <= 0.02
        # non-increasing up to quadrature noise (the 3-d preset converges
        # to machine zero well before r = 20)
        assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


# ----------------------------------------------------------------------
# Plancherel density
# ----------------------------------------------------------------------
def test_density_h3_is_quadratic():
    d = sp.preset("H3")
    lam = np.array([0.5, 1.0, 3.0])
    dens = np.array([float(spec.plancherel_density(d, l)) for l in lam])
    ratio = dens / lam ** 2
    assert np.allclose(ratio, ratio[0], rtol=1e-12)


def test_density_h2_is_mehler():
    """lam tanh(pi lam) shape on the 2-d preset."""
    d = sp.preset("H2")
    lam = np.array([0.3, 0.9, 2.0, 6.0])
    dens = np.array([float(spec.plancherel_density(d, l)) for l in lam])
    shape = lam * np.tanh(math.pi * lam)
    ratio = dens / shape
    assert np.allclose(ratio, ratio[0], rtol=1e-12)


def test_density_via_b_agrees():
    for name in ("H2", "H4", "H5"):
        d = sp.preset(name)
        for lam in (0.4, 1.7, 9.0):
            a = float(spec.plancherel_density(d, lam))
            b = float(spec.density_via_b(d, lam))
            assert a == pytest.approx(b, rel=1e-12)


def test_asymptotic_constants_need_calibration():
    d = sp.preset("H3")
    out = sp.asymptotic_constants(d)
    assert set(out) == {"C1"}  # C2 and C_sigma need the inversion constant
    assert out["C1"] == pytest.approx(2.0)  # r/sinh r ~ 2 r e^{-r}
