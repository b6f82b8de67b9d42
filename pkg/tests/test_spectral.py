"""Forward/inverse transforms, calibration, Plancherel, convolution."""

import math

import numpy as np
import pytest

from fpl import space as sp
from fpl import spectral as spec
from fpl.numerics import CancellationError, LogValue


def gauss_bump(r):
    r = np.asarray(r, dtype=float)
    return np.exp(-r * r)


# ----------------------------------------------------------------------
# calibration
# ----------------------------------------------------------------------
@pytest.mark.parametrize("name,key", [("H2", "c0_h2"), ("H3", "c0_h3"),
                                      ("H4", "c0_h4"), ("H5", "c0_h5")])
def test_calibration_matches_analytic(golden, name, key):
    d = spec.calibrate(sp.preset(name))
    assert d.calib_C0 == pytest.approx(golden[key], rel=5e-7)
    assert spec.analytic_calibration(d) == pytest.approx(golden[key],
                                                         rel=1e-13)


def test_calibration_cached(h3):
    again = spec.calibrate(sp.preset("H3"))
    assert again.calib_C0 == h3.calib_C0


# ----------------------------------------------------------------------
# forward transform against independent quadrature
# ----------------------------------------------------------------------
@pytest.mark.parametrize("lam,key", [(0.5, "sft_h3_gauss_lam05"),
                                     (2.0, "sft_h3_gauss_lam2")])
def test_forward_h3_golden(golden, h3, lam, key):
    got = spec.sft_forward(h3, gauss_bump, np.array([lam]), r_support=9.0)
    assert got.value[0] == pytest.approx(golden[key], rel=1e-11)


def test_forward_h2_golden(golden, h2):
    got = spec.sft_forward(h2, gauss_bump, np.array([1.0]), r_support=9.0)
    assert got.value[0] == pytest.approx(golden["sft_h2_gauss_lam1"],
                                         rel=1e-8)


def test_forward_accepts_radial_function(h3):
    rs = np.linspace(0.0, 9.0, 2500)
    rf = spec.RadialFunction.from_floats(rs, gauss_bump(rs))
    lam = np.array([0.5])
    a = spec.sft_forward(h3, rf, lam)
    b = spec.sft_forward(h3, gauss_bump, lam, r_support=9.0)
    # linear interpolation of the samples limits the agreement, not the rule
    assert a.value[0] == pytest.approx(b.value[0], rel=1e-5)


def test_forward_callable_needs_support(h3):
    with pytest.raises(ValueError, match="r_support"):
        spec.sft_forward(h3, gauss_bump, np.array([1.0]))


# ----------------------------------------------------------------------
# inverse transform and round trips
# ----------------------------------------------------------------------
def test_roundtrip_h3_grid_path(h3):
    """SpectralFunction input exercises the Filon grid inverse."""
    lam = np.linspace(0.0, 14.0, 1500)
    ghat = spec.sft_forward(h3, gauss_bump, lam, r_support=9.0)
    rs = np.array([0.0, 0.4, 1.0, 2.1])
    back = spec.sft_inverse(h3, ghat, rs)
    assert np.allclose(back.values(), gauss_bump(rs), rtol=2e-7, atol=1e-9)


def test_roundtrip_h2_callable_path(h2):
    rs = np.array([0.3, 1.0, 1.8])
    back = spec.sft_inverse(
        h2,
        lambda lam: spec.sft_forward(h2, gauss_bump, lam,
                                     r_support=8.0).value,
        rs, lam_max=14.0)
    assert np.allclose(back.values(), gauss_bump(rs), rtol=1e-6)


def test_inverse_callable_needs_lam_max(h3):
    with pytest.raises(ValueError, match="lam_max"):
        spec.sft_inverse(h3, lambda lam: np.exp(-lam ** 2), [1.0])


def test_inverse_cancellation_guard(h3):
    """A huge radius against a slow grid must refuse, not return noise."""
    lam = np.linspace(0.0, 14.0, 40_000)
    ghat = spec.SpectralFunction(lam, np.exp(-lam ** 2))
    with pytest.raises(CancellationError, match="r ="):
        spec.sft_inverse(h3, ghat, np.array([25.0]))
    out = spec.sft_inverse(h3, ghat, np.array([25.0]), on_cancel="ignore")
    assert out.r[0] == 25.0  # values may be below the noise floor


# ----------------------------------------------------------------------
# Plancherel
# ----------------------------------------------------------------------
@pytest.mark.parametrize("name", ["H3", "H2"])
def test_plancherel_identity(request, name):
    d = request.getfixturevalue(name.lower())
    lam = np.linspace(0.0, 15.0, 301)
    ghat = spec.sft_forward(d, gauss_bump, lam, r_support=7.0)
    l2r = spec.l2_norm_radial(d, gauss_bump, 7.0)
    l2s = spec.l2_norm_spectral(d, ghat)
    assert l2s == pytest.approx(l2r, rel=1e-6)


# ----------------------------------------------------------------------
# convolution by transform-multiply-invert
# ----------------------------------------------------------------------
def test_radial_convolve_heat_semigroup(h3):
    """h_s * h_t = h_{s+t} through the multiplier route."""
    from fpl import kernels as ker

    def h(t):
        def fn(r):
            r = np.asarray(r, dtype=float)
            out = np.empty(r.shape)
            for i, x in enumerate(r.ravel()):
                out.ravel()[i] = ker.heat_kernel(h3, t, float(x)).to_float()
            return out
        return fn

    rs = np.array([0.2, 1.0, 2.5])
    got = spec.radial_convolve(h3, h(0.4), h(0.6), rs,
                               lam_max=16.0, r_support=14.0)
    want = np.array([ker.heat_kernel(h3, 1.0, float(r)).to_float()
                     for r in rs])
    assert np.allclose(got.values(), want, rtol=1e-6)


# ----------------------------------------------------------------------
# containers
# ----------------------------------------------------------------------
def test_radial_function_csv_roundtrip(tmp_path):
    rs = np.array([0.0, 0.5, 1.5, 4.0])
    rf = spec.RadialFunction.from_floats(rs, np.array([1.0, -0.25, 0.0,
                                                       3e-200]))
    p = tmp_path / "f.csv"
    rf.to_csv(p)
    back = spec.RadialFunction.from_csv(p)
    assert np.array_equal(back.r, rf.r)
    assert np.array_equal(back.sign, rf.sign)
    assert np.allclose(back.log_mag[back.sign != 0],
                       rf.log_mag[rf.sign != 0], rtol=0, atol=1e-15)


def test_spectral_function_requires_increasing_grid():
    with pytest.raises(ValueError, match="increasing"):
        spec.SpectralFunction(np.array([0.0, 1.0, 1.0]), np.zeros(3))


def test_radial_function_values_underflow_to_zero():
    rf = spec.RadialFunction(np.array([0.0, 1.0]), np.array([1, 1],
                             dtype=np.int8), np.array([-800.0, 0.0]))
    v = rf.values()
    assert v[0] == 0.0 and v[1] == 1.0
