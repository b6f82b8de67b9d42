"""Distinguished-Laplacian kernels: flat profile, Busemann twist, masses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson
from scipy.special import betainc

from fpl import distinguished as dist
from fpl import kernels as ker
from fpl import spectral as spec
from fpl.numerics import DomainError


# ----------------------------------------------------------------------
# flat radial profile Q0
# ----------------------------------------------------------------------
@pytest.mark.parametrize("sg,key", [(0.25, "ctilde_s0p25"),
                                    (0.5, "ctilde_s0p5"),
                                    (0.75, "ctilde_s0p75")])
def test_ctilde_constant_golden(golden, sg, key):
    assert dist.ctilde_constant(sg) == pytest.approx(golden[key], rel=1e-14)


def test_q0_closed_formula(golden, h3):
    """C~ t^{2s} (t^2+r^2)^{-s-3/2} phi_0(r), assembled from golden parts."""
    t, sg, r = 2.0, 0.25, 3.0
    got = dist.q0_kernel(h3, t, sg, r, route="closed")
    want = (golden["ctilde_s0p25"] * t ** (2 * sg)
            * (t * t + r * r) ** (-sg - 1.5) * (r / math.sinh(r)))
    assert got.log_mag == pytest.approx(math.log(want), abs=1e-13)


@pytest.mark.parametrize("t,r", [(2.0, 0.5), (2.0, 4.0), (8.0, 64.0)])
def test_q0_routes_agree(h3, t, r):
    for sg in (0.25, 0.75):
        sub, spc, rel = dist.q0_routes_delta(h3, t, sg, r)
        assert rel <= 1e-6


def test_q0_half_order_multiplier_is_poisson(h3):
    lam = np.linspace(0.0, 40.0, 17)
    for t in (0.5, 3.0):
        got = np.asarray(dist.q0_multiplier_log(h3, t, 0.5, lam))
        assert np.allclose(got, -t * lam, atol=1e-11)


def test_q0_multiplier_gap_free(h3):
    """m0(0) = 1 for every order: no spectral gap on the solvable side."""
    for sg in (0.25, 0.5, 0.75):
        assert dist.q0_multiplier(h3, 4.0, sg, 0.0) == 1.0
    with pytest.raises(DomainError):
        dist.q0_multiplier_log(h3, 1.0, 0.5, -0.5)


def test_q0_asymptotic_ratio_exact_h3(h3):
    """The sharp form IS the closed form on the 3-d preset."""
    for t, r in ((5.0, 5.0), (20.0, 1.0)):
        assert dist.q0_asymptotic_ratio(h3, t, 0.5, r) == pytest.approx(
            1.0, rel=1e-7)


def test_q0_bounds_ratio_two_sided(h3):
    ratios = [dist.q0_bounds_ratio(h3, t, sg, r)
              for t in (0.5, 2.0, 16.0)
              for sg in (0.25, 0.75)
              for r in (0.0, 1.0, 30.0)]
    assert min(ratios) > 0.01 and max(ratios) < 10.0


# ----------------------------------------------------------------------
# Busemann twist
# ----------------------------------------------------------------------
def test_busemann_range_endpoints():
    for r in (0.3, 2.0, 10.0):
        assert dist.busemann_log(r, 0.0) == pytest.approx(r, abs=1e-12)
        assert dist.busemann_log(r, math.pi) == pytest.approx(-r, abs=1e-9)


@given(r=st.floats(min_value=1e-3, max_value=60.0),
       theta=st.floats(min_value=0.0, max_value=math.pi))
@settings(max_examples=60, deadline=None)
def test_busemann_inside_ball(r, theta):
    b = dist.busemann_log(r, theta)
    assert -r - 1e-9 <= b <= r + 1e-9


def test_busemann_spherical_average_is_phi0(h3):
    """Avg over the sphere of e^{-rho B} equals phi_0 exactly (3-d)."""
    th = np.linspace(0.0, math.pi, 40001)
    for r in (0.5, 2.0, 4.0):
        vals = np.exp([-dist.busemann_log(r, x) for x in th])
        avg = simpson(vals * np.sin(th) / 2.0, x=th)
        assert avg == pytest.approx(r / math.sinh(r), rel=5e-8)


def test_qtilde_eval_twist_and_domain(h3):
    q0 = dist.q0_kernel(h3, 2.0, 0.5, 1.0)
    up = dist.qtilde_eval(h3, 2.0, 0.5, 1.0, -1.0)
    dn = dist.qtilde_eval(h3, 2.0, 0.5, 1.0, 1.0)
    assert up.log_mag == pytest.approx(q0.log_mag + 1.0, abs=1e-12)
    assert dn.log_mag == pytest.approx(q0.log_mag - 1.0, abs=1e-12)
    with pytest.raises(DomainError, match="Busemann"):
        dist.qtilde_eval(h3, 2.0, 0.5, 1.0, 1.5)


def test_qtilde_sup_position_and_witness(h3):
    """sup of e^{rho r} Q0 sits near t/sqrt(2 sigma + 2); witness r = t."""
    t, sg = 12.0, 0.5
    sup_log, r_at = dist.qtilde_sup_norm(h3, t, sg)
    assert r_at == pytest.approx(t / math.sqrt(2 * sg + 2), rel=0.02)
    wit_log = dist.qtilde_witness_log(h3, t, sg)
    assert wit_log <= sup_log.log_mag + 1e-9
    assert sup_log.log_mag - wit_log <= math.log(10.0)


def test_qtilde_sup_t2_scaling(h3):
    sg = 0.5
    scaled = []
    for t in (5.0, 10.0, 20.0):
        v, _ = dist.qtilde_sup_norm(h3, t, sg)
        scaled.append(math.exp(v.log_mag + 2.0 * math.log(t)))
    assert max(scaled) / min(scaled) <= 1.05  # exactly flat profile family


# ----------------------------------------------------------------------
# masses
# ----------------------------------------------------------------------
def test_twisted_mass_matches_beta_law(h3):
    """c_s Q0 phi_0 delta integrates to the Beta(3/2, sigma) law exactly.

    The partial mass up to R is checked, so no truncation of the fat
    r^{-1-2 sigma} tail enters; total mass 1 is the R -> inf limit.
    """
    for t, sg, r_max in ((1.0, 0.25, 25.0), (7.0, 0.5, 40.0)):
        def prof(rr, t=t, sg=sg):
            rr = np.asarray(rr, dtype=float)
            return np.exp([dist.q0_kernel(h3, t, sg, float(x)).log_mag
                           for x in rr])

        m = dist.mass_functional_s(h3, prof, r_support=r_max)
        want = float(betainc(1.5, sg, r_max ** 2 / (t * t + r_max ** 2)))
        assert m == pytest.approx(want, rel=1e-9)


def test_twisted_mass_beta_split(h3):
    out = dist.qtilde_critical_mass(h3, 12.0, 0.5, 0.5)
    assert out["inside"] + out["outside"] == pytest.approx(1.0, abs=1e-12)
    assert out["outside"] == pytest.approx(out["below"] + out["above"])
    o40 = dist.qtilde_critical_mass(h3, 40.0, 0.5, 0.5)["outside"]
    assert o40 < out["outside"]
    with pytest.raises(DomainError):
        dist.qtilde_critical_mass(h3, 0.5, 0.5, 0.5)
    with pytest.raises(DomainError):
        dist.qtilde_critical_mass(h3, 12.0, 0.5, 1.5)


def test_ambient_mass_functional_heat(h3):
    def prof(rr):
        rr = np.asarray(rr, dtype=float)
        return np.exp([ker.heat_kernel(h3, 1.0, float(x)).log_mag
                       for x in rr])

    m = dist.mass_functional_x(h3, prof, r_support=20.0)
    assert m == pytest.approx(1.0, abs=1e-9)


def test_ambient_mass_functional_q_vs_shells(h3):
    """Quadrature of kernel values vs subordinated exact shell masses."""
    t, sg, eps = 4.0, 0.5, 0.5
    split = ker.critical_region_mass(h3, t, sg, eps)

    def prof(rr):
        rr = np.asarray(rr, dtype=float)
        return np.exp([ker.q_kernel(h3, t, sg, float(x)).log_mag
                       for x in rr])

    m_a = dist.mass_functional_x(h3, prof, r_support=t ** (2.0 - eps))
    assert m_a == pytest.approx(split["below"], rel=1e-7)
    m_b = dist.mass_functional_x(h3, prof, r_support=t ** (2.0 + eps))
    assert m_b == pytest.approx(split["below"] + split["inside"], rel=1e-7)


def test_mass_functional_s_is_transform_at_zero(h3):
    """M~ of a bump equals its forward transform at lam = 0."""
    def bump(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-((r - 1.0) / 0.5) ** 2)

    m = dist.mass_functional_s(h3, bump, r_support=6.0)
    ghat = spec.sft_forward(h3, bump, np.array([0.0]), r_support=6.0)
    assert m == pytest.approx(ghat.value[0], rel=1e-9)
