"""Heat and fractional Poisson kernels on the ambient space."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammainc

from fpl import kernels as ker
from fpl import space as sp
from fpl.numerics import DomainError

sigmas = st.floats(min_value=0.05, max_value=0.95)
times = st.floats(min_value=0.2, max_value=30.0)


# ----------------------------------------------------------------------
# heat kernel
# ----------------------------------------------------------------------
def test_heat_closed_h3_formula(h3):
    for t, r in ((0.7, 0.0), (0.7, 3.0), (5.0, 12.0)):
        got = ker.heat_kernel(h3, t, r, route="closed").to_float()
        prof = 1.0 if r == 0.0 else r / math.sinh(r)
        want = (4 * math.pi * t) ** -1.5 * math.exp(-t - r * r / (4 * t)) \
            * prof
        assert got == pytest.approx(want, rel=1e-14)


def test_heat_spectral_matches_closed(h3):
    for t in (0.5, 2.0):
        for r in (0.0, 0.1, 1.0, 7.5, 20.0):
            a = ker.heat_kernel(h3, t, r, route="closed")
            b = ker.heat_kernel(h3, t, r, route="spectral")
            assert b.log_mag == pytest.approx(a.log_mag, abs=1e-8)


def test_heat_generic_route_h2(h2):
    """The guarded real-axis engine on the 2-d preset: mass check."""
    mass, err = ker.heat_radial_mass(h2, 1.0, route="spectral")
    assert mass == pytest.approx(1.0, abs=5e-7)
    assert err < 1e-6


def test_heat_mass_quadrature(h3):
    for t in (0.5, 10.0):
        mass, err = ker.heat_radial_mass(h3, t)
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert err < 1e-9


def test_heat_bounds_ratio_two_sided(h3):
    """Kernel over envelope stays inside a fixed two-sided window."""
    ratios = [ker.heat_bounds_ratio(h3, t, r)
              for t in (0.3, 1.0, 4.0, 20.0)
              for r in (0.0, 0.5, 2.0, 10.0, 60.0)]
    assert 0.01 <= min(ratios) and max(ratios) <= 1.0


def test_heat_asymptotic_exact_on_h3(h3):
    # exact up to the numerically pinned inversion constant (~1e-11 here)
    for t, r in ((2.0, 1.0), (9.0, 30.0)):
        assert ker.heat_asymptotic_ratio(h3, t, r) == pytest.approx(
            1.0, rel=1e-9)


# ----------------------------------------------------------------------
# fractional Poisson kernel: oracles and route agreement
# ----------------------------------------------------------------------
@pytest.mark.parametrize("t,sg,r,key", [
    (1.0, 0.5, 0.5, "log_q_h3_t1_s0p5_r0.5"),
    (2.0, 0.25, 3.0, "log_q_h3_t2_s0p25_r3"),
    (5.0, 0.75, 10.0, "log_q_h3_t5_s0p75_r10"),
    (12.0, 0.5, 144.0, "log_q_h3_t12_s0p5_r144"),
])
def test_q_closed_golden(golden, h3, t, sg, r, key):
    got = ker.q_kernel(h3, t, sg, r, route="closed")
    assert got.log_mag == pytest.approx(golden[key], abs=5e-13)


def test_q_multiplier_golden(golden, h3):
    got = ker.q_multiplier_log(h3, 2.0, 0.25, 3.0)
    assert float(got) == pytest.approx(golden["log_mult_s025_t2_lam3"],
                                       abs=1e-12)


def test_q_multiplier_poisson_specialization(h3):
    lam = np.linspace(0.0, 40.0, 17)
    for t in (0.5, 3.0):
        got = np.asarray(ker.q_multiplier_log(h3, t, 0.5, lam))
        want = -t * np.sqrt(lam ** 2 + h3.rho_norm ** 2)
        assert np.allclose(got, want, atol=1e-11)


@pytest.mark.parametrize("t,r", [(2.0, 0.5), (2.0, 4.0), (8.0, 64.0)])
def test_q_routes_agree(h3, t, r):
    for sg in (0.25, 0.75):
        sub, spc, rel = ker.q_routes_delta(h3, t, sg, r)
        assert rel <= 1e-6


def test_q_kernel_route_guards(h3, h2):
    with pytest.raises(DomainError):
        ker.q_kernel(h2, 1.0, 0.5, 1.0, route="closed")
    with pytest.raises(DomainError):
        ker.q_kernel(h3, 1.0, 0.5, 1.0, route="nonsense")
    with pytest.raises(DomainError):
        ker.q_kernel(h3, -1.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        ker.q_kernel(h3, 1.0, 1.5, 1.0)


@given(sg=sigmas, t=times)
@settings(max_examples=25, deadline=None)
def test_subordination_weight_is_probability(sg, t):
    """The weight integrates to the regularized lower Gamma of t^2/(4u)."""
    for u_cap_factor in (0.5, 4.0):
        u_cap = u_cap_factor * t * t
        got = ker._w_mass_below(t, sg, u_cap)
        want = float(gammainc(sg, t * t / (4.0 * u_cap)))
        # _w_mass_below is the complementary regularized Gamma: the two
        # partition unity exactly
        assert got + want == pytest.approx(1.0, abs=1e-13)


def test_q_radially_decreasing(h3):
    """Subordination against a radially decreasing family is decreasing."""
    for t, sg in ((0.8, 0.25), (6.0, 0.6)):
        logs = [ker.q_kernel(h3, t, sg, r).log_mag
                for r in (0.0, 0.7, 2.0, 6.0, 18.0)]
        assert all(b < a for a, b in zip(logs, logs[1:]))


def test_q_sup_norm_is_origin_value(h3):
    val, r_at = ker.q_sup_norm(h3, 3.0, 0.5)
    assert r_at <= 1e-6  # bracket refinement stops just off the origin
    assert val.to_float() == pytest.approx(
        math.exp(ker.q_kernel(h3, 3.0, 0.5, 0.0).log_mag), rel=1e-10)


def test_q_sup_norm_scaling(h3):
    """sup Q ~ t^{sigma-2} e^{-rho t}: the scaled series stays in a band."""
    sg = 0.5
    scaled = []
    for t in (5.0, 10.0, 20.0, 40.0):
        val, _ = ker.q_sup_norm(h3, t, sg)
        scaled.append(math.exp(val.log_mag + (2.0 - sg) * math.log(t)
                               + h3.rho_norm * t))
    assert max(scaled) / min(scaled) <= 1.5


# ----------------------------------------------------------------------
# masses
# ----------------------------------------------------------------------
def test_exact_shell_mass_partitions_unity(h3):
    for u in (0.03, 1.0, 40.0, 2e7):
        a = ker._heat_mass_between(h3, u, 0.0, 2.0 * u)
        b = ker._heat_mass_between(h3, u, 2.0 * u, math.inf)
        assert a + b == pytest.approx(1.0, abs=1e-14)
        assert ker._heat_mass_between(h3, u, 3.0, 2.0) == 0.0


def test_q_mass_unit(h3):
    for t, sg in ((0.5, 0.25), (1.0, 0.5), (10.0, 0.75)):
        mass, tail = ker.q_mass(h3, t, sg)
        assert mass + tail == pytest.approx(1.0, abs=1e-7)
        assert tail <= 2e-7


def test_critical_region_split_sums_to_one(h3):
    out = ker.critical_region_mass(h3, 12.0, 0.5, 0.5)
    assert out["inside"] + out["outside"] == pytest.approx(1.0, abs=1e-12)
    assert out["outside"] == out["below"] + out["above"]
    assert min(out.values()) >= 0.0


def test_critical_region_concentrates(h3):
    """Outside mass decreasing in t; halves from t=10 to t=100."""
    o10 = ker.critical_region_mass(h3, 10.0, 0.5, 0.5)["outside"]
    o30 = ker.critical_region_mass(h3, 30.0, 0.5, 0.5)["outside"]
    o100 = ker.critical_region_mass(h3, 100.0, 0.5, 0.5)["outside"]
    assert o30 < o10
    assert o100 < 0.5 * o10


def test_critical_region_domain_guards(h3):
    with pytest.raises(DomainError):
        ker.critical_region_mass(h3, 0.5, 0.5, 0.5)  # stated for t > 1
    with pytest.raises(DomainError):
        ker.critical_region_mass(h3, 10.0, 0.5, 2.5)
