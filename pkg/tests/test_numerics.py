"""Log-domain arithmetic and quadrature engines against known values."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpl.numerics import (
    DomainError,
    LogValue,
    ResolutionError,
    adaptive_quad,
    bessel_k_log,
    bessel_kve_log,
    exp_sinh_quad,
    gl_nodes,
    osc_sin_quad,
    signed_logsumexp,
    sine_transform,
    tanh_sinh_quad,
)

finite = st.floats(min_value=-200.0, max_value=200.0,
                   allow_nan=False, allow_infinity=False)


# ----------------------------------------------------------------------
# LogValue / signed_logsumexp
# ----------------------------------------------------------------------
class TestLogValue:
    def test_roundtrip(self):
        for x in (3.7, -0.25, 1e-280, -4e200):
            assert LogValue.from_float(x).to_float() == pytest.approx(x)

    def test_zero_and_sign_collapse(self):
        assert LogValue.from_float(0.0).is_zero()
        assert LogValue(1, float("-inf")).sign == 0

    def test_product_exact_beyond_double_range(self):
        huge = LogValue.from_log(1, 800.0)
        tiny = LogValue.from_log(-1, -790.0)
        prod = huge * tiny
        assert prod.sign == -1
        assert prod.log_mag == pytest.approx(10.0)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            LogValue(1, float("nan"))


def test_signed_logsumexp_matches_direct():
    rng = np.random.default_rng(7)
    x = rng.normal(size=40) * 3.0
    sg = np.where(rng.random(40) < 0.5, -1, 1)
    sign, lm = signed_logsumexp(np.log(np.abs(x)), sg * np.sign(x))
    direct = float(np.sum(sg * x))
    assert sign == np.sign(direct)
    assert lm == pytest.approx(math.log(abs(direct)), rel=1e-13)


def test_signed_logsumexp_total_cancellation():
    sign, lm = signed_logsumexp([0.3, 0.3], [1, -1])
    assert sign == 0 and lm == float("-inf")


@given(shift=finite)
@settings(max_examples=50, deadline=None)
def test_signed_logsumexp_shift_invariance(shift):
    """Adding c to every log multiplies the sum by e^c exactly."""
    logs = np.array([0.0, -1.3, 2.2, -25.0])
    signs = np.array([1, -1, 1, 1])
    _, base = signed_logsumexp(logs, signs)
    _, moved = signed_logsumexp(logs + shift, signs)
    assert moved - base == pytest.approx(shift, abs=1e-9)


# ----------------------------------------------------------------------
# quadrature rules
# ----------------------------------------------------------------------
def test_gl_nodes_polynomial_exactness():
    x, w = gl_nodes(8)
    for k in range(0, 16, 2):  # degree <= 2n-1 integrated exactly
        got = float(np.dot(w, x ** k))
        assert got == pytest.approx(2.0 / (k + 1), rel=1e-14)


def test_adaptive_quad_gaussian_moment(golden):
    val = adaptive_quad(
        lambda x: LogValue.from_float(x * x * math.exp(-x * x)), 0.0, 9.0)
    assert val.to_float() == pytest.approx(golden["quad_x2_gauss"], rel=1e-11)


def test_tanh_sinh_endpoint_singularity():
    # int_0^1 x^(-1/2) dx = 2 with an endpoint branch point
    val = tanh_sinh_quad(
        lambda x, xa, bx: LogValue.from_log(1, -0.5 * math.log(xa)),
        0.0, 1.0)
    assert val.to_float() == pytest.approx(2.0, rel=1e-11)


def test_exp_sinh_exponential_tail():
    val = exp_sinh_quad(
        lambda x, xa: LogValue.from_float(math.exp(-x)), 0.0)
    assert val.to_float() == pytest.approx(1.0, rel=1e-11)


def test_adaptive_quad_empty_and_reversed_interval():
    f = lambda x: LogValue.one()
    assert adaptive_quad(f, 1.0, 1.0).is_zero()
    with pytest.raises(DomainError):
        adaptive_quad(f, 2.0, 1.0)


# ----------------------------------------------------------------------
# Bessel K
# ----------------------------------------------------------------------
@pytest.mark.parametrize("z,key", [
    (0.1, "log_k_nu075_z0p1"),
    (1.0, "log_k_nu075_z1"),
    (10.0, "log_k_nu075_z10"),
    (700.0, "log_k_nu075_z700"),
])
def test_bessel_k_log_golden(golden, z, key):
    assert bessel_k_log(0.75, z) == pytest.approx(golden[key], abs=2e-12)


@pytest.mark.parametrize("z,key", [
    (1e5, "log_kve_nu175_z1e5"),
    (1e6, "log_kve_nu175_z1e6"),
    (1e7, "log_kve_nu175_z1e7"),
    (1e12, "log_kve_nu175_z1e12"),
])
def test_bessel_kve_log_golden(golden, z, key):
    assert bessel_kve_log(1.75, z) == pytest.approx(golden[key], abs=1e-12)


def test_bessel_kve_log_golden_nu225(golden):
    got = bessel_kve_log(2.25, 2e9)
    assert got == pytest.approx(golden["log_kve_nu225_z2e9"], abs=1e-12)


def test_bessel_kve_log_branch_stitch():
    """The scipy and asymptotic regimes agree where they hand over."""
    for nu in (0.25, 1.5, 2.25):
        below = bessel_kve_log(nu, np.array([999_990.0]))[0]
        above = bessel_kve_log(nu, np.array([1_000_010.0]))[0]
        # d/dz log(e^z K(z)) = -1/(2z) + O(z^-2), so the 20-wide step
        # across the handover must move the value by -1e-5 and nothing else
        assert above - below == pytest.approx(-1e-5, abs=1e-10)


def test_bessel_k_log_rejects_nonpositive():
    with pytest.raises(DomainError):
        bessel_k_log(0.5, 0.0)
    with pytest.raises(DomainError):
        bessel_kve_log(0.5, np.array([1.0, -2.0]))


# ----------------------------------------------------------------------
# oscillatory transforms
# ----------------------------------------------------------------------
def test_osc_sin_quad_lorentzian():
    # int_0^inf sin(lam r) e^(-lam) dlam = r / (1 + r^2)
    r = 3.7
    val, mass = osc_sin_quad(lambda l: np.exp(-l), r, 80.0)
    assert val == pytest.approx(r / (1.0 + r * r), rel=1e-10)
    assert mass >= abs(val)


def test_sine_transform_matches_closed_form():
    lam = np.linspace(0.0, 60.0, 2400)
    vals = np.exp(-lam)
    r = 1.3
    got = sine_transform(lam, vals, r)
    want = (r - math.exp(-60.0) * (math.sin(60 * r)
            + r * math.cos(60 * r))) / (1 + r * r)
    assert got == pytest.approx(want, rel=1e-7)  # O(h^4) cubic-fit error


def test_sine_transform_resolution_guard():
    lam = np.linspace(0.0, 60.0, 30)  # far too coarse for r = 40
    with pytest.raises(ResolutionError, match="nodes"):
        sine_transform(lam, np.exp(-lam), 40.0)
