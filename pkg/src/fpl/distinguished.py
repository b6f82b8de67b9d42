"""Distinguished-Laplacian fractional Poisson kernel and its twisted norms.

The distinguished operator on the solvable realisation of the space has
spectrum [0, inf): its fractional Poisson multiplier is

    m0(lam) = (2^{1-sigma}/Gamma(sigma)) (t lam)^sigma K_sigma(t lam),

the gap-free analogue of the ambient multiplier (at sigma = 1/2 it is
exactly e^{-t lam}).  Its kernel is a *twisted* radial object

    Qt~(x) = e^{-rho B(x)} Q0(r(x)),

with B the Busemann (horocyclic) coordinate, |B| <= r; only the radial
profile Q0 needs quadrature.  Everything about the twist reduces to radial
functionals through the classical average

    Avg_{theta} e^{-rho B(r, theta)} = phi_0(r),

so e.g. the L1 norm of a twisted function is c_s * int |F| phi_0 delta dr
and the sup norm is sup_r e^{rho r} |F(r)|.

In subordination time the spectral gap shift e^{rho^2 u} cancels the
ambient gap exactly, leaving a pure power-times-e^{-A/u} integral - which
on the 3-d preset evaluates in closed form to

    Q0 = C~(sigma) t^{2 sigma} (t^2 + r^2)^{-sigma-3/2} phi_0(r),
    C~(sigma) = Gamma(sigma + 3/2) / (pi^{3/2} Gamma(sigma)),

exact for every sigma (total twisted mass exactly 1: the profile integral
collapses to a Beta function because phi_0^2 delta = r^2 there).  Long-time
decay is polynomial - t^{2 sigma} * t^{-2 sigma - 3} - in sharp contrast
with the exponentially decaying ambient kernel; this contrast is the point
of the counterexample experiment in convergence.py.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import betainc, kve

from . import space as sp
from . import spectral as spec
from .kernels import (
    _check_r,
    _check_sigma,
    _check_t,
    _heat_node_aggregate,
    _is_h3,
)
from .numerics import (
    CancellationError,
    DomainError,
    LogValue,
    gl_nodes,
    osc_sin_quad,
    signed_logsumexp,
)

__all__ = [
    "q0_multiplier",
    "q0_multiplier_log",
    "q0_kernel",
    "q0_subordination",
    "q0_spectral",
    "q0_closed_h3",
    "q0_routes_delta",
    "ctilde_constant",
    "q0_envelope_log",
    "q0_bounds_ratio",
    "q0_asymptotic_ratio",
    "busemann_log",
    "qtilde_eval",
    "qtilde_sup_norm",
    "qtilde_witness_log",
    "qtilde_critical_mass",
    "mass_functional_s",
    "mass_functional_x",
]


# ----------------------------------------------------------------------
# Multiplier
# ----------------------------------------------------------------------

def q0_multiplier_log(desc: sp.SpaceDescriptor, t: float, sigma: float, lam):
    """log m0(lam); m0(0) = 1 (no spectral gap) and m0 ~ e^{-t lam}."""
    _check_t(t)
    _check_sigma(sigma)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("q0_multiplier_log: lam must be >= 0")
    z = t * lam
    out = np.zeros_like(z)
    pos = z > 0
    zp = z[pos]
    out[pos] = ((1.0 - sigma) * math.log(2.0) - math.lgamma(sigma)
                + sigma * np.log(zp) + np.log(kve(sigma, zp)) - zp)
    return out if np.ndim(lam) else float(out)


def q0_multiplier(desc: sp.SpaceDescriptor, t: float, sigma: float, lam):
    out = np.exp(q0_multiplier_log(desc, t, sigma, np.asarray(lam, float)))
    return out if np.ndim(lam) else float(out)


# ----------------------------------------------------------------------
# Radial profile Q0: three routes
# ----------------------------------------------------------------------

def ctilde_constant(sigma: float) -> float:
    """C~(sigma) = Gamma(sigma+3/2) / (pi^{3/2} Gamma(sigma))."""
    _check_sigma(sigma)
    return math.gamma(sigma + 1.5) / (math.pi ** 1.5 * math.gamma(sigma))


def q0_closed_h3(desc: sp.SpaceDescriptor, t: float, sigma: float,
                 r: float) -> LogValue:
    """Exact closed form on the 3-d preset (every sigma)."""
    if not _is_h3(desc):
        raise DomainError("q0_closed_h3: 3-d preset only")
    _check_t(t)
    _check_sigma(sigma)
    _check_r(r)
    p0 = 0.0 if r == 0.0 else math.log(r) - float(sp.log_sinh(r))
    lm = (math.log(ctilde_constant(sigma)) + 2.0 * sigma * math.log(t)
          - (sigma + 1.5) * math.log(t * t + r * r) + p0)
    return LogValue(1, lm)


def q0_subordination(desc: sp.SpaceDescriptor, t: float, sigma: float,
                     r: float, heat_route: str = "auto") -> LogValue:
    """Q0 by subordination against the gap-shifted heat kernel.

    The weight carries e^{+rho^2 u}, cancelling the ambient spectral gap;
    the surviving integrand is u^{-1-sigma-nu/2} e^{-(t^2+r^2)/(4u)} times
    the heat power factors, integrated on a log-u window that covers the
    saddle and the fat power tail to ~75 e-folds.
    """
    desc.require_numeric()
    _check_t(t)
    _check_sigma(sigma)
    _check_r(r)
    rho = desc.rho_norm
    a_exp = 0.25 * (t * t + r * r)
    nu = sigma + 1.5
    u_star = a_exp / (1.0 + nu)
    v_lo = math.log(u_star) - math.log1p(75.0 / (1.0 + nu))
    v_hi = math.log(u_star) + 75.0 / (1.0 + nu) + 1.0
    n_panels = max(8, int(math.ceil((v_hi - v_lo) / 0.2)))
    edges = np.linspace(v_lo, v_hi, n_panels + 1)
    gx, gw = gl_nodes(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    v = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    lw = np.log(half[:, None] * gw[None, :]).ravel()
    u = np.exp(v)
    log_w = (2.0 * sigma * math.log(t) - sigma * math.log(4.0)
             - math.lgamma(sigma) - (1.0 + sigma) * v - t * t / (4.0 * u))
    if _is_h3(desc) and heat_route in ("auto", "closed"):
        p0 = 0.0 if r == 0.0 else math.log(r) - float(sp.log_sinh(r))
        log_h_shift = (-1.5 * (math.log(4.0 * math.pi) + v)
                       - r * r / (4.0 * u) + p0)
        logs = log_w + log_h_shift + v + lw
        _, lm = signed_logsumexp(logs, np.ones(logs.size))
        return LogValue(1, lm)
    if heat_route == "closed":
        raise DomainError("closed heat route exists on the 3-d preset only")
    if heat_route not in ("auto", "spectral"):
        raise DomainError(f"unknown heat route {heat_route!r}")
    return _heat_node_aggregate(desc, u, log_w + rho * rho * u + v + lw, r,
                                f"q0_subordination(t={t:g})")


def q0_spectral(desc: sp.SpaceDescriptor, t: float, sigma: float, r: float,
                rel_floor: float = 1e-7) -> LogValue:
    """Q0 by real-axis spectral inversion (3-d preset).

    Unlike the ambient kernel the cancellation here is only polynomial
    (~(t/r)^{2 sigma + 2}), because the gap-free multiplier pays no
    e^{-rho r} against the unsigned mass - so this route is valid at every
    radius of the experiments.  The lam^{2 sigma} branch point at lam = 0
    gets a tanh-sinh first panel.
    """
    if not _is_h3(desc):
        raise DomainError(
            "q0_spectral: 3-d preset only (generic presets use the "
            "subordination route)")
    c0 = desc.require_calibrated()
    _check_t(t)
    _check_sigma(sigma)
    _check_r(r)
    lam_max = 64.0 / t + 2.0

    def g(lam):
        return np.exp(q0_multiplier_log(desc, t, sigma, lam)) * lam

    if r == 0.0:
        val, mass = spec._integral_nonosc(lambda l: g(l) * l, lam_max)
    else:
        val, mass = osc_sin_quad(g, r, lam_max, singular_zero=True)
    noise = 5e-16 * mass
    if val <= 0.0 or noise > rel_floor * val:
        raise CancellationError(
            f"q0_spectral: cancellation floor at t = {t:.6g}, r = {r:.6g} "
            f"(value ~ {val:.3e}, noise ~ {noise:.3e})")
    lm = math.log(c0 * val)
    if r > 0.0:
        lm -= float(sp.log_sinh(r))
    return LogValue(1, lm)


def q0_kernel(desc: sp.SpaceDescriptor, t: float, sigma: float, r: float,
              route: str = "auto") -> LogValue:
    """Distinguished-kernel radial profile with route dispatch."""
    if route == "auto":
        route = "closed" if _is_h3(desc) else "subordination"
    if route == "closed":
        return q0_closed_h3(desc, t, sigma, r)
    if route == "subordination":
        return q0_subordination(desc, t, sigma, r)
    if route == "spectral":
        return q0_spectral(desc, t, sigma, r)
    raise DomainError(f"unknown q0 route {route!r}")


def q0_routes_delta(desc: sp.SpaceDescriptor, t: float, sigma: float,
                    r: float) -> tuple[LogValue, LogValue, float]:
    a = q0_subordination(desc, t, sigma, r)
    b = q0_spectral(desc, t, sigma, r)
    rel = abs(math.expm1(b.log_mag - a.log_mag))
    return a, b, rel


# ----------------------------------------------------------------------
# Envelopes and asymptotics
# ----------------------------------------------------------------------

def q0_envelope_log(desc: sp.SpaceDescriptor, t: float, sigma: float, r):
    """log of the elementary envelope t^{2s} phi_0(r) (t+r)^{-3-2s}."""
    desc.require_numeric()
    _check_t(t)
    _check_sigma(sigma)
    r = np.asarray(r, dtype=float)
    return (2.0 * sigma * math.log(t) + spec.phi0_log(desc, r)
            - (3.0 + 2.0 * sigma) * np.log(t + r))


def q0_bounds_ratio(desc: sp.SpaceDescriptor, t: float, sigma: float,
                    r: float, route: str = "auto") -> float:
    """Q0 over its envelope: two-sidedly bounded at all t, r."""
    q = q0_kernel(desc, t, sigma, r, route)
    return math.exp(q.log_mag - float(q0_envelope_log(desc, t, sigma, r)))


def q0_asymptotic_ratio(desc: sp.SpaceDescriptor, t: float, sigma: float,
                        r: float, route: str = "auto") -> float:
    """Q0 against C~_sigma t^{2s} (t^2+r^2)^{-s-3/2} phi_0(r) -> 1.

    On the 3-d preset the sharp form is exact, so the ratio sits at 1 to
    quadrature accuracy whichever route computes Q0.
    """
    consts = sp.asymptotic_constants(desc, sigma)
    if "C_tilde_sigma" not in consts:
        raise DomainError("q0_asymptotic_ratio needs a calibrated descriptor")
    q = q0_kernel(desc, t, sigma, r, route)
    sharp = (math.log(consts["C_tilde_sigma"]) + 2.0 * sigma * math.log(t)
             - (sigma + 1.5) * math.log(t * t + r * r)
             + float(spec.phi0_log(desc, r)))
    return math.exp(q.log_mag - sharp)


# ----------------------------------------------------------------------
# The Busemann twist
# ----------------------------------------------------------------------

def busemann_log(r: float, theta: float) -> float:
    """B(r, theta) = log(cosh r + sinh r cos theta), computed stably.

    theta is the polar angle from the distinguished boundary direction;
    B ranges over [-r, r] with B(r, 0) = r, B(r, pi) = -r.
    """
    if r < 0:
        raise DomainError("busemann_log: r must be >= 0")
    c2 = math.cos(0.5 * theta) ** 2
    s2 = math.sin(0.5 * theta) ** 2
    return r + math.log(c2 + math.exp(-2.0 * r) * s2)


def qtilde_eval(desc: sp.SpaceDescriptor, t: float, sigma: float,
                r: float, b_coord: float, route: str = "auto") -> LogValue:
    """Qt~ at a point with radius r and Busemann coordinate b_coord.

    The twist is e^{-rho b}; geometry forces |b| <= r (DomainError beyond).
    """
    if abs(b_coord) > r * (1.0 + 1e-12):
        raise DomainError(
            f"qtilde_eval: Busemann coordinate {b_coord} outside [-r, r]")
    q = q0_kernel(desc, t, sigma, r, route)
    return LogValue(q.sign, q.log_mag - desc.rho_norm * b_coord)


def _log_qtilde_sup_integrand(desc, t, sigma, r: float, route: str) -> float:
    return (q0_kernel(desc, t, sigma, r, route).log_mag
            + desc.rho_norm * r)


def qtilde_sup_norm(desc: sp.SpaceDescriptor, t: float, sigma: float,
                    route: str = "auto") -> tuple[LogValue, float]:
    """sup over the group of Qt~ -> (value, radius attaining it).

    The sup of e^{-rho B} Q0(r) over each sphere sits at B = -r, so this
    is sup_r e^{rho r} Q0(r); t^2 times it is flat in t (the gap-free
    scaling), which the acceptance suite checks.
    """
    _check_t(t)
    _check_sigma(sigma)

    def f(r: float) -> float:
        return _log_qtilde_sup_integrand(desc, t, sigma, max(r, 0.0), route)

    grid = np.sinh(np.linspace(0.0, math.asinh(10.0 * t + 10.0), 160))
    vals = np.array([f(float(r)) for r in grid])
    k = int(np.argmax(vals))
    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, grid.size - 1)])
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(60):
        if b - a < 1e-10 * (1.0 + b):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    r_at = 0.5 * (a + b)
    return LogValue(1, f(r_at)), r_at


def qtilde_witness_log(desc: sp.SpaceDescriptor, t: float,
                       sigma: float, route: str = "auto") -> float:
    """log of e^{rho r} Q0(r) at the stated witness radius r = rho t.

    The witness is within a bounded factor of the true sup (same t-order);
    the acceptance suite checks the factor stays below 10.
    """
    r_w = desc.rho_norm * t
    return _log_qtilde_sup_integrand(desc, t, sigma, r_w, route)


# ----------------------------------------------------------------------
# Twisted masses
# ----------------------------------------------------------------------

def mass_functional_s(desc: sp.SpaceDescriptor, fn, r_support: float) -> float:
    """Group mass of the twisted extension of a radial profile:

        int e^{-rho B} F(r) = c_s * int F(r) phi_0(r) delta(r) dr,

    which equals the forward transform of F at spectral parameter 0.
    """
    desc.require_numeric()
    return _radial_weighted_mass(desc, fn, r_support, use_phi0=True)


def mass_functional_x(desc: sp.SpaceDescriptor, fn, r_support: float) -> float:
    """Ambient mass c_s * int F(r) delta(r) dr (phi at +-i rho is 1)."""
    desc.require_numeric()
    return _radial_weighted_mass(desc, fn, r_support, use_phi0=False)


def _radial_weighted_mass(desc, fn, r_support, use_phi0: bool) -> float:
    width = min(0.2, r_support / 40.0)
    n_panels = max(8, int(math.ceil(r_support / width)))
    edges = np.linspace(0.0, r_support, n_panels + 1)
    gx, gw = gl_nodes(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    rr = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ww = (half[:, None] * gw[None, :]).ravel()
    weight = np.exp(sp.cartan_density_log(desc, rr))
    if use_phi0:
        weight = weight * np.exp(spec.phi0_log(desc, rr))
    return sp.surface_constant(desc) * float(np.dot(ww, fn(rr) * weight))


def qtilde_critical_mass(desc: sp.SpaceDescriptor, t: float, sigma: float,
                         eps: float) -> dict[str, float]:
    """Twisted-mass split across the group annulus t^{1-eps} <= r <= t^{1+eps}.

    On the 3-d preset phi_0^2 delta = r^2 exactly, so the twisted mass
    profile is 4 pi C~ t^{2s} r^2 (t^2+r^2)^{-s-3/2}: a Beta density in
    r^2/(t^2+r^2) with total mass exactly 1.  The split is evaluated with
    the regularised incomplete Beta function - no radial truncation of the
    fat r^{-1-2 sigma} tail is ever taken.
    """
    if not _is_h3(desc):
        raise DomainError("qtilde_critical_mass: 3-d preset only")
    if t <= 1.0:
        raise DomainError("qtilde_critical_mass: stated for t > 1")
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must lie in (0, 1)")
    _check_sigma(sigma)
    a = t ** (1.0 - eps)
    b = t ** (1.0 + eps)

    def cdf(r: float) -> float:
        x = r * r / (t * t + r * r)
        return float(betainc(1.5, sigma, x))

    below = cdf(a)
    inside = cdf(b) - cdf(a)
    above = 1.0 - cdf(b)
    return {
        "inside": inside,
        "below": below,
        "above": above,
        "outside": below + above,
    }
