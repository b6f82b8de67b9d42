"""Rank-one space descriptors and closed-form spectral data.

A space is described by its restricted-root data: the multiplicities
(m_alpha, m_2alpha) of the indivisible positive root alpha and of 2*alpha,
and |alpha|.  Everything geometric used downstream derives from these:

    rho_norm = |alpha| (m_alpha/2 + m_2alpha)          (half sum of roots)
    dim_n    = rank + m_alpha + m_2alpha               (manifold dimension)
    dim_nu   = rank + 2                                ("pseudo-dimension")

Real hyperbolic space H^n is the preset family (m_alpha = n-1, m_2alpha = 0,
|alpha| = 1).  Radial variables are geodesic distances r = |x+|; spectral
variables are the scalar component of lambda along the unit-alpha axis, so
<alpha, lambda> = |alpha| lambda and <alpha, x+> = |alpha| r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import loggamma

from .numerics import DomainError

__all__ = [
    "SpaceDescriptor",
    "derive_invariants",
    "preset",
    "PRESET_NAMES",
    "surface_constant",
    "pi_poly",
    "pi_rho_tilde",
    "b_function",
    "b_at_minus_i",
    "b_zero",
    "cartan_density_log",
    "log_sinh",
    "phi0_envelope_log",
    "phi0_asymptotic_log",
    "asymptotic_constants",
]


@dataclass(frozen=True)
class SpaceDescriptor:
    rank: int
    m_alpha: int
    m_2alpha: int
    alpha_norm: float
    rho_norm: float
    dim_n: int
    dim_nu: int
    calib_C0: float | None = None

    # -- serialization (flat key=value lines, stable order) -------------
    def to_text(self) -> str:
        lines = [
            f"rank={self.rank}",
            f"m_alpha={self.m_alpha}",
            f"m_2alpha={self.m_2alpha}",
            f"alpha_norm={self.alpha_norm!r}",
            f"rho_norm={self.rho_norm!r}",
            f"dim_n={self.dim_n}",
            f"dim_nu={self.dim_nu}",
            f"calib_C0={'none' if self.calib_C0 is None else repr(self.calib_C0)}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SpaceDescriptor":
        kv = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"descriptor line without '=': {line!r}")
            k, v = line.split("=", 1)
            kv[k.strip()] = v.strip()
        try:
            calib = kv.get("calib_C0", "none")
            desc = cls(
                rank=int(kv["rank"]),
                m_alpha=int(kv["m_alpha"]),
                m_2alpha=int(kv["m_2alpha"]),
                alpha_norm=float(kv["alpha_norm"]),
                rho_norm=float(kv["rho_norm"]),
                dim_n=int(kv["dim_n"]),
                dim_nu=int(kv["dim_nu"]),
                calib_C0=None if calib == "none" else float(calib),
            )
        except KeyError as e:
            raise ValueError(f"descriptor missing key {e.args[0]!r}") from None
        check = derive_invariants(desc.m_alpha, desc.m_2alpha,
                                  desc.alpha_norm, desc.rank)
        if (abs(check.rho_norm - desc.rho_norm) > 1e-12 * (1 + desc.rho_norm)
                or check.dim_n != desc.dim_n or check.dim_nu != desc.dim_nu):
            raise DomainError("descriptor fields inconsistent with root data")
        return desc

    def with_calibration(self, c0: float) -> "SpaceDescriptor":
        return replace(self, calib_C0=float(c0))

    @property
    def is_calibrated(self) -> bool:
        return self.calib_C0 is not None

    def require_calibrated(self) -> float:
        if self.calib_C0 is None:
            raise DomainError(
                "descriptor is not calibrated (calib_C0 missing); run "
                "spectral.calibrate first")
        return self.calib_C0

    def require_numeric(self) -> None:
        """Guard for the quadrature paths (rank one, no double root)."""
        if self.rank != 1:
            raise DomainError("numerical paths require rank == 1")
        if self.m_2alpha != 0:
            raise DomainError(
                "numerical paths require m_2alpha == 0 (real hyperbolic "
                "family); constants and b_function still work")


def derive_invariants(m_alpha: int, m_2alpha: int = 0,
                      alpha_norm: float = 1.0, rank: int = 1
                      ) -> SpaceDescriptor:
    if m_alpha < 1 or m_2alpha < 0:
        raise DomainError("need m_alpha >= 1 and m_2alpha >= 0")
    if alpha_norm <= 0:
        raise DomainError("alpha_norm must be positive")
    rho = alpha_norm * (0.5 * m_alpha + m_2alpha)
    return SpaceDescriptor(
        rank=rank,
        m_alpha=m_alpha,
        m_2alpha=m_2alpha,
        alpha_norm=alpha_norm,
        rho_norm=rho,
        dim_n=rank + m_alpha + m_2alpha,
        dim_nu=rank + 2,
    )


PRESET_NAMES = ("H2", "H3", "H4", "H5")


def preset(name: str) -> SpaceDescriptor:
    name = name.strip().upper()
    if name not in PRESET_NAMES:
        raise DomainError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    n = int(name[1:])
    return derive_invariants(m_alpha=n - 1, m_2alpha=0, alpha_norm=1.0)


def surface_constant(desc: SpaceDescriptor) -> float:
    """|S^(n-1)| = 2 pi^(n/2) / Gamma(n/2), the angular mass in polar form."""
    n = desc.dim_n
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def pi_poly(desc: SpaceDescriptor, lam):
    """<alpha, lambda> as a function of the scalar spectral coordinate."""
    return desc.alpha_norm * lam


def pi_rho_tilde(desc: SpaceDescriptor) -> float:
    """<alpha, rho~> where rho~ is rho renormalised by <rho, alpha>."""
    return 0.5 * desc.alpha_norm ** 2


# ----------------------------------------------------------------------
# b-function (Gamma-quotient normalisation of the c-function)
# ----------------------------------------------------------------------

def _gamma_factor_guard(arg: complex, label: str) -> None:
    re, im = arg.real, arg.imag
    if abs(im) < 1e-12:
        k = round(re)
        if k <= 0 and abs(re - k) < 1e-12:
            raise DomainError(
                f"b_function: Gamma({label}) hits a pole at argument {arg}")


def b_function(desc: SpaceDescriptor, z: complex) -> complex:
    """The Gamma-quotient factor b(z) of the c-function.

    Normalised so that the spherical Plancherel density is
    |pi(i lambda)|^2 |b(-lambda)|^(-2) up to the calibration constant, and
    the c-function is c(lambda) = b(lambda)/pi(i lambda).  On H3 the
    quotient collapses to 1 identically; on H2, b(0) = 1/pi.
    """
    z = complex(z)
    m, m2 = desc.m_alpha, desc.m_2alpha
    q = 0.5 * m + m2
    num1 = 1j * z + 1.0
    den1 = 1j * z + 0.5 * m
    num2 = 0.5j * z + 0.25 * m
    den2 = 0.5j * z + 0.25 * m + 0.5 * m2
    for a, lbl in ((num1, "iz+1"), (num2, "iz/2+m_alpha/4")):
        _gamma_factor_guard(a, lbl)
    for a in (den1, den2):
        # a denominator pole means b has a zero there; that is fine
        re, im = a.real, a.imag
        if abs(im) < 1e-12:
            k = round(re)
            if k <= 0 and abs(re - k) < 1e-12:
                return 0.0 + 0.0j
    log_pref = (loggamma(q + 0.5 * m) - loggamma(q)
                + loggamma(0.5 * q + 0.25 * m + 0.5 * m2)
                - loggamma(0.5 * q + 0.25 * m))
    log_z = (loggamma(num1) - loggamma(den1)
             + loggamma(num2) - loggamma(den2))
    return desc.alpha_norm ** 2 * complex(np.exp(log_pref + log_z))


def b_at_minus_i(desc: SpaceDescriptor, s: float) -> float:
    """b(-i s) for real s (real positive Gamma arguments, fast path).

    This is the factor appearing in the sharp kernel asymptotics with
    s in [0, rho_norm/alpha_norm]; any s > -1 with all arguments positive
    is accepted.
    """
    m, m2 = desc.m_alpha, desc.m_2alpha
    q = 0.5 * m + m2
    args_num = (s + 1.0, 0.5 * s + 0.25 * m)
    args_den = (s + 0.5 * m, 0.5 * s + 0.25 * m + 0.5 * m2)
    labels = ("s+1", "s/2+m_alpha/4")
    for a, lbl in zip(args_num, labels):
        if a <= 0:
            raise DomainError(
                f"b_at_minus_i: Gamma({lbl}) nonpositive argument {a}")
    for a in args_den:
        if a <= 0:
            raise DomainError(
                f"b_at_minus_i: denominator Gamma argument {a} <= 0")
    log_pref = (math.lgamma(q + 0.5 * m) - math.lgamma(q)
                + math.lgamma(0.5 * q + 0.25 * m + 0.5 * m2)
                - math.lgamma(0.5 * q + 0.25 * m))
    log_s = (math.lgamma(args_num[0]) - math.lgamma(args_den[0])
             + math.lgamma(args_num[1]) - math.lgamma(args_den[1]))
    return desc.alpha_norm ** 2 * math.exp(log_pref + log_s)


def b_zero(desc: SpaceDescriptor) -> float:
    return b_at_minus_i(desc, 0.0)


# ----------------------------------------------------------------------
# Radial geometry
# ----------------------------------------------------------------------

def log_sinh(x):
    """log sinh x for x > 0, stable for both tiny and huge x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("log_sinh: need x > 0")
    # -expm1 keeps full precision for tiny x (log1p(-exp(.)) loses ~1e-9)
    return x + np.log(-np.expm1(-2.0 * x)) - math.log(2.0)


def cartan_density_log(desc: SpaceDescriptor, r):
    """log of the radial density: sinh^m_a(|a|r) sinh^m_2a(2|a|r).

    The measure of a radial function f is
    surface_constant(desc) * int_0^inf f(r) exp(cartan_density_log) dr.
    """
    ar = desc.alpha_norm * np.asarray(r, dtype=float)
    out = desc.m_alpha * log_sinh(ar)
    if desc.m_2alpha:
        out = out + desc.m_2alpha * log_sinh(2.0 * ar)
    return out


def phi0_envelope_log(desc: SpaceDescriptor, r):
    """log of the two-sided envelope (1 + |a| r) e^{-rho r} of phi_0."""
    r = np.asarray(r, dtype=float)
    return np.log1p(desc.alpha_norm * r) - desc.rho_norm * r


def phi0_asymptotic_log(desc: SpaceDescriptor, r):
    """log of the sharp large-r form  C1 * |a| r * e^{-rho r}  of phi_0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("phi0_asymptotic_log: need r > 0")
    c1 = b_zero(desc) / pi_rho_tilde(desc)
    return math.log(c1) + np.log(desc.alpha_norm * r) - desc.rho_norm * r


# ----------------------------------------------------------------------
# Constants of the sharp asymptotics
# ----------------------------------------------------------------------

def asymptotic_constants(desc: SpaceDescriptor, sigma: float | None = None
                         ) -> dict[str, float]:
    """Leading constants of the kernel asymptotics.

    Returns C1 (spherical function), and - when the descriptor is
    calibrated - C2 (heat).  With sigma also given, adds C_sigma
    (fractional Poisson) and C_tilde_sigma (its distinguished variant).
    The latter three scale linearly with the inversion constant, which is
    why calibration is required first.
    """
    b0 = b_zero(desc)
    c1 = b0 / pi_rho_tilde(desc)
    out = {"C1": c1}
    if desc.calib_C0 is None:
        return out
    c0 = desc.calib_C0
    # The long-time laws pick up the spectral density at the bottom of the
    # spectrum: density ~ A lam^2 with A = (|alpha| / b(0))^2, so
    # C2 = c0 A sqrt(pi)/4 from int lam^2 e^{-t lam^2} = (sqrt(pi)/4) t^{-3/2}.
    # (On the 3-d preset A = 1 and b0 = 1; A is NOT 2/C1 in general.)
    a_dens = (desc.alpha_norm / b0) ** 2
    out["C2"] = c0 * math.sqrt(math.pi) * a_dens / 4.0
    if sigma is not None:
        if not 0.0 < sigma < 1.0:
            raise DomainError("sigma must be in (0, 1)")
        rho = desc.rho_norm
        # subordinating the sharp heat form against w_sigma:
        # C_sigma = C2 sqrt(pi) 2^{sigma+2} rho^{sigma+1} / (4^sigma G(sigma))
        out["C_sigma"] = (out["C2"] * math.sqrt(math.pi)
                          * 2.0 ** (sigma + 2) * rho ** (sigma + 1)
                          / (4.0 ** sigma * math.gamma(sigma)))
        out["C_tilde_sigma"] = (c0 * 4.0 * math.sqrt(math.pi)
                                * math.gamma(sigma + 1.5)
                                / (math.gamma(sigma) * c1 * b0))
    return out
