"""Spherical functions, Plancherel measure, and the radial Fourier pair.

The forward transform of a radial function f is

    Hf(lam) = surface_const * int_0^inf f(r) phi_lam(r) delta(r) dr,

and inversion is  f(r) = C0 * int_0^inf g(lam) phi_lam(r) density(lam) dlam
with the calibration constant C0 pinned numerically (heat kernel mass = 1)
and cross-checked against its closed form.

Spherical functions use the integral representation obtained from the ball
model by substituting v = log(cosh r - sinh r cos theta):

    phi_lam(r) = int_{-r}^{r} K(v, r) cos(lam v) dv,
    K(v, r) = e^{(1 - m/2) v} [(e^v - e^{-r})(e^r - e^v)]^{(n-3)/2}
              / (Z_n sinh^{n-2} r),

a Fourier integral with positive weight (n = m+1, Z_n = int sin^{n-2}).
On H3 the weight is constant and phi collapses to sin(lam r)/(lam sinh r).

Inverse transforms at radii where the real-axis lambda integral cancels
below double precision raise CancellationError rather than returning noise;
the kernel-specific shifted-contour engines in kernels.py take over where
they apply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import space as sp
from .numerics import (
    LOG_ZERO,
    CancellationError,
    DomainError,
    LogValue,
    ResolutionError,
    _ts_linear_nodes,
    cos_transform_grid,
    gl_nodes,
    signed_logsumexp,
    sine_transform,
)

__all__ = [
    "RadialFunction",
    "SpectralFunction",
    "spherical_function",
    "phi0_log",
    "phi_imag_log",
    "plancherel_density",
    "density_via_b",
    "calibrate",
    "analytic_calibration",
    "sft_forward",
    "sft_inverse",
    "radial_convolve",
    "l2_norm_radial",
    "l2_norm_spectral",
    "lam_max_gaussian",
    "lam_max_exponential",
    "radial_integral_log",
]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ======================================================================
# Data containers
# ======================================================================

@dataclass
class RadialFunction:
    """Samples of a radial function as (r, sign, log magnitude) triples."""

    r: np.ndarray
    sign: np.ndarray
    log_mag: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.sign = np.asarray(self.sign, dtype=np.int8)
        self.log_mag = np.asarray(self.log_mag, dtype=float)
        if not (self.r.shape == self.sign.shape == self.log_mag.shape):
            raise ValueError("RadialFunction: mismatched array shapes")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("RadialFunction: r must be strictly increasing")
        dead = self.sign == 0
        self.log_mag = np.where(dead, LOG_ZERO, self.log_mag)

    @classmethod
    def from_floats(cls, rs, vals) -> "RadialFunction":
        vals = np.asarray(vals, dtype=float)
        sign = np.sign(vals).astype(np.int8)
        with np.errstate(divide="ignore"):
            log_mag = np.where(vals == 0.0, LOG_ZERO, np.log(np.abs(vals)))
        return cls(np.asarray(rs, dtype=float), sign, log_mag)

    def values(self) -> np.ndarray:
        """Collapse to doubles (underflows to 0 below exp(-745))."""
        out = np.zeros_like(self.log_mag)
        ok = self.sign != 0
        out[ok] = self.sign[ok] * np.exp(np.minimum(self.log_mag[ok], 709.0))
        return out

    def __call__(self, rq) -> np.ndarray:
        """Linear interpolation in linear space (for O(1)-scale data)."""
        return np.interp(np.asarray(rq, dtype=float), self.r, self.values())

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,sign,log_mag\n")
            for r, s, lm in zip(self.r, self.sign, self.log_mag):
                fh.write(f"{_fmt(r)},{int(s)},{_fmt(lm)}\n")

    @classmethod
    def from_csv(cls, path) -> "RadialFunction":
        rows = _read_csv_rows(path, ("r", "sign", "log_mag"))
        return cls(rows[:, 0], rows[:, 1].astype(np.int8), rows[:, 2])


@dataclass
class SpectralFunction:
    """Samples of a transform on the spectral half-line (plain doubles)."""

    lam: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.lam.shape != self.value.shape:
            raise ValueError("SpectralFunction: mismatched array shapes")
        if np.any(np.diff(self.lam) <= 0):
            raise ValueError("SpectralFunction: lam must be strictly increasing")

    def __call__(self, lq) -> np.ndarray:
        return np.interp(np.asarray(lq, dtype=float), self.lam, self.value)

    @property
    def lam_max(self) -> float:
        return float(self.lam[-1])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("lam,value\n")
            for l, v in zip(self.lam, self.value):
                fh.write(f"{_fmt(l)},{_fmt(v)}\n")

    @classmethod
    def from_csv(cls, path) -> "SpectralFunction":
        rows = _read_csv_rows(path, ("lam", "value"))
        return cls(rows[:, 0], rows[:, 1])


def _read_csv_rows(path, expected_header) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        cols = tuple(h.strip() for h in header.split(","))
        if cols != tuple(expected_header):
            raise ValueError(
                f"{path}: expected header {','.join(expected_header)!r}, "
                f"got {header!r}")
        data = [
            [float(tok) for tok in line.strip().split(",")]
            for line in fh if line.strip()
        ]
    if not data:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(data, dtype=float)
    if arr.shape[1] != len(expected_header):
        raise ValueError(f"{path}: wrong column count")
    return arr


# ======================================================================
# Spherical functions
# ======================================================================

def _z_const_log(m: int) -> float:
    # Z_n = int_0^pi sin^{n-2} = sqrt(pi) Gamma(m/2) / Gamma((m+1)/2), n = m+1
    return (0.5 * math.log(math.pi) + math.lgamma(0.5 * m)
            - math.lgamma(0.5 * (m + 1)))


def _phi_nodes(m: int, rt: float, lam_max: float):
    """Quadrature nodes on [-rt, rt] with the log weight of K(v, rt).

    Returns (v, log_K_w) where log_K_w already includes the panel weights,
    the normalising 1/(Z sinh^{n-2}) and handles the endpoint factors
    (power (m-2)/2, singular for m = 1) by tanh-sinh end panels with
    offsets computed stably.
    """
    p = 0.5 * (m - 2.0)
    norm = -(m - 1) * float(sp.log_sinh(rt)) - _z_const_log(m)

    w1 = min(0.25 * rt, 0.4)
    if lam_max > 0:
        w1 = min(w1, 0.25 * math.pi / lam_max)
    vs, logs = [], []

    def add(v, log_dl, log_dr, log_w):
        # log_dl = log(e^v - e^{-rt}), log_dr = log(e^rt - e^v)
        vs.append(v)
        logs.append((1.0 - 0.5 * m) * v + p * (log_dl + log_dr) + norm + log_w)

    # end panels (offsets measured from the endpoint, exact in doubles)
    off, ow = _ts_linear_nodes(0.0, w1, h=0.05)
    keep = off > 0
    off, ow = off[keep], ow[keep]
    for o, w in zip(off, ow):
        # left end: v = -rt + o
        v = -rt + o
        log_dl = -rt + math.log(math.expm1(o))
        log_dr = rt + math.log1p(-math.exp(-(2.0 * rt - o)))
        add(v, log_dl, log_dr, math.log(w))
        # right end: v = rt - o
        v = rt - o
        log_dl = v + math.log1p(-math.exp(-(v + rt)))
        log_dr = rt + math.log(-math.expm1(-o))
        add(v, log_dl, log_dr, math.log(w))

    lo, hi = -rt + w1, rt - w1
    if hi > lo:
        width = min(1.0, 0.5 * math.pi / max(lam_max, 1e-9), hi - lo)
        n_panels = max(2, int(math.ceil((hi - lo) / width)))
        edges = np.linspace(lo, hi, n_panels + 1)
        gx, gw = gl_nodes(16)
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            for x, w in zip(gx, gw):
                v = mid + half * x
                log_dl = v + math.log1p(-math.exp(-(v + rt)))
                log_dr = rt + math.log1p(-math.exp(-(rt - v)))
                add(v, log_dl, log_dr, math.log(half * w))

    return np.asarray(vs), np.asarray(logs)


def spherical_function(desc: sp.SpaceDescriptor, lam, r: float):
    """phi_lam(r) for real lam (scalar or array), plain double output."""
    desc.require_numeric()
    lam = np.asarray(lam, dtype=float)
    rt = desc.alpha_norm * float(r)
    lt = lam / desc.alpha_norm
    if rt < 0:
        raise DomainError("spherical_function: r must be >= 0")
    if rt == 0.0:
        return np.ones_like(lt) if lt.ndim else 1.0
    if desc.m_alpha == 2:
        out = (rt / math.sinh(rt)) * np.sinc(lt * rt / math.pi)
        return out if lt.ndim else float(out)
    v, log_kw = _phi_nodes(desc.m_alpha, rt, float(np.max(np.abs(lt))))
    m = float(np.max(log_kw))
    if m < -680.0:
        raise DomainError(
            "spherical_function underflows doubles at this radius; "
            "use phi0_log / phi_imag_log")
    base = np.exp(log_kw - m)
    out = (np.cos(np.outer(np.atleast_1d(lt), v)) @ base) * math.exp(m)
    return out if lt.ndim else float(out[0])


def phi0_log(desc: sp.SpaceDescriptor, r):
    """log phi_0(r), valid at any radius (log-domain quadrature)."""
    desc.require_numeric()
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(rs.shape)
    for i, ri in enumerate(rs):
        rt = desc.alpha_norm * float(ri)
        if rt == 0.0:
            out[i] = 0.0
            continue
        if desc.m_alpha == 2:
            out[i] = math.log(rt) - float(sp.log_sinh(rt))
            continue
        v, log_kw = _phi_nodes(desc.m_alpha, rt, 0.0)
        _, lm = signed_logsumexp(log_kw, np.ones(log_kw.size))
        out[i] = lm
    return out if np.ndim(r) else float(out[0])


def phi_imag_log(desc: sp.SpaceDescriptor, y: float, r):
    """log phi_{i y}(r) for imaginary spectral parameter (positive values).

    phi is even in the parameter, so only |y| matters; phi_{+-i rho} = 1
    identically, which is the anchor used by the mass functionals.
    """
    desc.require_numeric()
    yt = abs(y) / desc.alpha_norm
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(rs.shape)
    for i, ri in enumerate(rs):
        rt = desc.alpha_norm * float(ri)
        if rt == 0.0:
            out[i] = 0.0
            continue
        v, log_kw = _phi_nodes(desc.m_alpha, rt, 0.0)
        contrib = log_kw + _log_cosh_arr(yt * v)
        _, lm = signed_logsumexp(contrib, np.ones(contrib.size))
        out[i] = lm
    return out if np.ndim(r) else float(out[0])


def _log_cosh_arr(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


# ======================================================================
# Plancherel density
# ======================================================================

def plancherel_density(desc: sp.SpaceDescriptor, lam):
    """Spectral density |pi(i lam)|^2 |b(-lam)|^{-2} (calibration excluded).

    Closed elementary forms for the hyperbolic presets; the Gamma-quotient
    route (density_via_b) covers the general case and is what the closed
    forms are property-tested against.
    """
    if desc.rank != 1:
        raise DomainError("plancherel_density: rank one only")
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if desc.m_2alpha == 0 and desc.alpha_norm == 1.0:
        m = desc.m_alpha
        pref = math.exp(2.0 * (math.lgamma(0.5 * m) - math.lgamma(m)))
        if m % 2 == 0:  # dim odd: polynomial density
            js = np.arange(1, m // 2)
            poly = np.prod(js[:, None] ** 2 + lam[None, :] ** 2, axis=0) \
                if js.size else np.ones_like(lam)
            out = pref * lam ** 2 * poly
        else:           # dim even: tanh factor
            ks = np.arange(1, (m + 1) // 2) - 0.5
            poly = np.prod(ks[:, None] ** 2 + lam[None, :] ** 2, axis=0) \
                if ks.size else np.ones_like(lam)
            out = pref * lam * np.tanh(math.pi * lam) * poly
        return float(out[0]) if scalar else out
    out = density_via_b(desc, lam)
    return float(out[0]) if scalar else out


def density_via_b(desc: sp.SpaceDescriptor, lam):
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty(lam.shape)
    for i, l in enumerate(lam):
        if l == 0.0:
            out[i] = 0.0
            continue
        b = sp.b_function(desc, -l / desc.alpha_norm)
        out[i] = (desc.alpha_norm * l) ** 2 / abs(b) ** 2
    return float(out[0]) if scalar else out


# ======================================================================
# lambda-range policies
# ======================================================================

def lam_max_gaussian(t: float, margin: float = 60.0) -> float:
    """Range needed when the spectral envelope is exp(-t lam^2)."""
    return math.sqrt(margin / t) + 1.0


def lam_max_exponential(t: float, margin: float = 60.0) -> float:
    """Range needed when the spectral envelope is exp(-t lam)."""
    return margin / t + 2.0


# ======================================================================
# Radial integration helper (positive integrands, log domain)
# ======================================================================

def radial_integral_log(desc: sp.SpaceDescriptor, log_f, r_max: float,
                        scale: float = 1.0, r_min: float = 0.0) -> float:
    """log of surface_const * int f(r) delta(r) dr for positive f.

    log_f maps a numpy array of radii to log values; panels are sized by
    `scale` (the smoothness scale of f, which may be huge for heat shells
    at large times: the density growth is cancelled by the Gaussian decay,
    so the *product* really is smooth on that scale).  Used for kernel
    masses; the signed norms in convergence.py have their own kink-aware
    machinery.
    """
    width = max(scale / 3.0, 1e-3)
    n_panels = int(math.ceil((r_max - r_min) / width))
    if n_panels > 200_000:
        raise DomainError("radial_integral_log: panel budget exceeded")
    edges = np.linspace(r_min, r_max, n_panels + 1)
    gx, gw = gl_nodes(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    rr = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    lw = np.log(half[:, None] * gw[None, :]).ravel()
    good = rr > 0
    logs = np.full(rr.shape, LOG_ZERO)
    logs[good] = (log_f(rr[good]) + sp.cartan_density_log(desc, rr[good])
                  + lw[good])
    _, lm = signed_logsumexp(logs, np.ones(logs.size))
    return lm + math.log(sp.surface_constant(desc))


# ======================================================================
# Calibration
# ======================================================================

_CALIB_CACHE: dict[tuple, float] = {}


def analytic_calibration(desc: sp.SpaceDescriptor) -> float:
    """Closed form of the inversion constant: 2^(n-1) / (2 pi |S^(n-1)|)."""
    return 2.0 ** (desc.dim_n - 1) / (2.0 * math.pi * sp.surface_constant(desc))


def calibrate(desc: sp.SpaceDescriptor, t_ref: float = 1.0,
              cross_check_tol: float = 5e-7) -> sp.SpaceDescriptor:
    """Pin the inversion constant by unit heat-kernel mass at t_ref.

    The uncalibrated inversion of the heat multiplier is integrated
    radially; C0 is fixed by total mass 1 and cross-checked against the
    closed form.  A mismatch beyond cross_check_tol raises (it would mean
    the density convention and the transform disagree, which must never
    be silently absorbed into the constant).
    """
    desc.require_numeric()
    key = (desc.rank, desc.m_alpha, desc.m_2alpha, desc.alpha_norm, t_ref)
    if key in _CALIB_CACHE:
        return desc.with_calibration(_CALIB_CACHE[key])
    rho = desc.rho_norm
    lam_max = lam_max_gaussian(t_ref) + 2.0 * rho
    # 20 Gaussian e-folds of tail: generous for the heat profile, yet short
    # enough that the inverse's cancellation floor (noise ~ e^{-r} relative,
    # weighted here by the e^{(n-1)r} density) never outweighs real mass.
    r_cut = 2.0 * rho * t_ref + math.sqrt(4.0 * t_ref * 20.0) + 2.0

    def g(lam):
        return np.exp(-t_ref * (lam ** 2 + rho ** 2))

    # radial mass of the *uncalibrated* inverse
    width = min(0.4, math.pi / (2.0 * lam_max), math.sqrt(t_ref) / 2.0)
    n_panels = int(math.ceil(r_cut / width))
    edges = np.linspace(0.0, r_cut, n_panels + 1)
    gx, gw = gl_nodes(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    rr = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ww = (half[:, None] * gw[None, :]).ravel()
    vals, _noise = _inverse_raw(desc, g, rr, lam_max)
    dens = np.exp(sp.cartan_density_log(desc, rr))
    mass_raw = float(np.dot(ww, vals * dens)) * sp.surface_constant(desc)
    if mass_raw <= 0:
        raise CancellationError("calibrate: nonpositive raw heat mass")
    c0 = 1.0 / mass_raw
    ref = analytic_calibration(desc)
    if abs(c0 / ref - 1.0) > cross_check_tol:
        raise CancellationError(
            f"calibrate: numerical constant {c0!r} deviates from closed "
            f"form {ref!r} by {abs(c0 / ref - 1):.2e} (> {cross_check_tol})")
    _CALIB_CACHE[key] = c0
    return desc.with_calibration(c0)


# ======================================================================
# Forward and inverse transforms
# ======================================================================

def sft_forward(desc: sp.SpaceDescriptor, f, lams,
                r_support: float | None = None) -> SpectralFunction:
    """Forward transform of radial data against spherical functions.

    f is a RadialFunction (interpolated; its last grid point bounds the
    support) or a vectorised callable with r_support given explicitly.
    """
    desc.require_numeric()
    lams = np.asarray(lams, dtype=float)
    if isinstance(f, RadialFunction):
        r_sup = float(f.r[-1]) if r_support is None else r_support
        fn = f
    else:
        if r_support is None:
            raise ValueError("sft_forward: callable data needs r_support")
        r_sup, fn = float(r_support), f
    lam_top = float(np.max(lams)) if lams.size else 0.0
    width = min(0.25, math.pi / (2.0 * max(lam_top / desc.alpha_norm, 1.0)))
    n_panels = max(4, int(math.ceil(r_sup / width)))
    edges = np.linspace(0.0, r_sup, n_panels + 1)
    gx, gw = gl_nodes(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    rr = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ww = (half[:, None] * gw[None, :]).ravel()
    fv = fn(rr)
    dens = np.exp(sp.cartan_density_log(desc, rr))
    base = ww * fv * dens
    if desc.m_alpha == 2 and desc.alpha_norm == 1.0:
        sinh_r = np.sinh(rr)
        arg = np.outer(lams, rr)
        phi = np.where(rr > 0, rr / sinh_r, 1.0) * np.sinc(arg / math.pi)
        out = phi @ base
    else:
        rows = np.empty((rr.size, lams.size))
        for j, r in enumerate(rr):
            rows[j] = spherical_function(desc, lams, float(r))
        out = rows.T @ base
    return SpectralFunction(lams, out * sp.surface_constant(desc))


def _inverse_raw(desc: sp.SpaceDescriptor, g, rs, lam_max: float):
    """Uncalibrated inverse: int_0^lam_max g density phi_lam dlam per r.

    Returns (values, noise) where noise estimates the double-precision
    cancellation floor per radius.  Multiply by calib_C0 for the true
    inverse.  g must be vectorised.
    """
    rs = np.asarray(rs, dtype=float)
    a = desc.alpha_norm

    def gd(lam):
        return g(lam) * plancherel_density(desc, lam)

    if desc.m_alpha == 2 and a == 1.0:
        # f(r) = (1/sinh r) int_0^inf lam g(lam) sin(lam r) dlam
        from .numerics import osc_sin_quad
        vals = np.empty(rs.shape)
        noise = np.empty(rs.shape)
        for i, r in enumerate(rs):
            if r == 0.0:
                v, mass = _integral_nonosc(lambda l: l * g(l) * l, lam_max)
                vals[i], noise[i] = v, 5e-16 * mass
                continue
            s, mass = osc_sin_quad(lambda l: l * g(l), r, lam_max)
            sh = math.sinh(r)
            vals[i] = s / sh
            noise[i] = 5e-16 * mass / sh
        return vals, noise

    # generic route: exchange the integration order through the
    # spherical-function weight:  f(r) = int_{-rt}^{rt} K(v, rt) W(v) dv,
    # W(v) = int g density cos(lam v) dlam  (one shared cosine transform).
    node_v, node_logkw, slices = [], [], []
    for r in rs:
        rt = a * float(r)
        if rt == 0.0:
            slices.append(None)
            continue
        v, log_kw = _phi_nodes(desc.m_alpha, rt, 0.0)
        slices.append((len(node_v), len(node_v) + v.size))
        node_v.extend((v / a).tolist())     # W lives on the lam*v/a pairing
        node_logkw.extend(log_kw.tolist())
    vflat = np.asarray(node_v)
    lkw = np.asarray(node_logkw)
    gd_mass = _abs_mass(gd, lam_max)
    W = cos_transform_grid(gd, vflat, lam_max,
                           halfperiod_cap=lam_max / 64.0) if vflat.size \
        else np.empty(0)
    vals = np.empty(rs.shape)
    noise = np.empty(rs.shape)
    w_noise = 5e-16 * gd_mass
    for i, slc in enumerate(slices):
        if slc is None:
            v0, mass0 = _integral_nonosc(gd, lam_max)
            vals[i], noise[i] = v0, 5e-16 * mass0
            continue
        lo, hi = slc
        top = float(np.max(lkw[lo:hi]))
        kw = np.exp(lkw[lo:hi] - top)
        scale = math.exp(top) if top > -680 else 0.0
        vals[i] = float(np.dot(kw, W[lo:hi])) * scale
        noise[i] = w_noise * float(np.sum(kw)) * scale
    return vals, noise


def _integral_nonosc(g, lam_max: float, n_panels: int = 200):
    edges = np.linspace(0.0, lam_max, n_panels + 1)
    gx, gw = gl_nodes(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    xs = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    ws = (half[:, None] * gw[None, :]).ravel()
    fv = g(xs)
    return float(np.dot(ws, fv)), float(np.dot(ws, np.abs(fv)))


def _abs_mass(g, lam_max: float) -> float:
    xs = np.linspace(1e-9, lam_max, 4096)
    return float(np.trapezoid(np.abs(g(xs)), xs))


def sft_inverse(desc: sp.SpaceDescriptor, g, rs,
                lam_max: float | None = None,
                rel_floor: float = 1e-8,
                on_cancel: str = "raise") -> RadialFunction:
    """Calibrated inverse transform on a radius grid.

    g is a SpectralFunction (its grid bounds lam_max and feeds the exact
    grid Filon rule on H-type presets) or a vectorised callable with
    lam_max given.  Radii whose value sits below the double-precision
    cancellation floor (rel_floor relative) raise CancellationError naming
    the radius, unless on_cancel="ignore".
    """
    c0 = desc.require_calibrated()
    rs = np.asarray(rs, dtype=float)
    if isinstance(g, SpectralFunction):
        if desc.m_alpha == 2 and desc.alpha_norm == 1.0:
            return _inverse_grid_h3(desc, g, rs, c0, rel_floor, on_cancel)
        lam_max = g.lam_max
        fn = g
    else:
        if lam_max is None:
            raise ValueError("sft_inverse: callable g needs lam_max")
        fn = g
    vals, noise = _inverse_raw(desc, fn, rs, lam_max)
    bad = noise > rel_floor * np.maximum(np.abs(vals), 1e-310)
    if np.any(bad) and on_cancel == "raise":
        i = int(np.argmax(bad))
        raise CancellationError(
            f"sft_inverse: cancellation floor exceeded at r = {rs[i]:.6g} "
            f"(value ~ {vals[i]:.3e}, noise ~ {noise[i]:.3e}); this radius "
            "needs a shifted-contour kernel engine")
    return RadialFunction.from_floats(rs, c0 * vals)


def _inverse_grid_h3(desc, g: SpectralFunction, rs, c0, rel_floor, on_cancel):
    lam, val = g.lam, g.value
    integr = lam * val
    mass = float(np.trapezoid(np.abs(integr), lam))
    out = np.empty(rs.shape)
    for i, r in enumerate(rs):
        if r == 0.0:
            out[i] = float(np.trapezoid(integr * lam, lam))
            continue
        s = sine_transform(lam, integr, float(r))
        sh = math.sinh(float(r))
        noise = 5e-16 * mass / sh
        v = s / sh
        if noise > rel_floor * max(abs(v), 1e-310) and on_cancel == "raise":
            raise CancellationError(
                f"sft_inverse: cancellation floor exceeded at r = {r:.6g}")
        out[i] = v
    return RadialFunction.from_floats(rs, c0 * out)


def radial_convolve(desc: sp.SpaceDescriptor, f, k, rs,
                    lam_max: float, r_support: float,
                    rel_floor: float = 1e-8) -> RadialFunction:
    """(f * k)(r) by transform-multiply-invert: inverse of Hf . Hk.

    Both inputs are radial data (RadialFunction or callable with the shared
    r_support); the product transform is inverted on rs.  This is the
    moderate-radius route; the convergence module has the direct
    geodesic-polar route for radii beyond the cancellation floor.
    """
    lams = _forward_grid(desc, lam_max, r_support, float(np.max(rs)))
    gf = sft_forward(desc, f, lams, r_support=r_support)
    gk = sft_forward(desc, k, lams, r_support=r_support)
    prod = SpectralFunction(lams, gf.value * gk.value)
    return sft_inverse(desc, prod, rs, rel_floor=rel_floor)


def _forward_grid(desc, lam_max, r_support, r_out_max) -> np.ndarray:
    # spacing serving both the Filon rule at the largest output radius and
    # the intrinsic oscillation scale of the transforms
    spacing = math.pi / (4.0 * max(r_out_max, r_support, 1.0)) / 1.05
    n = int(math.ceil(lam_max / spacing)) + 1
    if n > 2_000_000:
        raise ResolutionError("radial_convolve: spectral grid too large")
    return np.linspace(0.0, lam_max, n)


# ======================================================================
# Plancherel norms
# ======================================================================

def l2_norm_radial(desc: sp.SpaceDescriptor, f, r_support: float) -> float:
    """sqrt of surface_const * int |f|^2 delta dr."""
    fn = f if callable(f) else (lambda r: f(r))

    def log_f2(rr):
        v = np.abs(fn(rr))
        with np.errstate(divide="ignore"):
            return 2.0 * np.log(np.maximum(v, 1e-320))

    lm = radial_integral_log(desc, log_f2, r_support, scale=0.5)
    return math.exp(0.5 * lm)


def l2_norm_spectral(desc: sp.SpaceDescriptor, g: SpectralFunction) -> float:
    """sqrt of C0 * int_0^inf |Hf|^2 density dlam (Plancherel partner)."""
    c0 = desc.require_calibrated()
    dens = plancherel_density(desc, g.lam)
    val = float(np.trapezoid(g.value ** 2 * dens, g.lam))
    return math.sqrt(c0 * val)
