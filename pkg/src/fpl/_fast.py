"""Hot numeric inner loops: numba-accelerated with pure-numpy fallbacks.

The compiled path is taken when numba imports cleanly and the environment
flag FPL_DISABLE_NUMBA is unset/0; FPL_THREADS=<k> caps the thread count.
Both implementations share signatures and results to ~1e-15 (the benchmark
script in benchmarks/ compares them).

The convolution cores evaluate hyperbolic-polar integrals against a
tabulated radial kernel.  The table stores a *reduced* log profile on a
grid uniform in asinh(d):

    reduced(d) = log Q(d) + rho * D(d) - log(1 + d) + ce * log(t^2 + d^2)

with D = sqrt(t^2 + d^2) (mode 0) or D = d (mode 1).  The reduced profile
is nearly constant, so 4-point Lagrange interpolation of it is accurate to
~1e-12 even on coarse grids; the steep analytic factors are restored
exactly inside the loop.  Distances come from the hyperbolic law of
cosines cosh d = cosh r cosh s - sinh r sinh s cos(theta), rearranged so
the doubles never overflow:

    4 e^{-(r+s)} cosh d = (1-c) + (e^{-2r}+e^{-2s})(1+c) + e^{-2r}e^{-2s}(1-c)

which is nonnegative term by term.
"""

from __future__ import annotations

import math
import os

import numpy as np

_flag = os.environ.get("FPL_DISABLE_NUMBA", "").strip()
NUMBA_DISABLED = _flag not in ("", "0")
HAS_NUMBA = False
if not NUMBA_DISABLED:
    try:
        import numba
        from numba import njit, prange

        HAS_NUMBA = True
        _threads = os.environ.get("FPL_THREADS", "").strip()
        if _threads:
            numba.set_num_threads(max(1, int(_threads)))
    except ImportError:  # pragma: no cover - exercised via env flag instead
        pass


_LOG2 = math.log(2.0)
_LOG4 = math.log(4.0)


# ----------------------------------------------------------------------
# numpy path (vectorised over the angular/grid axes)
# ----------------------------------------------------------------------

def _dist_vec(logX):
    """acosh(exp(logX)) elementwise, stable for huge and near-zero d."""
    big = logX > 18.0
    L = logX + _LOG2
    X = np.exp(np.minimum(logX, 18.5))
    X = np.maximum(X, 1.0)
    small = np.log(X + np.sqrt(np.maximum(X * X - 1.0, 0.0)))
    return np.where(big, L - np.exp(-2.0 * L), small)


def _log_kernel_vec(d, x0, dx_inv, reduced, rho, ce, t2, mode):
    n = reduced.shape[0]
    u = (np.arcsinh(d) - x0) * dx_inv
    j = np.clip(np.floor(u).astype(np.int64) - 1, 0, n - 4)
    tau = u - (j + 1)
    w0 = -tau * (tau - 1.0) * (tau - 2.0) / 6.0
    w1 = (tau + 1.0) * (tau - 1.0) * (tau - 2.0) * 0.5
    w2 = -(tau + 1.0) * tau * (tau - 2.0) * 0.5
    w3 = (tau + 1.0) * tau * (tau - 1.0) / 6.0
    red = (w0 * reduced[j] + w1 * reduced[j + 1]
           + w2 * reduced[j + 2] + w3 * reduced[j + 3])
    sub = rho * np.sqrt(t2 + d * d) if mode == 0 else rho * d
    return red - sub + np.log1p(d) - ce * np.log(t2 + d * d)


def _pair_distances(r, s_vals, cos_th):
    """Distance matrix d[(s_j, theta_k)] from the pole at radius r."""
    A = math.exp(-2.0 * r)
    B = np.exp(-2.0 * s_vals)[:, None]
    c = cos_th[None, :]
    inner = (1.0 - c) + (A + B) * (1.0 + c) + A * B * (1.0 - c)
    logX = r + s_vals[:, None] - _LOG4 + np.log(np.maximum(inner, 1e-320))
    return _dist_vec(logX)


def _conv_core_py(rs, s_vals, log_pref_s, cos_th, log_w_th,
                  x0, dx_inv, reduced, rho, ce, t2, mode):
    out = np.empty(rs.shape[0])
    lpref = log_pref_s[:, None] + log_w_th[None, :]
    for i in range(rs.shape[0]):
        d = _pair_distances(rs[i], s_vals, cos_th)
        vals = lpref + _log_kernel_vec(d, x0, dx_inv, reduced,
                                       rho, ce, t2, mode)
        m = float(np.max(vals))
        if not np.isfinite(m):
            out[i] = -np.inf
        else:
            out[i] = m + math.log(float(np.sum(np.exp(vals - m))))
    return out


def _dirac_diff_core_py(rs, s, cos_th, log_w_th,
                        x0, dx_inv, reduced, rho, ce, t2, mode):
    out = np.empty(rs.shape[0])
    s_arr = np.array([s])
    for i in range(rs.shape[0]):
        r = rs[i]
        base = float(_log_kernel_vec(np.array([r]), x0, dx_inv, reduced,
                                     rho, ce, t2, mode)[0])
        d = _pair_distances(r, s_arr, cos_th)[0]
        lq = _log_kernel_vec(d, x0, dx_inv, reduced, rho, ce, t2, mode)
        hi = np.maximum(lq, base)
        delta = np.abs(lq - base)
        with np.errstate(divide="ignore"):
            ld = hi + np.log(-np.expm1(-np.maximum(delta, 1e-300)))
        vals = np.where(delta < 1e-17, -np.inf, ld + log_w_th)
        m = float(np.max(vals))
        if not np.isfinite(m):
            out[i] = -np.inf
        else:
            out[i] = m + math.log(float(np.sum(np.exp(vals - m))))
    return out


# ----------------------------------------------------------------------
# numba path (scalar kernels, parallel over the output grid)
# ----------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _dist_scalar(r, s, c, A, B):
        inner = (1.0 - c) + (A + B) * (1.0 + c) + A * B * (1.0 - c)
        if inner <= 0.0:
            return 0.0
        logX = r + s - _LOG4 + math.log(inner)
        if logX > 18.0:
            L = logX + _LOG2
            return L - math.exp(-2.0 * L)
        X = math.exp(logX)
        if X <= 1.0:
            return 0.0
        return math.log(X + math.sqrt(X * X - 1.0))

    @njit(cache=True)
    def _log_kernel_scalar(d, x0, dx_inv, reduced, rho, ce, t2, mode):
        n = reduced.shape[0]
        u = (math.asinh(d) - x0) * dx_inv
        j = int(math.floor(u)) - 1
        if j < 0:
            j = 0
        if j > n - 4:
            j = n - 4
        tau = u - (j + 1)
        w0 = -tau * (tau - 1.0) * (tau - 2.0) / 6.0
        w1 = (tau + 1.0) * (tau - 1.0) * (tau - 2.0) * 0.5
        w2 = -(tau + 1.0) * tau * (tau - 2.0) * 0.5
        w3 = (tau + 1.0) * tau * (tau - 1.0) / 6.0
        red = (w0 * reduced[j] + w1 * reduced[j + 1]
               + w2 * reduced[j + 2] + w3 * reduced[j + 3])
        if mode == 0:
            sub = rho * math.sqrt(t2 + d * d)
        else:
            sub = rho * d
        return red - sub + math.log1p(d) - ce * math.log(t2 + d * d)

    @njit(cache=True, parallel=True)
    def _conv_core_nb(rs, s_vals, log_pref_s, cos_th, log_w_th,
                      x0, dx_inv, reduced, rho, ce, t2, mode):
        n_r = rs.shape[0]
        n_s = s_vals.shape[0]
        n_t = cos_th.shape[0]
        out = np.empty(n_r)
        for i in prange(n_r):
            r = rs[i]
            A = math.exp(-2.0 * r)
            best = -np.inf
            buf = np.empty(n_s * n_t)
            idx = 0
            for j in range(n_s):
                s = s_vals[j]
                B = math.exp(-2.0 * s)
                lps = log_pref_s[j]
                for k in range(n_t):
                    d = _dist_scalar(r, s, cos_th[k], A, B)
                    val = lps + log_w_th[k] + _log_kernel_scalar(
                        d, x0, dx_inv, reduced, rho, ce, t2, mode)
                    buf[idx] = val
                    idx += 1
                    if val > best:
                        best = val
            if not np.isfinite(best):
                out[i] = -np.inf
            else:
                acc = 0.0
                for q in range(idx):
                    acc += math.exp(buf[q] - best)
                out[i] = best + math.log(acc)
        return out

    @njit(cache=True, parallel=True)
    def _dirac_diff_core_nb(rs, s, cos_th, log_w_th,
                            x0, dx_inv, reduced, rho, ce, t2, mode):
        n_r = rs.shape[0]
        n_t = cos_th.shape[0]
        out = np.empty(n_r)
        B = math.exp(-2.0 * s)
        for i in prange(n_r):
            r = rs[i]
            A = math.exp(-2.0 * r)
            base = _log_kernel_scalar(r, x0, dx_inv, reduced,
                                      rho, ce, t2, mode)
            best = -np.inf
            buf = np.empty(n_t)
            for k in range(n_t):
                d = _dist_scalar(r, s, cos_th[k], A, B)
                lq = _log_kernel_scalar(d, x0, dx_inv, reduced,
                                        rho, ce, t2, mode)
                hi = lq if lq > base else base
                delta = abs(lq - base)
                if delta < 1e-17:
                    val = -np.inf
                else:
                    val = hi + math.log(-math.expm1(-delta)) + log_w_th[k]
                buf[k] = val
                if val > best:
                    best = val
            if not np.isfinite(best):
                out[i] = -np.inf
            else:
                acc = 0.0
                for k in range(n_t):
                    if np.isfinite(buf[k]):
                        acc += math.exp(buf[k] - best)
                out[i] = best + math.log(acc)
        return out

    conv_core = _conv_core_nb
    dirac_diff_core = _dirac_diff_core_nb
else:
    conv_core = _conv_core_py
    dirac_diff_core = _dirac_diff_core_py


def backend_name() -> str:
    return "numba" if HAS_NUMBA else "numpy"
