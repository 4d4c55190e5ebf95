"""Hot numeric kernels: a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the ``ZEROFLIP_NUMBA``
environment variable (``0`` forces numpy) and can be switched at runtime with
:func:`set_backend`.  Both paths compute the same quantities to rounding.

The central primitive is the moment family

    chi_n(z, alpha) = int_0^1 exp(z (t - alpha)) t^n dt,   alpha in {0, 1},

with ``alpha = 0`` used when ``Re z <= 0`` and ``alpha = 1`` when ``Re z > 0``
so that the exponential never exceeds one on the unit interval.  ``chi_0`` is
computed from ``expm1``; higher orders use the upward recurrence while
``n <= |z|`` (where it is stable) and Miller's downward recurrence above.
"""

from __future__ import annotations

import cmath
import contextlib
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
MILLER_EXTRA = 50
SQRT_2PI = math.sqrt(2.0 * math.pi)

_env = os.environ.get("ZEROFLIP_NUMBA", "1").strip().lower()
BACKEND = "numba" if HAVE_NUMBA and _env not in ("0", "false", "no", "off") else "numpy"


def set_backend(name: str) -> None:
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    BACKEND = name


@contextlib.contextmanager
def use_backend(name: str):
    previous = BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _njit(fn):
    if numba is None:  # pragma: no cover
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# complex expm1


def cexpm1(z):
    """``exp(z) - 1`` without cancellation for small ``|z|`` (vectorised)."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


@_njit
def _cexpm1_scalar(z):
    x = z.real
    y = z.imag
    s = math.sin(0.5 * y)
    re = math.expm1(x) * math.cos(y) - 2.0 * s * s
    im = math.exp(x) * math.sin(y)
    return complex(re, im)


# ---------------------------------------------------------------------------
# moments chi_n(z, alpha)


@_njit
def _chi_fill(z, alpha, deg, out):
    az = abs(z)
    if az == 0.0:
        for n in range(deg + 1):
            out[n] = 1.0 / (n + 1)
        return
    e_top = cmath.exp(z * (1.0 - alpha))
    if alpha == 0.0:
        out[0] = _cexpm1_scalar(z) / z
    else:
        out[0] = -_cexpm1_scalar(-z) / z
    n_up = min(deg, int(az))
    for n in range(1, n_up + 1):
        out[n] = (e_top - n * out[n - 1]) / z
    if deg > n_up:
        top = deg + MILLER_EXTRA
        c = e_top / (top + 1)
        for n in range(top, deg, -1):
            c = (e_top - z * c) / n
        out[deg] = c
        for n in range(deg, n_up + 1, -1):
            out[n - 1] = (e_top - z * out[n]) / n


@_njit
def _chi_array_nb(z, alpha, deg):
    out = np.empty((z.shape[0], deg + 1), dtype=np.complex128)
    for i in range(z.shape[0]):
        _chi_fill(z[i], alpha[i], deg, out[i])
    return out


def _chi_array_np(z, alpha, deg):
    n_pts = z.shape[0]
    out = np.empty((n_pts, deg + 1), dtype=complex)
    az = np.abs(z)
    zero = az == 0.0
    zs = np.where(zero, 1.0, z)
    e_top = np.exp(z * (1.0 - alpha))
    with np.errstate(all="ignore"):
        out[:, 0] = np.where(alpha == 0.0, cexpm1(zs) / zs, -cexpm1(-zs) / zs)
        for n in range(1, deg + 1):
            out[:, n] = (e_top - n * out[:, n - 1]) / zs
        n_up = np.minimum(np.floor(az), deg).astype(int)
        sub = np.nonzero(n_up < deg)[0]
        if sub.size:
            zz, ee = zs[sub], e_top[sub]
            top = deg + MILLER_EXTRA
            c = ee / (top + 1)
            low = np.empty((sub.size, deg + 1), dtype=complex)
            for n in range(top, 0, -1):
                c = (ee - zz * c) / n
                if n - 1 <= deg:
                    low[:, n - 1] = c
            cols = np.arange(deg + 1)
            take_low = (cols[None, :] > n_up[sub, None]) & (cols[None, :] > 0)
            block = out[sub]
            block[take_low] = low[take_low]
            out[sub] = block
    if zero.any():
        out[zero] = 1.0 / np.arange(1, deg + 2)
    return out


def chi_moments(z, alpha, deg: int) -> np.ndarray:
    """Moments ``chi_0..chi_deg`` for every entry of ``z``.

    Returns an array of shape ``z.shape + (deg + 1,)``.
    """
    z = np.asarray(z, dtype=complex)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), z.shape)
    flat_z = np.ascontiguousarray(z.ravel())
    flat_a = np.ascontiguousarray(alpha.ravel())
    if BACKEND == "numba":
        out = _chi_array_nb(flat_z, flat_a, int(deg))
    else:
        out = _chi_array_np(flat_z, flat_a, int(deg))
    return out.reshape(z.shape + (deg + 1,))


def anchored_integral(mu, coef, h):
    """``int_0^h exp(mu (s - anchor)) P(s) ds`` with the stable anchor.

    ``mu`` and ``h`` broadcast over leading axes of ``coef``; the anchor is
    ``h`` where ``Re mu > 0`` and ``0`` elsewhere.  Returns ``(value,
    anchor)``.
    """
    coef = np.asarray(coef, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    h = np.asarray(h, dtype=float)
    shape = np.broadcast_shapes(mu.shape, h.shape, coef.shape[:-1])
    mu = np.broadcast_to(mu, shape)
    h = np.broadcast_to(h, shape)
    coef = np.broadcast_to(coef, shape + coef.shape[-1:])
    deg = coef.shape[-1] - 1
    alpha = (mu.real > 0).astype(float)
    moments = chi_moments(mu * h, alpha, deg)
    powers = h[..., None] ** np.arange(1, deg + 2)
    value = np.sum(coef * moments * powers, axis=-1)
    return value, alpha * h


# ---------------------------------------------------------------------------
# inverse transform of a compact piecewise polynomial spectrum


@_njit
def _invert_pp_nb(breaks, coef, z):
    n_pieces = coef.shape[0]
    deg = coef.shape[1] - 1
    out = np.zeros(z.shape[0], dtype=np.complex128)
    mom = np.empty(deg + 1, dtype=np.complex128)
    for i in range(z.shape[0]):
        zi = z[i]
        acc = 0j
        for j in range(n_pieces):
            h = breaks[j + 1] - breaks[j]
            m = 1j * zi * h
            alpha = 1.0 if m.real > 0 else 0.0
            _chi_fill(m, alpha, deg, mom)
            s = 0j
            hp = h
            for n in range(deg + 1):
                s += coef[j, n] * mom[n] * hp
                hp *= h
            acc += cmath.exp(1j * zi * (breaks[j] + alpha * h)) * s
        out[i] = acc / SQRT_2PI
    return out


def _invert_pp_np(breaks, coef, z):
    h = np.diff(breaks)
    m = 1j * z[:, None] * h[None, :]
    alpha = (m.real > 0).astype(float)
    deg = coef.shape[1] - 1
    mom = chi_moments(m, alpha, deg)
    powers = h[:, None] ** np.arange(1, deg + 2)[None, :]
    inner = np.sum(coef[None, :, :] * powers[None, :, :] * mom, axis=-1)
    phase = np.exp(1j * z[:, None] * (breaks[:-1][None, :] + alpha * h[None, :]))
    return np.sum(phase * inner, axis=1) / SQRT_2PI


def invert_piecewise_poly(breaks, coef, z) -> np.ndarray:
    """``(2 pi)^{-1/2} int F(xi) exp(i z xi) dxi`` for compact piecewise ``F``."""
    z = np.asarray(z, dtype=complex)
    flat = np.ascontiguousarray(z.ravel())
    breaks = np.ascontiguousarray(breaks, dtype=float)
    coef = np.ascontiguousarray(coef, dtype=complex)
    if coef.shape[0] == 0:
        return np.zeros(z.shape, dtype=complex)
    if BACKEND == "numba":
        out = _invert_pp_nb(breaks, coef, flat)
    else:
        with np.errstate(all="ignore"):
            out = _invert_pp_np(breaks, coef, flat)
    return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# piecewise evaluation and shifted-difference norms


def pp_eval(breaks, coef, x):
    """Evaluate a compact piecewise polynomial (zero outside its support)."""
    x = np.asarray(x, dtype=float)
    n = coef.shape[0]
    if n == 0:
        return np.zeros(x.shape, dtype=complex)
    idx = np.clip(np.searchsorted(breaks, x, side="right") - 1, 0, n - 1)
    s = x - breaks[idx]
    c = coef[idx]
    val = c[..., -1].astype(complex)
    for k in range(coef.shape[1] - 2, -1, -1):
        val = val * s + c[..., k]
    inside = (x >= breaks[0]) & (x <= breaks[-1])
    return np.where(inside, val, 0.0)


@_njit
def _pp_eval_scalar(breaks, coef, x):
    n = coef.shape[0]
    if x < breaks[0] or x > breaks[n]:
        return 0j
    lo = 0
    hi = n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if breaks[mid] <= x:
            lo = mid
        else:
            hi = mid - 1
    s = x - breaks[lo]
    deg = coef.shape[1] - 1
    val = coef[lo, deg]
    for k in range(deg - 1, -1, -1):
        val = val * s + coef[lo, k]
    return val


@_njit
def _shift_diff_nb(breaks, coef, etas, nodes, weights):
    n = breaks.shape[0]
    out = np.empty(etas.shape[0])
    grid = np.empty(2 * n)
    for e in range(etas.shape[0]):
        eta = etas[e]
        for j in range(n):
            grid[j] = breaks[j]
            grid[n + j] = breaks[j] + eta
        g = np.sort(grid)
        total = 0.0
        for j in range(2 * n - 1):
            lo = g[j]
            hi = g[j + 1]
            if hi - lo <= 0.0:
                continue
            half = 0.5 * (hi - lo)
            for k in range(nodes.shape[0]):
                x = lo + half * (nodes[k] + 1.0)
                d = _pp_eval_scalar(breaks, coef, x - eta) - _pp_eval_scalar(breaks, coef, x)
                total += weights[k] * half * (d.real * d.real + d.imag * d.imag)
        out[e] = total
    return out


def _shift_diff_np(breaks, coef, etas, nodes, weights):
    n = breaks.shape[0]
    grid = np.sort(np.concatenate([np.broadcast_to(breaks, (etas.size, n)),
                                   breaks[None, :] + etas[:, None]], axis=1), axis=1)
    lo, hi = grid[:, :-1], grid[:, 1:]
    half = 0.5 * (hi - lo)
    x = lo[..., None] + half[..., None] * (nodes + 1.0)
    d = pp_eval(breaks, coef, x - etas[:, None, None]) - pp_eval(breaks, coef, x)
    return np.sum(np.abs(d) ** 2 * weights * half[..., None], axis=(1, 2))


def shift_diff_sqnorms(breaks, coef, etas) -> np.ndarray:
    """``||F(. - eta) - F||_2^2`` for each ``eta``, exact for piecewise polynomials.

    Integrates on the merged breakpoints of ``F`` and its translate with a
    Gauss-Legendre rule that is exact for the squared degree.
    """
    etas = np.ascontiguousarray(np.atleast_1d(etas), dtype=float)
    breaks = np.ascontiguousarray(breaks, dtype=float)
    coef = np.ascontiguousarray(coef, dtype=complex)
    if coef.shape[0] == 0:
        return np.zeros(etas.shape)
    nodes, weights = np.polynomial.legendre.leggauss(coef.shape[1])
    if BACKEND == "numba":
        return _shift_diff_nb(breaks, coef, etas, nodes, weights)
    return _shift_diff_np(breaks, coef, etas, nodes, weights)
