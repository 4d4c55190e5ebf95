"""Exact algebra on compact piecewise-polynomial and exponential-polynomial spectra.

Conventions shared by both spectrum types:

* Polynomials are stored per piece in the *local* variable ``s = xi - breaks[j]``
  with ascending coefficients (constant term first).
* An :class:`ExpPolySpectrum` piece is a sum of terms
  ``c * exp(mu (s - anchor)) * P(s)`` where ``anchor`` is the right end of the
  piece when ``Re mu > 0`` and the left end otherwise.  Every term therefore
  has modulus at most ``|P|`` on its piece, which keeps all intermediate
  values bounded when exponents are large.
* Tails are anchored at the outermost breakpoints: the left tail is
  ``sum_k A_k exp(mu_k (xi - breaks[0]))`` for ``xi < breaks[0]`` (requires
  ``Re mu_k > 0``), the right tail mirrors it with ``Re mu_k < 0``.
* Inner products are linear in the first argument:
  ``<F, G> = int F(xi) conj(G(xi)) dxi``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConstraintViolation, DivergenceError, DomainError

MERGE_TOL = 1e-12
OMEGA2_GRID = 64
OMEGA2_RTOL = 1e-8
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# polynomial helpers (ascending coefficients, last axis)


def taylor_shift(coef, shift):
    """Coefficients of ``P(s + shift)``; ``shift`` broadcasts over leading axes."""
    c = np.array(coef, dtype=complex, copy=True)
    d = np.asarray(shift)
    deg = c.shape[-1] - 1
    for i in range(deg):
        for j in range(deg - 1, i - 1, -1):
            c[..., j] += d * c[..., j + 1]
    return c


def poly_derivative(coef):
    coef = np.asarray(coef, dtype=complex)
    if coef.shape[-1] == 1:
        return np.zeros_like(coef)
    d = coef[..., 1:] * np.arange(1, coef.shape[-1])
    return np.concatenate([d, np.zeros(coef.shape[:-1] + (1,), dtype=complex)], axis=-1)


def poly_reflect(coef, h):
    """Coefficients of ``P(h - s)``."""
    shifted = taylor_shift(coef, h)
    signs = (-1.0) ** np.arange(shifted.shape[-1])
    return shifted * signs


def poly_eval(coef, s):
    coef = np.asarray(coef)
    val = np.asarray(coef[..., -1], dtype=complex)
    for k in range(coef.shape[-1] - 2, -1, -1):
        val = val * s + coef[..., k]
    return val


def pad_degree(coef, deg):
    coef = np.asarray(coef, dtype=complex)
    extra = deg + 1 - coef.shape[-1]
    if extra <= 0:
        return coef
    pad = [(0, 0)] * (coef.ndim - 1) + [(0, extra)]
    return np.pad(coef, pad)


def _poly_products(a, b_conj):
    """Polynomial products over the last axis for every (i, j) term pair.

    ``a``: (m, K1, D1+1), ``b_conj``: (m, K2, D2+1) -> (m, K1, K2, D1+D2+1).
    """
    m, k1, d1 = a.shape
    _, k2, d2 = b_conj.shape
    out = np.zeros((m, k1, k2, d1 + d2 - 1), dtype=complex)
    for i in range(d1):
        out[..., i:i + d2] += a[:, :, None, i, None] * b_conj[:, None, :, :]
    return out


def merge_breaks(*arrays) -> np.ndarray:
    """Sorted union of breakpoints, merging points closer than ``MERGE_TOL``."""
    pts = np.sort(np.concatenate([np.atleast_1d(np.asarray(a, dtype=float)) for a in arrays]))
    if pts.size == 0:
        return pts
    keep = np.concatenate([[True], np.diff(pts) > MERGE_TOL])
    return pts[keep]


def _anchor(mu, h):
    return np.where(np.real(mu) > 0, h, 0.0)


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# spectrum types


@dataclass(frozen=True, eq=False)
class PiecewisePolySpectrum:
    """Compactly supported piecewise polynomial on ``breaks[0] .. breaks[-1]``."""

    breaks: np.ndarray
    coef: np.ndarray
    bandlimit: float | None = None

    def __post_init__(self):
        breaks = _frozen(self.breaks, float)
        coef = np.array(self.coef, dtype=complex)
        if coef.ndim == 1:
            coef = coef[None, :]
        if breaks.ndim != 1 or breaks.size < 1:
            raise ConstraintViolation("breaks must be a non-empty 1-d array")
        if coef.shape[0] != breaks.size - 1:
            raise ConstraintViolation(
                f"{breaks.size} breaks need {breaks.size - 1} pieces, got {coef.shape[0]}")
        if not np.all(np.isfinite(breaks)) or not np.all(np.isfinite(coef)):
            raise ConstraintViolation("spectrum must be finite")
        if np.any(np.diff(breaks) <= 0):
            raise ConstraintViolation("breaks must be strictly increasing")
        coef.flags.writeable = False
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "coef", coef)
        support = float(max(abs(breaks[0]), abs(breaks[-1])))
        if self.bandlimit is None:
            object.__setattr__(self, "bandlimit", support)
        elif support > self.bandlimit * (1 + MERGE_TOL) + MERGE_TOL:
            raise ConstraintViolation(
                f"support [{breaks[0]}, {breaks[-1]}] exceeds bandlimit {self.bandlimit}")

    @property
    def n_pieces(self) -> int:
        return self.coef.shape[0]

    @property
    def degree(self) -> int:
        return self.coef.shape[1] - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    def __call__(self, xi):
        return kernels.pp_eval(self.breaks, self.coef, xi)

    def to_exppoly(self) -> ExpPolySpectrum:
        n = self.n_pieces
        return ExpPolySpectrum(self.breaks, np.zeros((n, 1), dtype=complex),
                               self.coef[:, None, :])

    def scaled(self, factor) -> PiecewisePolySpectrum:
        return PiecewisePolySpectrum(self.breaks, self.coef * factor,
                                     bandlimit=self.bandlimit)

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__

    def __add__(self, other):
        return linear_combination((1.0, self), (1.0, other))

    def __sub__(self, other):
        return linear_combination((1.0, self), (-1.0, other))


@dataclass(frozen=True, eq=False)
class ExpPolySpectrum:
    """Piecewise exponential-polynomial spectrum with optional exponential tails.

    Attributes:
        breaks: ``(n+1,)`` breakpoints; ``breaks[0]`` is the left-tail cutoff.
        mu: ``(n, K)`` complex exponents per piece.
        coef: ``(n, K, D+1)`` polynomial coefficients per term.
        left_amp, left_mu: amplitudes and exponents of the left tail.
        right_amp, right_mu: same for the right tail.
    """

    breaks: np.ndarray
    mu: np.ndarray
    coef: np.ndarray
    left_amp: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    left_mu: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    right_amp: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    right_mu: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        breaks = _frozen(self.breaks, float)
        n = breaks.size - 1
        mu = np.array(self.mu, dtype=complex).reshape(n, -1) if n else np.zeros((0, 1), complex)
        coef = np.array(self.coef, dtype=complex)
        if n == 0:
            coef = np.zeros((0, 1, 1), dtype=complex)
        if coef.ndim != 3 or coef.shape[:2] != mu.shape:
            raise ConstraintViolation("coef must have shape (n_pieces, n_terms, degree+1)")
        if n and np.any(np.diff(breaks) <= 0):
            raise ConstraintViolation("breaks must be strictly increasing")
        la = np.atleast_1d(np.array(self.left_amp, dtype=complex))
        lm = np.atleast_1d(np.array(self.left_mu, dtype=complex))
        ra = np.atleast_1d(np.array(self.right_amp, dtype=complex))
        rm = np.atleast_1d(np.array(self.right_mu, dtype=complex))
        if la.shape != lm.shape or ra.shape != rm.shape:
            raise ConstraintViolation("tail amplitudes and exponents must pair up")
        if np.any(lm.real <= 0):
            raise ConstraintViolation("left tail exponents need a positive real part")
        if np.any(rm.real >= 0):
            raise ConstraintViolation("right tail exponents need a negative real part")
        for name, arr in (("mu", mu), ("coef", coef), ("left_amp", la), ("left_mu", lm),
                          ("right_amp", ra), ("right_mu", rm)):
            if not np.all(np.isfinite(arr)):
                raise ConstraintViolation(f"{name} must be finite")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "breaks", breaks)

    @property
    def n_pieces(self) -> int:
        return self.breaks.size - 1

    @property
    def n_terms(self) -> int:
        return self.mu.shape[1]

    @property
    def degree(self) -> int:
        return self.coef.shape[2] - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def left_tail(self):
        """``(cutoff, amplitudes, exponents)`` of the left tail."""
        return float(self.breaks[0]), self.left_amp, self.left_mu

    @property
    def right_tail(self):
        return float(self.breaks[-1]), self.right_amp, self.right_mu

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        b = self.breaks
        n = self.n_pieces
        with np.errstate(all="ignore"):
            if n:
                inside = (xi >= b[0]) & (xi <= b[-1])
                x_in = xi[inside]
                idx = np.clip(np.searchsorted(b, x_in, side="right") - 1, 0, n - 1)
                s = x_in - b[idx]
                mu = self.mu[idx]
                anchor = _anchor(mu, self.widths[idx][:, None])
                polys = poly_eval(self.coef[idx], s[:, None])
                out[inside] = np.sum(polys * np.exp(mu * (s[:, None] - anchor)), axis=1)
            if self.left_amp.size:
                left = xi < b[0]
                d = xi[left][:, None] - b[0]
                out[left] = np.sum(self.left_amp * np.exp(self.left_mu * d), axis=1)
            if self.right_amp.size:
                right = xi > b[-1]
                d = xi[right][:, None] - b[-1]
                out[right] = np.sum(self.right_amp * np.exp(self.right_mu * d), axis=1)
        return out

    def __add__(self, other):
        return linear_combination((1.0, self), (1.0, other))

    def __sub__(self, other):
        return linear_combination((1.0, self), (-1.0, other))

    def __mul__(self, factor):
        return scale(self, factor)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)


def as_exppoly(F) -> ExpPolySpectrum:
    if isinstance(F, ExpPolySpectrum):
        return F
    if isinstance(F, PiecewisePolySpectrum):
        return F.to_exppoly()
    raise TypeError(f"not a spectrum: {type(F).__name__}")


def zero_spectrum() -> ExpPolySpectrum:
    return ExpPolySpectrum(np.zeros(1), np.zeros((0, 1)), np.zeros((0, 1, 1)))


# ---------------------------------------------------------------------------
# refinement and linear combinations


def _refine(F: ExpPolySpectrum, grid: np.ndarray):
    """Re-express ``F`` on ``grid`` (which must contain ``F.breaks``).

    Returns ``(mu, coef, left_amp, left_mu, right_amp, right_mu)`` with pieces
    on ``grid`` and tails re-anchored at ``grid[0]`` / ``grid[-1]``.
    """
    b = F.breaks
    n = F.n_pieces
    m = grid.size - 1
    h = np.diff(grid)
    mid = 0.5 * (grid[:-1] + grid[1:])
    deg = F.degree
    kmax = max(F.n_terms if n else 1, F.left_mu.size, F.right_mu.size, 1)
    mu = np.zeros((m, kmax), dtype=complex)
    coef = np.zeros((m, kmax, deg + 1), dtype=complex)

    if n:
        inner = np.nonzero((mid >= b[0]) & (mid <= b[-1]))[0]
        if inner.size:
            idx = np.clip(np.searchsorted(b, mid[inner], side="right") - 1, 0, n - 1)
            delta = grid[inner] - b[idx]
            old_mu = F.mu[idx]
            old_anchor = _anchor(old_mu, F.widths[idx][:, None])
            new_anchor = _anchor(old_mu, h[inner][:, None])
            factor = np.exp(old_mu * (new_anchor + delta[:, None] - old_anchor))
            shifted = taylor_shift(F.coef[idx], delta[:, None])
            k = F.n_terms
            mu[inner, :k] = old_mu
            coef[inner, :k, :] = shifted * factor[..., None]
    lo = b[0]
    hi = b[-1]
    if F.left_amp.size:
        rows = np.nonzero(mid < lo)[0]
        t = F.left_mu.size
        mu[rows, :t] = F.left_mu
        coef[rows, :t, 0] = F.left_amp * np.exp(F.left_mu * (grid[rows + 1][:, None] - lo))
    if F.right_amp.size:
        rows = np.nonzero(mid > hi)[0]
        t = F.right_mu.size
        mu[rows, :t] = F.right_mu
        coef[rows, :t, 0] = F.right_amp * np.exp(F.right_mu * (grid[rows][:, None] - hi))
    left_amp = F.left_amp * np.exp(F.left_mu * (grid[0] - lo))
    right_amp = F.right_amp * np.exp(F.right_mu * (grid[-1] - hi))
    return mu, coef, left_amp, F.left_mu, right_amp, F.right_mu


def _group_terms(mu_row, coef_row):
    groups: dict[complex, np.ndarray] = {}
    for k in range(mu_row.size):
        c = coef_row[k]
        if not np.any(c):
            continue
        key = complex(mu_row[k])
        if key in groups:
            groups[key] = groups[key] + c
        else:
            groups[key] = c.copy()
    return groups


def _group_tail(amp, mu):
    groups: dict[complex, complex] = {}
    for a, u in zip(amp, mu):
        if a == 0:
            continue
        groups[complex(u)] = groups.get(complex(u), 0j) + a
    keys = list(groups)
    return (np.array([groups[k] for k in keys], dtype=complex),
            np.array(keys, dtype=complex))


def linear_combination(*pairs) -> ExpPolySpectrum:
    """``sum_k w_k F_k`` on the common refinement; terms with equal exponents merge."""
    spectra = [as_exppoly(F) for _, F in pairs]
    weights = [complex(w) for w, _ in pairs]
    grid = merge_breaks(*[F.breaks for F in spectra])
    deg = max(F.degree for F in spectra)
    refined = [_refine(F, grid) for F in spectra]
    mu_all = np.concatenate([r[0] for r in refined], axis=1)
    coef_all = np.concatenate([w * pad_degree(r[1], deg) for w, r in zip(weights, refined)], axis=1)
    m = grid.size - 1
    rows = [_group_terms(mu_all[j], coef_all[j]) for j in range(m)]
    kmax = max([len(r) for r in rows] + [1])
    mu = np.zeros((m, kmax), dtype=complex)
    coef = np.zeros((m, kmax, deg + 1), dtype=complex)
    for j, groups in enumerate(rows):
        for k, (u, c) in enumerate(groups.items()):
            mu[j, k] = u
            coef[j, k] = c
    left = _group_tail(np.concatenate([w * r[2] for w, r in zip(weights, refined)]),
                       np.concatenate([r[3] for r in refined]))
    right = _group_tail(np.concatenate([w * r[4] for w, r in zip(weights, refined)]),
                        np.concatenate([r[5] for r in refined]))
    return ExpPolySpectrum(grid, mu, coef, left[0], left[1], right[0], right[1])


# ---------------------------------------------------------------------------
# elementary operations


def translate(F, alpha: float):
    """``(tau_alpha F)(xi) = F(xi - alpha)``."""
    alpha = float(alpha)
    if isinstance(F, PiecewisePolySpectrum):
        b = F.breaks + alpha
        return PiecewisePolySpectrum(b, F.coef, bandlimit=max(F.bandlimit, float(np.max(np.abs(b)))))
    F = as_exppoly(F)
    return ExpPolySpectrum(F.breaks + alpha, F.mu, F.coef, F.left_amp, F.left_mu,
                           F.right_amp, F.right_mu)


def reflect(F):
    """``(R F)(xi) = F(-xi)``."""
    if isinstance(F, PiecewisePolySpectrum):
        h = F.widths[::-1]
        coef = poly_reflect(F.coef[::-1], h)
        return PiecewisePolySpectrum(-F.breaks[::-1], coef, bandlimit=F.bandlimit)
    F = as_exppoly(F)
    h = F.widths[::-1][:, None]
    old_mu = F.mu[::-1]
    old_anchor = _anchor(old_mu, h)
    new_mu = -old_mu
    new_anchor = _anchor(new_mu, h)
    factor = np.exp(new_mu * (new_anchor - h + old_anchor))
    coef = poly_reflect(F.coef[::-1], h) * factor[..., None]
    return ExpPolySpectrum(-F.breaks[::-1], new_mu, coef, F.right_amp, -F.right_mu,
                           F.left_amp, -F.left_mu)


def scale(F, factor):
    factor = complex(factor)
    if isinstance(F, PiecewisePolySpectrum):
        return F.scaled(factor)
    F = as_exppoly(F)
    return ExpPolySpectrum(F.breaks, F.mu, F.coef * factor, F.left_amp * factor, F.left_mu,
                           F.right_amp * factor, F.right_mu)


def conjugate(F):
    """Pointwise complex conjugate."""
    if isinstance(F, PiecewisePolySpectrum):
        return PiecewisePolySpectrum(F.breaks, np.conj(F.coef), bandlimit=F.bandlimit)
    F = as_exppoly(F)
    return ExpPolySpectrum(F.breaks, np.conj(F.mu), np.conj(F.coef), np.conj(F.left_amp),
                           np.conj(F.left_mu), np.conj(F.right_amp), np.conj(F.right_mu))


def multiply_exp(F, nu) -> ExpPolySpectrum:
    """``F(xi) * exp(nu xi)``.

    Raises:
        DivergenceError: if a tail stops decaying after the multiplication.
    """
    F = as_exppoly(F)
    nu = complex(nu)
    h = F.widths[:, None]
    new_mu = F.mu + nu
    old_anchor = _anchor(F.mu, h)
    new_anchor = _anchor(new_mu, h)
    factor = np.exp(F.mu * (new_anchor - old_anchor) + nu * (F.breaks[:-1, None] + new_anchor))
    lmu = F.left_mu + nu
    rmu = F.right_mu + nu
    if np.any(lmu.real <= 0) or np.any(rmu.real >= 0):
        raise DivergenceError(f"exponential weight exp({nu} xi) overwhelms the tail decay")
    return ExpPolySpectrum(F.breaks, new_mu, F.coef * factor[..., None],
                           F.left_amp * np.exp(nu * F.breaks[0]), lmu,
                           F.right_amp * np.exp(nu * F.breaks[-1]), rmu)


def split(F, x0: float):
    """Split ``F`` into the parts supported on ``xi <= x0`` and ``xi >= x0``."""
    F = as_exppoly(F)
    grid = merge_breaks(F.breaks, [x0])
    k = int(np.argmin(np.abs(grid - x0)))
    mu, coef, la, lm, ra, rm = _refine(F, grid)
    empty = np.zeros(0, dtype=complex)
    left = ExpPolySpectrum(grid[:k + 1], mu[:k], coef[:k], la, lm)
    right = ExpPolySpectrum(grid[k:], mu[k:], coef[k:], empty, empty, ra, rm)
    return left, right


# ---------------------------------------------------------------------------
# integrals


def _tail_gram(amp_f, mu_f, amp_g, mu_g, side):
    if amp_f.size == 0 or amp_g.size == 0:
        return 0j
    s = mu_f[:, None] + np.conj(mu_g)[None, :]
    if side == "left":
        if np.any(s.real <= 0):
            raise DivergenceError("left tails are not jointly square-integrable")
        return complex(np.sum(amp_f[:, None] * np.conj(amp_g)[None, :] / s))
    if np.any(s.real >= 0):
        raise DivergenceError("right tails are not jointly square-integrable")
    return complex(-np.sum(amp_f[:, None] * np.conj(amp_g)[None, :] / s))


def _piece_gram(h, mu_f, coef_f, mu_g, coef_g):
    """``sum_j int_piece F conj(G)`` for refined arrays on a common grid."""
    if h.size == 0:
        return 0j
    big_m = mu_f[:, :, None] + np.conj(mu_g)[:, None, :]
    anchor_f = _anchor(mu_f, h[:, None])
    anchor_g = _anchor(mu_g, h[:, None])
    prods = _poly_products(coef_f, np.conj(coef_g))
    hh = np.broadcast_to(h[:, None, None], big_m.shape)
    value, star = kernels.anchored_integral(big_m, prods, hh)
    with np.errstate(over="ignore", invalid="ignore"):
        const = np.exp(mu_f[:, :, None] * (star - anchor_f[:, :, None])
                       + np.conj(mu_g)[:, None, :] * (star - anchor_g[:, None, :]))
    contrib = np.where(value == 0, 0.0, const * value)
    return complex(np.sum(contrib))


def inner_product(F, G) -> complex:
    """``int F(xi) conj(G(xi)) dxi`` in closed form.

    Raises:
        DivergenceError: if the tails are not jointly integrable.
    """
    F = as_exppoly(F)
    G = as_exppoly(G)
    grid = merge_breaks(F.breaks, G.breaks)
    rf = _refine(F, grid)
    rg = _refine(G, grid)
    total = _piece_gram(np.diff(grid), rf[0], rf[1], rg[0], rg[1])
    total += _tail_gram(rf[2], rf[3], rg[2], rg[3], "left")
    total += _tail_gram(rf[4], rf[5], rg[4], rg[5], "right")
    return complex(total)


def integral(F) -> complex:
    """``int F(xi) dxi`` over the whole line."""
    F = as_exppoly(F)
    total = 0j
    if F.n_pieces:
        value, _ = kernels.anchored_integral(F.mu, F.coef, F.widths[:, None])
        total += complex(np.sum(value))
    if F.left_amp.size:
        total += complex(np.sum(F.left_amp / F.left_mu))
    if F.right_amp.size:
        total -= complex(np.sum(F.right_amp / F.right_mu))
    return total


def inverse_transform(F, z) -> np.ndarray:
    """``(1/sqrt(2 pi)) int F(xi) exp(i z xi) dxi`` for each ``z``.

    Complex ``z`` is allowed as long as the tails still decay.
    """
    z = np.asarray(z, dtype=complex)
    out = np.array([integral(multiply_exp(F, 1j * zz)) for zz in z.ravel()])
    return out.reshape(z.shape) / kernels.SQRT_2PI


def norm(F) -> float:
    if isinstance(F, PiecewisePolySpectrum):
        return _pp_norm(F)
    return math.sqrt(max(inner_product(F, F).real, 0.0))


def _pp_norm(F: PiecewisePolySpectrum) -> float:
    if F.n_pieces == 0:
        return 0.0
    sq = np.real(_poly_products(F.coef[:, None, :], np.conj(F.coef[:, None, :])))[:, 0, 0, :]
    h = F.widths
    k = np.arange(sq.shape[1])
    total = np.sum(sq * h[:, None] ** (k + 1) / (k + 1))
    return math.sqrt(max(float(total), 0.0))


def exp_moment(coef, p: float, q: float, w: complex) -> complex:
    """``int_p^q exp(i w t) poly(t) dt`` for global ascending coefficients.

    The integral is taken in closed form on the local variable ``t - p``; see
    :func:`zeroflip.kernels.chi_moments` for how small ``|w| (q - p)`` is
    handled without cancellation.
    """
    if q < p:
        raise DomainError("exp_moment needs q >= p")
    if q == p:
        return 0j
    local = taylor_shift(np.atleast_1d(np.asarray(coef, dtype=complex)), p)
    mu = 1j * complex(w)
    value, anchor = kernels.anchored_integral(mu, local, q - p)
    return complex(np.exp(mu * (p + anchor)) * value)


def weighted_norm(F, lam: float) -> float:
    """``(int |F(xi)|^2 exp(2 lam |xi|) dxi)^{1/2}``.

    Raises:
        DomainError: for negative ``lam``.
        DivergenceError: when ``lam`` reaches the decay rate of a tail.
    """
    if lam < 0:
        raise DomainError("weight exponent must be nonnegative")
    if lam == 0:
        return norm(F)
    left, right = split(F, 0.0)
    sq = norm(multiply_exp(left, -lam)) ** 2 + norm(multiply_exp(right, lam)) ** 2
    return math.sqrt(sq)


def autocorrelation(F: PiecewisePolySpectrum, shift: float) -> complex:
    """``int F(t) conj(F(t + shift)) dt``, i.e. ``<tau_shift F, F>``.

    Gauss-Legendre on the merged breakpoints, exact for piecewise polynomials.
    """
    if F.n_pieces == 0:
        return 0j
    lo = max(F.breaks[0], F.breaks[0] - shift)
    hi = min(F.breaks[-1], F.breaks[-1] - shift)
    if hi <= lo:
        return 0j
    grid = merge_breaks(F.breaks, F.breaks - shift)
    grid = grid[(grid >= lo - MERGE_TOL) & (grid <= hi + MERGE_TOL)]
    grid = merge_breaks(grid, [lo, hi])
    nodes, weights = np.polynomial.legendre.leggauss(F.degree + 1)
    a, b = grid[:-1], grid[1:]
    half = 0.5 * (b - a)
    x = a[:, None] + half[:, None] * (nodes + 1.0)
    vals = F(x) * np.conj(F(x + shift))
    return complex(np.sum(vals * weights * half[:, None]))


def omega2(F, h: float) -> float:
    """L2 modulus of continuity ``sup_{|eta| <= h} ||tau_eta F - F||_2``.

    A uniform grid of ``OMEGA2_GRID`` shifts in ``[0, h]`` locates the best
    cell, then golden-section search refines the maximum inside it.  Negative
    shifts are covered by symmetry.
    """
    if h < 0:
        raise DomainError("omega2 needs h >= 0")
    if h == 0:
        return 0.0
    if isinstance(F, PiecewisePolySpectrum):
        def sq(etas):
            return kernels.shift_diff_sqnorms(F.breaks, F.coef, etas)
    else:
        Fe = as_exppoly(F)

        def sq(etas):
            return np.array([norm(translate(Fe, e) - Fe) ** 2 for e in np.atleast_1d(etas)])

    etas = np.linspace(0.0, h, OMEGA2_GRID + 1)
    # the squared norm has kinks where breakpoints of F and its shift collide
    b = as_exppoly(F).breaks
    kinks = np.abs(b[:, None] - b[None, :]).ravel()
    etas = merge_breaks(etas, kinks[(kinks > 0) & (kinks < h)])
    vals = sq(etas)
    k = int(np.argmax(vals))
    best = float(vals[k])
    if 0 < k < etas.size - 1:
        a, b = etas[k - 1], etas[k + 1]
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = float(sq(c)[0]), float(sq(d)[0])
        while b - a > OMEGA2_RTOL * h:
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = float(sq(c)[0])
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = float(sq(d)[0])
            best = max(best, fc, fd)
    return math.sqrt(max(best, 0.0))


# ---------------------------------------------------------------------------
# serialisation and sampling


def _cpair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _cval(p):
    return complex(p[0], p[1])


def spectrum_to_dict(F) -> dict:
    if isinstance(F, PiecewisePolySpectrum):
        return {
            "kind": "piecewise_poly",
            "bandlimit": float(F.bandlimit),
            "breaks": [float(x) for x in F.breaks],
            "pieces": [[_cpair(c) for c in row] for row in F.coef],
        }
    F = as_exppoly(F)
    return {
        "kind": "exp_poly",
        "breaks": [float(x) for x in F.breaks],
        "pieces": [[{"mu": _cpair(F.mu[j, k]), "coef": [_cpair(c) for c in F.coef[j, k]]}
                    for k in range(F.n_terms)] for j in range(F.n_pieces)],
        "left_tail": [{"amp": _cpair(a), "mu": _cpair(u)} for a, u in zip(F.left_amp, F.left_mu)],
        "right_tail": [{"amp": _cpair(a), "mu": _cpair(u)}
                       for a, u in zip(F.right_amp, F.right_mu)],
    }


def spectrum_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "piecewise_poly":
        coef = np.array([[_cval(c) for c in row] for row in d["pieces"]], dtype=complex)
        n = len(d["breaks"]) - 1
        coef = coef.reshape(n, -1) if n else np.zeros((0, 1), complex)
        return PiecewisePolySpectrum(np.array(d["breaks"]), coef, bandlimit=d.get("bandlimit"))
    if kind == "exp_poly":
        pieces = d["pieces"]
        n = len(pieces)
        k = max([len(p) for p in pieces] + [1])
        deg = max([len(t["coef"]) for p in pieces for t in p] + [1]) - 1
        mu = np.zeros((n, k), dtype=complex)
        coef = np.zeros((n, k, deg + 1), dtype=complex)
        for j, p in enumerate(pieces):
            for i, t in enumerate(p):
                mu[j, i] = _cval(t["mu"])
                coef[j, i, :len(t["coef"])] = [_cval(c) for c in t["coef"]]
        lt, rt = d.get("left_tail", []), d.get("right_tail", [])
        return ExpPolySpectrum(np.array(d["breaks"], dtype=float), mu, coef,
                               [_cval(t["amp"]) for t in lt], [_cval(t["mu"]) for t in lt],
                               [_cval(t["amp"]) for t in rt], [_cval(t["mu"]) for t in rt])
    raise ValueError(f"unknown spectrum kind {kind!r}")


def piece_index(F, xi) -> np.ndarray:
    """Piece containing each point; ``-1`` for the left tail, ``n`` for the right."""
    b = F.breaks
    n = b.size - 1
    xi = np.asarray(xi, dtype=float)
    idx = np.clip(np.searchsorted(b, xi, side="right") - 1, 0, max(n - 1, 0))
    idx = np.where(xi < b[0], -1, idx)
    return np.where(xi > b[-1], n, idx)


def write_samples_csv(F, xi, out=None, with_piece=False) -> str:
    """CSV with columns ``xi, re, im`` (plus ``piece_index``); returns the text."""
    xi = np.asarray(xi, dtype=float)
    vals = F(xi)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["xi", "re", "im"] + (["piece_index"] if with_piece else [])
    w.writerow(header)
    pidx = piece_index(F, xi) if with_piece else None
    for i, x in enumerate(xi):
        row = [repr(float(x)), repr(float(vals[i].real)), repr(float(vals[i].imag))]
        if with_piece:
            row.append(int(pidx[i]))
        w.writerow(row)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
