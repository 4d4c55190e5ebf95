"""The zero-flipping operator in time, frequency and on horizontal strips.

Flipping at ``a`` multiplies ``f`` by the unimodular (on the real line) factor

    u_a(x) = (a / conj(a)) * (x - conj(a)) / (x - a) * exp(i beta_a x).

On the spectral side with ``u = xi - beta_a``, this becomes

    S_a(xi) = (a / conj(a)) * [f^(u) - 2i Im(a) G_a(xi)],
    G_a(xi) = -i exp(-i a u) int_u^L exp(i a t) f^(t) dt,

where ``G_a`` is the convolution of ``f^(. - beta_a)`` with the reflected
kernel ``gamma_a``. ``G_a`` is assembled here as an exact
:class:`ExpPolySpectrum` piece by piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DomainError, PoleError, ToleranceNotMet
from .pwcore import FlipPoint, PWFunction, eval_time, l2_norm
from .quadrature import decay_profile, gl_rule, panel_edges, tail_bound, tail_radius
from .spectra import (
    ExpPolySpectrum,
    linear_combination,
    multiply_exp,
    norm,
    poly_derivative,
    translate,
    write_samples_csv,
)

SQRT_2PI = kernels.SQRT_2PI
ZERO_RTOL = 1e-10
TAYLOR_EXTRA = 24
STRIP_GRID = 32
STRIP_RTOL = 1e-8
TIME_TOL = 1e-9
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _point(a) -> FlipPoint:
    return a if isinstance(a, FlipPoint) else FlipPoint.from_complex(a)


def multiplier(a, x):
    """``u_a(x)``; unimodular for real ``x`` and meromorphic with a pole at ``a``."""
    a = _point(a)
    av = a.value
    x = np.asarray(x, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a.phase * (x - av.conjugate()) / (x - av) * np.exp(1j * a.beta * x)
    return out[()] if out.ndim == 0 else out


def is_genuine_zero(f: PWFunction, a) -> bool:
    a = _point(a)
    return abs(eval_time(f, a.value)) < ZERO_RTOL * l2_norm(f) * max(1.0, abs(a.value))


def flip_time(f: PWFunction, a, z):
    """``(F_a f)(z) = u_a(z) f(z)``.

    At ``z = a`` the value is the removable limit when ``f(a) = 0``.

    Raises:
        PoleError: if ``z = a`` and ``f(a) != 0``.
    """
    a = _point(a)
    av = a.value
    z = np.asarray(z, dtype=complex)
    at_pole = z == av
    with np.errstate(invalid="ignore"):
        vals = multiplier(a, z) * f.eval_fast(z)
    if np.any(at_pole):
        if not is_genuine_zero(f, a):
            raise PoleError(f"F_a f has a pole at a = {av} because f(a) != 0")
        limit = a.phase * (av - av.conjugate()) * np.exp(1j * a.beta * av) * eval_time(
            f.derivative(), av)
        vals = np.where(at_pole, limit, vals)
    return vals[()] if vals.ndim == 0 else vals


@dataclass(frozen=True)
class GammaKernel:
    """``gamma_a(x) = -sqrt(2 pi) i exp(i a x)`` for ``x > 0``, zero for ``x < 0``."""

    point: FlipPoint

    @property
    def l1_norm(self) -> float:
        return SQRT_2PI / self.point.im

    def transform(self, w):
        """Fourier transform ``1 / (a - w)``."""
        return 1.0 / (self.point.value - np.asarray(w, dtype=complex))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        weight = np.where(x > 0, 1.0, np.where(x == 0, 0.5, 0.0))
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.exp(1j * self.point.value * np.where(x >= 0, x, 0.0))
        return -SQRT_2PI * 1j * weight * vals


def gamma_kernel(a) -> GammaKernel:
    return GammaKernel(_point(a))


def _tail_sums(coef, h, mu_int):
    """``J_j = int_{b_j}^{b_n} exp(i a (t - b_j)) f^(t) dt`` by backward recursion."""
    n = coef.shape[0]
    piece, _ = kernels.anchored_integral(mu_int, coef, h)
    J = np.zeros(n + 1, dtype=complex)
    decay = np.exp(mu_int * h)
    for j in range(n - 1, -1, -1):
        J[j] = piece[j] + decay[j] * J[j + 1]
    return J


def _local_conv(p, h, a):
    """Split ``g(s) = int_s^h exp(ia (t - s)) p(t) dt`` as ``poly(s) + k exp(-ia (s - h))``.

    Returns ``(poly_coefficients, k)``. Short pieces (``|a| h < 1``) use a
    Taylor expansion in ``s`` to avoid the ``1/a**k`` cancellation of the
    integration-by-parts primitive.
    """
    ia = 1j * a
    deg = p.size - 1
    if abs(a) * h >= 1.0:
        # Q with d/dt [exp(iat) Q] = exp(iat) p
        Q = np.zeros(deg + 1, dtype=complex)
        d = p.astype(complex)
        sign = 1.0
        for k in range(deg + 1):
            Q += sign * d / ia ** (k + 1)
            d = poly_derivative(d)
            sign = -sign
        Qh = np.polynomial.polynomial.polyval(h, Q)
        return -Q, Qh
    nterms = deg + TAYLOR_EXTRA
    gamma = np.zeros(nterms + 1, dtype=complex)
    gamma[0], _ = kernels.anchored_integral(ia, p, h)
    pk = np.zeros(nterms + 1, dtype=complex)
    pk[:deg + 1] = p
    for k in range(nterms):
        gamma[k + 1] = -(pk[k] + ia * gamma[k]) / (k + 1)
    return gamma, 0j


def gamma_convolution(f: PWFunction, a) -> ExpPolySpectrum:
    """``G_a = R gamma_a * tau_{beta_a} f^`` as an exact exp-poly spectrum."""
    a = _point(a)
    av = a.value
    sp = f.spectrum
    coef = np.asarray(sp.coef, dtype=complex)
    h = sp.widths
    n = coef.shape[0]
    J = _tail_sums(coef, h, 1j * av)
    polys, consts = [], []
    for j in range(n):
        g, k = _local_conv(coef[j], h[j], av)
        polys.append(g)
        consts.append(k + J[j + 1])
    deg = max(p.size for p in polys) - 1
    pcoef = np.zeros((n, 2, deg + 1), dtype=complex)
    mu = np.zeros((n, 2), dtype=complex)
    mu[:, 1] = -1j * av
    for j in range(n):
        pcoef[j, 0, :polys[j].size] = -1j * polys[j]
        pcoef[j, 1, 0] = -1j * consts[j]
    breaks = sp.breaks + a.beta
    left_amp = np.array([-1j * J[0]]) if J[0] != 0 else np.zeros(0, dtype=complex)
    left_mu = np.array([-1j * av]) if J[0] != 0 else np.zeros(0, dtype=complex)
    return ExpPolySpectrum(breaks, mu, pcoef, left_amp, left_mu)


def translated_spectrum(f: PWFunction, a):
    """``tau_{beta_a} f^``."""
    return translate(f.spectrum, _point(a).beta)


def flip_spectrum(f: PWFunction, a) -> ExpPolySpectrum:
    """Exact spectrum of ``F_a f``.

    Its support is ``[-L + beta_a, L + beta_a]`` plus a left exponential tail
    whose amplitude is proportional to ``f(a)``. The tail vanishes exactly
    when ``a`` is a genuine zero.
    """
    a = _point(a)
    ph = a.phase
    return linear_combination((ph, translated_spectrum(f, a)),
                              (ph * (-2j * a.im), gamma_convolution(f, a)))


def left_tail_amplitude(f: PWFunction, a) -> complex:
    """Left-tail amplitude of the flipped spectrum at its cutoff ``beta_a - L``."""
    a = _point(a)
    sp = f.spectrum
    lo = sp.breaks[0]
    return complex(-a.phase * 2 * a.im * SQRT_2PI * eval_time(f, a.value)
                   * np.exp(-1j * a.value * lo))


# ---------------------------------------------------------------------------
# strip norms


def _slice_rule(f: PWFunction, a: FlipPoint, y: float, tol: float, refine: int = 0):
    q, A, B = decay_profile(f.spectrum, y)
    if q < 1:
        raise ToleranceNotMet("slice integrand does not decay")
    r0 = abs(a.re) + 2.0 * a.im + 1.0
    # |u_a(x + iy)| <= (1 + 2 Im a / (|x| - |Re a|)) exp(-beta y) beyond |Re a|
    def mult_bound(X):
        return (1.0 + 2.0 * a.im / (X - abs(a.re))) * math.exp(-a.beta * y)

    X = tail_radius(q, A, B, tol, factor=mult_bound, minimum=r0)
    width = min(2.0, 20.0 / (2.0 * f.bandlimit + 1.0))
    gap = max(a.im - y, 1e-300)
    nodes, weights = gl_rule(panel_edges(X, width, [(a.re, gap / 2.0)], refine))
    err = tail_bound(q, A, B, X, mult_bound(X))
    return nodes, weights, err


def slice_norm_sq(f: PWFunction, a, y: float, *, tol: float | None = None,
                  refine: int = 0) -> float:
    """``int |F_a f(x + iy)|^2 dx`` by truncated Gauss-Legendre quadrature."""
    a = _point(a)
    if y >= a.im:
        raise DomainError("slice must stay below the pole (y < Im a)")
    nrm2 = l2_norm(f) ** 2
    tol = TIME_TOL * nrm2 if tol is None else tol
    x, w, _ = _slice_rule(f, a, y, tol, refine)
    z = x + 1j * y
    vals = multiplier(a, z) * f.eval_fast(z)
    return float(np.sum(w * np.abs(vals) ** 2))


def slice_norm_sq_spectral(f: PWFunction, a, y: float, spectrum=None) -> float:
    """``int |S_a(xi)|^2 exp(-2 y xi) dxi`` in closed form (Plancherel on the slice)."""
    a = _point(a)
    S = flip_spectrum(f, a) if spectrum is None else spectrum
    return norm(multiply_exp(S, -y)) ** 2


def strip_norm(f: PWFunction, a, lam: float, *, method: str = "quadrature",
               grid: int = STRIP_GRID, refine: int = 0) -> float:
    """``sup_{|y| <= lam} ||F_a f(. + iy)||_2`` over a ``grid + 1`` point grid.

    Golden-section refinement runs when the best grid value is interior.
    ``method="spectral"`` evaluates every slice in closed form instead.

    Raises:
        DomainError: unless ``0 < lam < Im a``.
    """
    a = _point(a)
    if not (0 < lam < a.im):
        raise DomainError(f"strip half-width must satisfy 0 < lam < Im a = {a.im}")
    if method == "spectral":
        S = flip_spectrum(f, a)

        def sq(y):
            return slice_norm_sq_spectral(f, a, y, S)
    elif method == "quadrature":
        def sq(y):
            return slice_norm_sq(f, a, y, refine=refine)
    else:
        raise ValueError(f"unknown method {method!r}")
    ys = np.linspace(-lam, lam, grid + 1)
    vals = np.array([sq(y) for y in ys])
    k = int(np.argmax(vals))
    best = float(vals[k])
    if 0 < k < grid:
        lo, hi = ys[k - 1], ys[k + 1]
        c = hi - _GOLDEN * (hi - lo)
        d = lo + _GOLDEN * (hi - lo)
        fc, fd = sq(c), sq(d)
        while hi - lo > STRIP_RTOL * lam:
            if fc > fd:
                hi, d, fd = d, c, fc
                c = hi - _GOLDEN * (hi - lo)
                fc = sq(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + _GOLDEN * (hi - lo)
                fd = sq(d)
            best = max(best, fc, fd)
    return math.sqrt(best)


def time_rule(f: PWFunction, points, *, tol: float | None = None, refine: int = 0):
    """Real-line quadrature nodes adapted to ``|f|^2`` and the given flip points.

    Raises:
        ToleranceNotMet: when the decay of ``f`` is too slow for a finite radius.
    """
    pts = [_point(p) for p in points]
    nrm2 = l2_norm(f) ** 2
    tol = TIME_TOL * nrm2 if tol is None else tol
    q, A, B = decay_profile(f.spectrum)
    if q < 2:
        raise ToleranceNotMet(f"decay order {q} is too slow for truncated time quadrature")
    r0 = max([abs(p.re) + 2 * p.im for p in pts] + [0.0]) + 1.0
    X = tail_radius(q, A, B, tol, minimum=r0)
    betas = [p.beta for p in pts] + [0.0]
    omega = 2.0 * f.bandlimit + (max(betas) - min(betas)) + 1.0
    width = min(2.0, 20.0 / omega)
    nodes, weights = gl_rule(panel_edges(X, width, [(p.re, p.im) for p in pts], refine))
    return nodes, weights, tail_bound(q, A, B, X)


def time_norm(f: PWFunction, a=None, *, refine: int = 0) -> float:
    """``||F_a f||_2`` (or ``||f||_2``) by truncated real-line quadrature."""
    x, w, _ = time_rule(f, [] if a is None else [a], refine=refine)
    vals = f.eval_fast(x)
    if a is not None:
        vals = vals * multiplier(a, x)
    return math.sqrt(float(np.sum(w * np.abs(vals) ** 2)))


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlippedFunction:
    """``F_a f`` with a lazily computed (and cached) exact spectrum."""

    base: PWFunction
    point: FlipPoint

    def __post_init__(self):
        object.__setattr__(self, "point", _point(self.point))

    @cached_property
    def spectrum(self) -> ExpPolySpectrum:
        return flip_spectrum(self.base, self.point)

    def __call__(self, z):
        return flip_time(self.base, self.point, z)

    def norm(self) -> float:
        return norm(self.spectrum)

    def strip_norm(self, lam: float, **kw) -> float:
        return strip_norm(self.base, self.point, lam, **kw)

    def spectrum_csv(self, xi, out=None) -> str:
        return write_samples_csv(self.spectrum, xi, out, with_piece=True)


def flip(f: PWFunction, a) -> FlippedFunction:
    return FlippedFunction(f, _point(a))
