"""Time-domain quadrature with rigorous truncation bounds.

Integrals over the real line are truncated to ``[-X, X]``. ``X`` comes from
an integration-by-parts decay bound ``|f(x + iy)| <= C / |x|**q`` that is
derived from the spectrum, so the dropped tail is bounded explicitly.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ToleranceNotMet
from .spectra import PiecewisePolySpectrum, poly_derivative

GL_NODES = 32
MAX_RADIUS = 1e6
_JUMP_TOL = 1e-10
SQRT_2PI = math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=8)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gl_rule(edges, n: int = GL_NODES):
    """Composite Gauss-Legendre nodes and weights on consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    weights = half * w
    return nodes.ravel(), weights.ravel()


def _apply_dy(coef, y):
    # coefficients of (d/ds - y) p
    return poly_derivative(coef) - y * coef


def _jumps(cur, h, b, y):
    left_vals = np.concatenate([[0.0], np.polynomial.polynomial.polyval(h, cur.T, tensor=False)])
    right_vals = np.concatenate([cur[:, 0], [0.0]])
    w = np.exp(-y * b)
    scale = max(float(np.max(np.abs(left_vals * w))), float(np.max(np.abs(right_vals * w))))
    return np.abs(right_vals - left_vals) * w, scale


def _l1(cur, h, b, y):
    # rigorous bound on int |exp(-y xi) p(xi)| over all pieces
    bound = np.sum(np.abs(cur) * h[:, None] ** np.arange(cur.shape[1]), axis=1)
    emax = np.exp(np.maximum(-y * b[:-1], -y * b[1:]))
    return float(np.sum(h * emax * bound))


def decay_profile(spectrum: PiecewisePolySpectrum, y: float = 0.0):
    """Return ``(q, A, B)`` with ``|f(x + i y)| <= (A + B/|x|) |x|**(-q)``.

    Write ``g = f^ exp(-y xi)``. Then ``q - 1`` is the lowest derivative order
    at which ``g`` jumps. Integrating by parts ``q + 1`` times bounds
    ``sqrt(2 pi) |f|`` by the jump sizes plus ``||g^(q+1)||_1``.
    """
    b = spectrum.breaks
    coef = np.asarray(spectrum.coef, dtype=complex)
    d1 = coef.shape[1]
    h = np.diff(b)
    cur = coef.copy()
    for k in range(d1 + 1):
        jumps, scale = _jumps(cur, h, b, y)
        # continuity residue is rounding-sized relative to the values themselves
        if scale > 0 and np.max(jumps) > _JUMP_TOL * scale:
            nxt = _apply_dy(cur, y)
            jumps_next, _ = _jumps(nxt, h, b, y)
            rest = float(np.sum(jumps_next)) + _l1(_apply_dy(nxt, y), h, b, y)
            return k + 1, float(np.sum(jumps)) / SQRT_2PI, rest / SQRT_2PI
        cur = _apply_dy(cur, y)
    return d1 + 1, 0.0, 0.0


def decay_constant(spectrum: PiecewisePolySpectrum, y: float = 0.0):
    """``(q, C)`` with ``|f(x + i y)| <= C |x|**(-q)`` for ``|x| >= 1``."""
    q, A, B = decay_profile(spectrum, y)
    return q, A + B


def tail_bound(q: int, A: float, B: float, X: float, factor: float = 1.0) -> float:
    """Bound on ``int_{|x|>X} |f|^2`` given the decay profile."""
    k = 2 * q - 1
    return 2.0 * (factor * (A + B / X)) ** 2 * X ** (-k) / k


def tail_radius(q: int, A: float, B: float, tol: float, *, factor=None,
                minimum: float = 1.0) -> float:
    """Smallest ``X >= minimum`` whose tail bound is below ``tol``.

    ``factor(X)`` optionally bounds a multiplier on ``|x| > X``.

    Raises:
        ToleranceNotMet: if the radius would exceed ``MAX_RADIUS``.
    """
    fac = factor or (lambda X: 1.0)

    def tail(X):
        return tail_bound(q, A, B, X, fac(X))

    if A == 0 and B == 0 or tail(minimum) <= tol:
        return minimum
    if tail(MAX_RADIUS) > tol:
        raise ToleranceNotMet(
            f"decay order {q} needs a truncation radius beyond {MAX_RADIUS:g}",
            error=tail(MAX_RADIUS))
    lo, hi = math.log(minimum), math.log(MAX_RADIUS)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail(math.exp(mid)) > tol:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def panel_edges(X: float, width: float, focus=(), refine: int = 0) -> np.ndarray:
    """Panel edges on ``[-X, X]`` of width ``<= width``, graded near ``focus``.

    ``focus`` holds ``(x0, r)`` pairs. Edges are added at ``x0 +- r 2**k`` until
    they reach the base width, which resolves features of size ``r`` at ``x0``.
    ``refine`` halves every panel that many times.
    """
    n = max(int(math.ceil(2 * X / width)), 1)
    pts = [np.linspace(-X, X, n + 1)]
    for x0, r in focus:
        if not (-X < x0 < X) or r <= 0:
            continue
        k = np.arange(0, max(int(math.ceil(math.log2(max(width / r, 1.0)))), 0) + 1)
        off = r * 2.0 ** k
        pts.append(np.array([x0]))
        pts.append(x0 + off)
        pts.append(x0 - off)
    e = np.unique(np.concatenate(pts))
    e = e[(e >= -X) & (e <= X)]
    e = e[np.concatenate([[True], np.diff(e) > 1e-12])]
    for _ in range(refine):
        mid = 0.5 * (e[:-1] + e[1:])
        e = np.sort(np.concatenate([e, mid]))
    return e
