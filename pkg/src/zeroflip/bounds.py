"""Explicit constants of the stability estimates and their verdicts.

Every estimate is packaged as a :class:`BoundReport` holding the measured
left-hand side, the right-hand side and ``margin = rhs - lhs``. Constants
involving ``exp(-t) - 1`` use ``expm1`` forms so they stay accurate when
``t`` is tiny.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .flip import _point, gamma_convolution, strip_norm
from .pwcore import FlipPoint, PWFunction, l2_norm
from .spectra import linear_combination, norm, omega2
from .stability import pair_distance, self_distance

SQRT_2PI = math.sqrt(2.0 * math.pi)
BOUNDARY_RTOL = 1e-12
CSV_COLUMNS = ("name", "regime", "lhs", "rhs", "margin", "re_a", "im_a", "re_b", "im_b",
               "L", "lambda")


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    regime: str = ""
    a: FlipPoint | None = None
    b: FlipPoint | None = None
    L: float = float("nan")
    lam: float = float("nan")

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def holds(self, atol: float = 0.0) -> bool:
        return self.margin >= -atol

    def csv_row(self) -> list:
        nan = float("nan")
        a, b = self.a, self.b
        return [self.name, self.regime, self.lhs, self.rhs, self.margin,
                nan if a is None else a.re, nan if a is None else a.im,
                nan if b is None else b.re, nan if b is None else b.im, self.L, self.lam]

    def to_dict(self) -> dict:
        row = dict(zip(CSV_COLUMNS, self.csv_row()))
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}


def bound_reports_to_csv(reports, out=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.csv_row()])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


# ---------------------------------------------------------------------------
# region


@dataclass(frozen=True)
class Region:
    label: str
    beta: float
    center: complex
    radius: float


def region_classify(a, L: float) -> Region:
    """``unstable`` iff ``beta_a > 2L``.

    The unstable set is the open disc of centre ``i/(2L)`` and radius
    ``1/(2L)``, minus the origin. Points within a relative band of
    ``BOUNDARY_RTOL`` of ``beta_a = 2L`` are labelled ``boundary``.
    """
    a = _point(a)
    if L <= 0:
        raise DomainError("bandlimit must be positive")
    beta = a.beta
    if abs(beta - 2 * L) <= BOUNDARY_RTOL * 2 * L:
        label = "boundary"
    elif beta > 2 * L:
        label = "unstable"
    else:
        label = "stable"
    return Region(label, beta, complex(0.0, 1.0 / (2 * L)), 1.0 / (2 * L))


def in_disc(a, L: float) -> bool:
    """Direct disc test ``Re^2 + (Im - 1/(2L))^2 < 1/(4L^2)``."""
    a = _point(a)
    r = 1.0 / (2 * L)
    return a.re ** 2 + (a.im - r) ** 2 < r * r


def _regime(a: FlipPoint, L: float) -> str:
    # boundary beta = 2L belongs to the stable regime
    return "unstable" if region_classify(a, L).label == "unstable" else "stable"


# ---------------------------------------------------------------------------
# constants


def _g(t: float) -> float:
    """``(exp(-t) - 1 + t) / t^2``, accurate for small ``t``."""
    if abs(t) < 1e-3:
        return 0.5 - t / 6.0 + t * t / 24.0 - t ** 3 / 120.0
    return (math.expm1(-t) + t) / (t * t)


def c_a(a, L: float) -> float:
    """Stable-regime constant ``C(a)``, with ``0 < C(a) <= 4 sqrt(L Im a)``."""
    a = _point(a)
    y, beta = a.im, a.beta
    if beta > 2 * L * (1 + BOUNDARY_RTOL):
        raise DomainError("C(a) is defined for beta_a <= 2L")
    W = max(2 * L - beta, 0.0)
    e = math.exp(-2 * y * beta)
    first = math.sqrt(2 * L) * math.sqrt(-math.expm1(-2 * y * beta))
    second = W * (-math.expm1(-2 * y * beta)) + e * 2 * y * W * W * _g(2 * y * W)
    return math.sqrt(2 * y) * (first + math.sqrt(max(second, 0.0)))


def unstable_constant(a, L: float) -> float:
    """``2 sqrt(2 L Im a sinh(2 L Im a)) exp(L Im a) exp(-beta_a Im a)``."""
    a = _point(a)
    y = a.im
    return 2 * math.sqrt(2 * L * y * math.sinh(2 * L * y)) * math.exp(L * y - a.beta * y)


def cab_constant(a, b):
    """``(exact, coarse)`` values of ``C(a, b)``; coarse is ``14 |a - b| / Im b``.

    Raises:
        DomainError: unless ``|a - b| <= |b| / 2``.
    """
    a, b = _point(a), _point(b)
    dist = abs(a.value - b.value)
    if dist > 0.5 * abs(b.value) * (1 + 1e-12):
        raise DomainError("C(a, b) needs |a - b| <= |b|/2")
    ya, yb = a.im, b.im
    exact = (SQRT_2PI * abs(ya - yb) / yb
             + 1.5 * SQRT_2PI * yb * (abs(a.re - b.re) / yb ** 2 + abs(1 / ya - 1 / yb)))
    return exact, 14.0 * dist / yb


def cb_constant(b, L: float) -> float:
    """``C(b) = sqrt((1 + 8 L^2 Im b g(4 L Im b)) / (2 Im b))``.

    This is algebraically the same as
    ``(2 Im b)^(-1/2) [2L + 1 + (exp(-4 L Im b) - 1)/(2 Im b)]^(1/2)``.
    """
    b = _point(b)
    y = b.im
    return math.sqrt((1.0 + 8.0 * L * L * y * _g(4 * L * y)) / (2 * y))


def c1_constant(b, L: float) -> float:
    b = _point(b)
    return 2 + 2 * SQRT_2PI + (2 + 4 * SQRT_2PI) * b.im * cb_constant(b, L)


def c2_constant(a, b, L: float, exact: bool = True) -> float:
    b = _point(b)
    cab = cab_constant(a, b)[0 if exact else 1]
    return 2 * cab + 4 * b.im * cb_constant(b, L) * cab


def lemma1_rhs(a, L: float, lam: float, fnorm: float) -> float:
    a = _point(a)
    y = a.im
    return (1 + 2 * y / (y - lam)) * math.exp(2 * y * y / a.abs2) * math.exp(L * lam) * fnorm


# ---------------------------------------------------------------------------
# reports


def thm1_bound(f: PWFunction, a, report=None):
    """``(coarse, sharp)`` reports for the single-flip estimate.

    In the unstable regime the measured quantity is ``|d - 2||f||^2|``.
    """
    a = _point(a)
    L = f.bandlimit
    nrm = l2_norm(f)
    rep = self_distance(f, a) if report is None else report
    regime = _regime(a, L)
    if regime == "unstable":
        lhs = abs(rep.distance_sq - 2 * nrm * nrm)
        coarse = 30 * L * a.im * nrm * nrm
        sharp = 2 * unstable_constant(a, L) * nrm * nrm
    else:
        lhs = rep.distance_sq
        w = omega2(f.spectrum, a.beta)
        coarse = 2 * w * nrm + 8 * math.sqrt(L * a.im) * nrm * nrm
        sharp = 2 * w * nrm + 2 * c_a(a, L) * nrm * nrm
    return (BoundReport("thm1_coarse", lhs, coarse, regime, a, None, L),
            BoundReport("thm1_sharp", lhs, sharp, regime, a, None, L))


def lemma1_bound(f: PWFunction, a, lam: float, **kw) -> BoundReport:
    """Strip norm of ``F_a f`` against its explicit bound.

    Raises:
        DomainError: unless ``0 < lam < Im a``.
    """
    a = _point(a)
    if not (0 < lam < a.im):
        raise DomainError("need 0 < lambda < Im a")
    lhs = strip_norm(f, a, lam, **kw)
    rhs = lemma1_rhs(a, f.bandlimit, lam, l2_norm(f))
    return BoundReport("lemma1", lhs, rhs, "", a, None, f.bandlimit, lam)


def techlem1_lhs(f: PWFunction, a, b) -> float:
    """``||Im a G_a - Im b G_b||_2`` in closed form.

    ``G_x`` is the gamma convolution of the shifted spectrum.
    """
    a, b = _point(a), _point(b)
    cab_constant(a, b)
    if a == b:
        return 0.0
    diff = linear_combination((a.im, gamma_convolution(f, a)), (-b.im, gamma_convolution(f, b)))
    return norm(diff)


def techlem1_bound(f: PWFunction, a, b) -> BoundReport:
    a, b = _point(a), _point(b)
    lhs = techlem1_lhs(f, a, b)
    exact, _ = cab_constant(a, b)
    rhs = exact * l2_norm(f) + SQRT_2PI * omega2(f.spectrum, abs(a.beta - b.beta))
    return BoundReport("techlem1", lhs, rhs, "", a, b, f.bandlimit)


def _abs_pieces(spectrum):
    """Sub-intervals of each piece on which ``|p|`` is smooth.

    Cuts go at the real parts of the zeros of ``p`` close to the piece. They
    are graded geometrically by each zero's distance from the real axis, which
    keeps Gauss-Legendre accurate near (almost) real zeros.
    """
    out = []
    for j, p in enumerate(spectrum.coef):
        h = float(spectrum.widths[j])
        cuts = [0.0, h]
        trimmed = np.trim_zeros(np.asarray(p), "b")
        if trimmed.size > 1:
            for r in np.polynomial.polynomial.polyroots(trimmed):
                if not (-h < r.real < 2 * h):
                    continue
                d = abs(r.imag)
                cuts.append(r.real)
                if d < h:
                    off = max(d, 1e-12 * h) * 2.0 ** np.arange(0, 64)
                    off = off[off < h]
                    cuts.extend(r.real + off)
                    cuts.extend(r.real - off)
        cuts = np.unique(np.clip(cuts, 0.0, h))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo > 1e-14 * h:
                out.append((j, spectrum.breaks[j] + lo, spectrum.breaks[j] + hi))
    return out


def techlem2_lhs(f: PWFunction, b, *, nodes: int = 48) -> float:
    """``[int (exp(y (x - beta)) int_{x-beta}^L exp(-y t) |f^(t)| dt)^2 dx]^(1/2)``, ``y = Im b``.

    Substitute ``u = x - beta`` and ``H(u) = int_u^L exp(-y t) |f^(t)| dt``.
    The integral is ``int exp(2yu) H(u)^2 du``. Below the support ``H`` is
    constant, which contributes ``H0^2 exp(2 y lo) / (2y)``. Inside the
    support Gauss-Legendre runs on panels cut at the real zeros of ``|p|``,
    where the modulus is smooth.
    """
    b = _point(b)
    y = b.im
    sp = f.spectrum
    lo = float(sp.breaks[0])
    panels = _abs_pieces(sp)
    x0, w0 = np.polynomial.legendre.leggauss(nodes)
    # panel integrals of exp(-yt)|f^| and fine nodes for H
    seg_total = []
    outer = 0.0
    for j, p0, p1 in panels:
        half = 0.5 * (p1 - p0)
        t = p0 + half * (x0 + 1)
        vals = np.exp(-y * t) * np.abs(np.polynomial.polynomial.polyval(t - sp.breaks[j], sp.coef[j]))
        seg_total.append(float(np.sum(w0 * vals) * half))
    suffix = np.concatenate([np.cumsum(seg_total[::-1])[::-1], [0.0]])
    for k, (j, p0, p1) in enumerate(panels):
        half = 0.5 * (p1 - p0)
        u = p0 + half * (x0 + 1)
        # H(u) = suffix[k+1] + int_u^{p1} exp(-yt)|f^(t)| dt, nested Gauss-Legendre
        a_ = u[:, None]
        hh = 0.5 * (p1 - a_)
        tt = a_ + hh * (x0[None, :] + 1)
        inner = np.exp(-y * tt) * np.abs(np.polynomial.polynomial.polyval(tt - sp.breaks[j], sp.coef[j]))
        H = suffix[k + 1] + np.sum(w0[None, :] * inner, axis=1) * hh[:, 0]
        outer += float(np.sum(w0 * np.exp(2 * y * u) * H * H) * half)
    H0 = suffix[0]
    outer += H0 * H0 * math.exp(2 * y * lo) / (2 * y)
    return math.sqrt(outer)


def techlem2_bound(f: PWFunction, b) -> BoundReport:
    b = _point(b)
    lhs = techlem2_lhs(f, b)
    rhs = l2_norm(f) * cb_constant(b, f.bandlimit)
    return BoundReport("techlem2", lhs, rhs, "", None, b, f.bandlimit)


def thm2_bound(f: PWFunction, a, b, report=None):
    """``(sharp, coarse)`` pair-distance reports with ``omega_2`` at ``|beta_a - beta_b|``.

    The sharp report uses the exact ``C(a, b)`` and the coarse one uses
    ``14 |a - b| / Im b``.
    """
    a, b = _point(a), _point(b)
    cab_constant(a, b)
    L = f.bandlimit
    nrm = l2_norm(f)
    rep = pair_distance(f, a, b) if report is None else report
    w = omega2(f.spectrum, abs(a.beta - b.beta))
    c1 = c1_constant(b, L)
    sharp = c1 * w * nrm + c2_constant(a, b, L, True) * nrm * nrm
    coarse = c1 * w * nrm + c2_constant(a, b, L, False) * nrm * nrm
    return (BoundReport("thm2", rep.distance_sq, sharp, "", a, b, L),
            BoundReport("thm2_coarse", rep.distance_sq, coarse, "", a, b, L))


__all__ = [
    "BoundReport", "Region", "bound_reports_to_csv", "c1_constant", "c2_constant", "c_a",
    "cab_constant", "cb_constant", "in_disc", "lemma1_bound", "lemma1_rhs",
    "region_classify", "techlem1_bound", "techlem1_lhs", "techlem2_bound", "techlem2_lhs",
    "thm1_bound", "thm2_bound", "unstable_constant",
]
