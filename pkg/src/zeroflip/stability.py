"""Stability distances between flipped functions.

For unimodular ``c`` and functions of equal norm,

    inf_c ||X - c Y||^2 = 2 (||f||^2 - |<X, Y>|),

which is attained at ``c = <X, Y> / |<X, Y>|``. The inner products are exact
spectral computations. A real-line quadrature of ``u_a conj(u_b) |f|^2``
serves as the independent oracle.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .flip import (
    _point,
    flip_spectrum,
    gamma_convolution,
    multiplier,
    time_rule,
    translated_spectrum,
)
from .pwcore import FlipPoint, PWFunction, l2_norm
from .spectra import autocorrelation, inner_product

CSV_COLUMNS = ("re_a", "im_a", "re_b", "im_b", "beta_a", "beta_b", "distance_sq",
               "inner_re", "inner_im", "flag")
DECOMP_RTOL = 1e-8


@dataclass(frozen=True)
class StabilityReport:
    """Result of a distance computation.

    ``flag`` is ``"ok"`` or ``"zero_inner"``; in the latter case the optimal
    phase is undefined and reported as 1.
    """

    distance_sq: float
    optimal_phase: complex
    inner_value: complex
    norm_sq: float
    a: FlipPoint
    b: FlipPoint | None = None
    decomposition: tuple | None = None
    flag: str = "ok"

    def to_dict(self) -> dict:
        d = {
            "distance_sq": self.distance_sq,
            "optimal_phase": [self.optimal_phase.real, self.optimal_phase.imag],
            "inner_value": [self.inner_value.real, self.inner_value.imag],
            "norm_sq": self.norm_sq,
            "a": [self.a.re, self.a.im],
            "b": None if self.b is None else [self.b.re, self.b.im],
            "decomposition": None if self.decomposition is None else
            [[t.real, t.imag] for t in self.decomposition],
            "flag": self.flag,
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> list:
        b = self.b
        return [self.a.re, self.a.im, 0.0 if b is None else b.re, 0.0 if b is None else b.im,
                self.a.beta, 0.0 if b is None else b.beta, self.distance_sq,
                self.inner_value.real, self.inner_value.imag, self.flag]


def reports_to_csv(reports, out=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.csv_row()])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def _report(inner: complex, nrm2: float, a, b=None, decomposition=None) -> StabilityReport:
    mag = abs(inner)
    if mag == 0:
        return StabilityReport(2.0 * nrm2, 1 + 0j, inner, nrm2, a, b, decomposition, "zero_inner")
    dist = min(max(2.0 * (nrm2 - mag), 0.0), 2.0 * nrm2)
    return StabilityReport(dist, inner / mag, inner, nrm2, a, b, decomposition)


def self_inner(f: PWFunction, a) -> complex:
    """``<S_a, f^>`` via the autocorrelation at ``beta_a`` and one exp-poly pairing."""
    a = _point(a)
    auto = autocorrelation(f.spectrum, a.beta)
    cross = inner_product(gamma_convolution(f, a), f.spectrum)
    return complex(a.phase * (auto - 2j * a.im * cross))


def self_distance(f: PWFunction, a) -> StabilityReport:
    """``inf_{|c|=1} ||F_a f - c f||^2``."""
    a = _point(a)
    return _report(self_inner(f, a), l2_norm(f) ** 2, a)


@dataclass(frozen=True)
class PairInner:
    """Pair inner product and its four-term decomposition.

    ``terms = (A, B - B_bb, C - C_bb, D - D_bb)`` with

    * ``A = <T_b, T_a>``
    * ``B = 2i Im a <T_b, G_a>``
    * ``C = -2i Im b <G_b, T_a>``
    * ``D = 4 Im a Im b <G_b, G_a>``

    where ``T_x`` is the shifted spectrum and ``G_x`` the gamma convolution. The terms
    sum to ``int P_b conj(P_a)``, where ``P_x`` is the bracketed flipped
    spectrum, and ``inner = (a conj(b))/(conj(a) b) * conj(total)``.
    ``bb_residual`` is the ``b = b`` sum ``B_bb + C_bb + D_bb``, zero up to
    rounding.
    """

    inner: complex
    direct: complex
    terms: tuple
    total: complex
    bb_residual: complex


def pair_inner(f: PWFunction, a, b) -> PairInner:
    a, b = _point(a), _point(b)
    Ta, Tb = translated_spectrum(f, a), translated_spectrum(f, b)
    Ga, Gb = gamma_convolution(f, a), gamma_convolution(f, b)
    A = inner_product(Tb, Ta)
    B = 2j * a.im * inner_product(Tb, Ga)
    C = -2j * b.im * inner_product(Gb, Ta)
    D = 4 * a.im * b.im * inner_product(Gb, Ga)
    Bbb = 2j * b.im * inner_product(Tb, Gb)
    Cbb = -2j * b.im * inner_product(Gb, Tb)
    Dbb = 4 * b.im * b.im * inner_product(Gb, Gb)
    terms = (A, B - Bbb, C - Cbb, D - Dbb)
    total = complex(sum(terms))
    av, bv = a.value, b.value
    pref = (av * bv.conjugate()) / (av.conjugate() * bv)
    inner = complex(pref * total.conjugate())
    direct = inner_product(flip_spectrum(f, a), flip_spectrum(f, b))
    return PairInner(inner, direct, tuple(complex(t) for t in terms), total,
                     complex(Bbb + Cbb + Dbb))


def pair_distance(f: PWFunction, a, b) -> StabilityReport:
    """``inf_{|c|=1} ||F_a f - c F_b f||^2``."""
    a, b = _point(a), _point(b)
    pi = pair_inner(f, a, b)
    return _report(pi.inner, l2_norm(f) ** 2, a, b, pi.terms)


def time_oracle_inner(f: PWFunction, a, b=None, *, refine: int = 0) -> complex:
    """``int u_a conj(u_b) |f|^2 dx`` on the real line (``b=None``: ``u_b = 1``).

    This equals ``<F_a f, F_b f>`` by Parseval, without touching the
    spectral machinery.

    Raises:
        ToleranceNotMet: when ``f`` decays too slowly to truncate.
    """
    pts = [a] if b is None else [a, b]
    x, w, _ = time_rule(f, pts, refine=refine)
    dens = np.abs(f.eval_fast(x)) ** 2
    ua = multiplier(a, x)
    ub = 1.0 if b is None else multiplier(b, x)
    return complex(np.sum(w * dens * ua * np.conj(ub)))


def phase_grid_distance(f: PWFunction, a, b=None, n: int = 720):
    """Minimum over ``n`` equispaced phases of the quadrature ``||F_a f - c g||^2``.

    ``g = F_b f``, or ``g = f`` when ``b`` is None. Returns ``(min_value, best_phase)``.
    """
    pts = [a] if b is None else [a, b]
    x, w, _ = time_rule(f, pts)
    fx = f.eval_fast(x)
    X = multiplier(a, x) * fx
    Y = fx if b is None else multiplier(b, x) * fx
    nx = float(np.sum(w * np.abs(X) ** 2))
    ny = float(np.sum(w * np.abs(Y) ** 2))
    cross = complex(np.sum(w * X * np.conj(Y)))
    phases = np.exp(2j * math.pi * np.arange(n) / n)
    vals = nx + ny - 2.0 * np.real(np.conj(phases) * cross)
    k = int(np.argmin(vals))
    return float(vals[k]), complex(phases[k])


def report_from_dict(d: dict) -> StabilityReport:
    b = d.get("b")
    dec = d.get("decomposition")
    return StabilityReport(
        d["distance_sq"], complex(*d["optimal_phase"]), complex(*d["inner_value"]),
        d["norm_sq"], FlipPoint(*d["a"]), None if b is None else FlipPoint(*b),
        None if dec is None else tuple(complex(*t) for t in dec), d.get("flag", "ok"))


__all__ = [
    "CSV_COLUMNS", "PairInner", "StabilityReport", "pair_distance", "pair_inner",
    "phase_grid_distance", "report_from_dict", "reports_to_csv", "self_distance",
    "self_inner", "time_oracle_inner",
]
