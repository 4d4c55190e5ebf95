"""Seeded verification suites, half-plane sweeps and convergence studies.

Every random draw comes from ``numpy.random.default_rng([seed, stream, index])``,
so each trial is reproducible on its own. Results are assembled in trial order
regardless of the thread count.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds, stability
from .flip import flip_spectrum, is_genuine_zero, time_norm
from .errors import ConstraintViolation, ToleranceNotMet
from .pwcore import FlipPoint, PWFunction, ZeroProductSpec, build_from_zeros, l2_norm
from .spectra import norm

PRESETS = {
    "sinc": {"zeros": (), "m": 1},
    "triangle": {"zeros": (), "m": 2},
    "zero3": {"zeros": (0.5 + 0.8j, -1.2 + 0.4j, 0.3 + 1.5j), "m": 5},
}

CHECKS = ("unimodularity", "parseval", "bandlimit", "bandlimit_shifted", "thm1", "lemma1",
          "techlem1", "techlem2", "cab", "thm2")

DEFAULT_TOLERANCES = {
    "unimodularity": 1e-8,
    "unimodularity_time": 1e-6,
    "parseval": 1e-6,
    "bandlimit": 1e-8,
    "bandlimit_shifted": 1e-8,
    "thm1": 1e-9,
    "lemma1": 1e-6,
    "techlem1": 1e-9,
    "techlem2": 1e-9,
    "cab": 0.0,
    "thm2": 1e-9,
}

_STREAMS = {name: k for k, name in enumerate(CHECKS)}


class ConfigError(ValueError):
    """Invalid sweep or verification configuration."""


def preset_spec(name: str, L: float = 1.0) -> ZeroProductSpec:
    try:
        p = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return ZeroProductSpec(p["zeros"], p["m"], L / p["m"], None)


def preset(name: str, L: float = 1.0) -> PWFunction:
    return build_from_zeros(preset_spec(name, L))


@dataclass(frozen=True)
class Box:
    re: tuple = (-2.0, 2.0)
    im: tuple = (0.1, 2.0)

    def __post_init__(self):
        re, im = tuple(map(float, self.re)), tuple(map(float, self.im))
        if len(re) != 2 or len(im) != 2 or re[0] > re[1] or im[0] > im[1]:
            raise ConfigError("box bounds must be ordered pairs")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def draw(self, rng) -> complex:
        return complex(rng.uniform(*self.re), rng.uniform(*self.im))


@dataclass(frozen=True)
class Grid:
    """Rectangle ``re x (im_lo, im_hi]``.

    Real parts include both ends. Imaginary parts are
    ``im_lo + (j + 1)(im_hi - im_lo)/n_im``, which keeps the grid off the real
    axis.
    """

    re: tuple = (-2.0, 2.0)
    im: tuple = (0.0, 2.0)
    n: tuple = (16, 16)

    def __post_init__(self):
        if self.n[0] < 2 or self.n[1] < 2:
            raise ConfigError("grid resolution must be at least 2x2")
        if self.im[0] < 0 or self.im[1] <= self.im[0]:
            raise ConfigError("grid must lie in the upper half-plane")
        if self.re[1] < self.re[0]:
            raise ConfigError("grid real range must be ordered")

    def points(self):
        res = np.linspace(self.re[0], self.re[1], self.n[0])
        ims = self.im[0] + (np.arange(self.n[1]) + 1) * (self.im[1] - self.im[0]) / self.n[1]
        return [complex(r, i) for i in ims for r in res]


@dataclass(frozen=True)
class SweepConfig:
    function: ZeroProductSpec | None = None
    preset: str | None = None
    bandlimit: float = 1.0
    grid: Grid = field(default_factory=Grid)
    checks: tuple = CHECKS
    trials: int = 5
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    zero_box: Box = field(default_factory=lambda: Box((-2.0, 2.0), (0.1, 2.0)))
    point_box: Box = field(default_factory=lambda: Box((-2.0, 2.0), (0.2, 2.0)))
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.trials < 0 or self.threads < 1 or not self.bandlimit > 0:
            raise ConfigError("trials >= 0, threads >= 1 and bandlimit > 0 required")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def fixed_function(self) -> PWFunction | None:
        if self.function is not None:
            return build_from_zeros(self.function)
        if self.preset is not None:
            return preset(self.preset, self.bandlimit)
        return None

    @classmethod
    def from_dict(cls, d: dict) -> SweepConfig:
        try:
            kw = {}
            fn = d.get("function")
            if isinstance(fn, dict) and "preset" in fn:
                kw["preset"] = fn["preset"]
            elif isinstance(fn, dict):
                kw["function"] = ZeroProductSpec.from_dict(fn)
            elif isinstance(fn, str):
                kw["preset"] = fn
            if "preset" in d:
                kw["preset"] = d["preset"]
            if "grid" in d:
                g = d["grid"]
                kw["grid"] = Grid(tuple(g.get("re", (-2, 2))), tuple(g.get("im", (0, 2))),
                                  tuple(int(v) for v in g.get("n", (16, 16))))
            for key in ("zero_box", "point_box"):
                if key in d:
                    kw[key] = Box(tuple(d[key]["re"]), tuple(d[key]["im"]))
            if "checks" in d:
                kw["checks"] = tuple(d["checks"])
            for key, typ in (("trials", int), ("seed", int), ("threads", int),
                             ("bandlimit", float), ("out", str)):
                if key in d and d[key] is not None:
                    kw[key] = typ(d[key])
            if "tolerances" in d:
                kw["tolerances"] = {str(k): float(v) for k, v in d["tolerances"].items()}
            extra = set(d) - {"function", "preset", "grid", "zero_box", "point_box", "checks",
                              "trials", "seed", "threads", "bandlimit", "out", "tolerances"}
            if extra:
                raise ConfigError(f"unknown config keys {sorted(extra)}")
            return cls(**kw)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc


# ---------------------------------------------------------------------------
# random draws


def trial_rng(seed: int, stream: int, index: int):
    return np.random.default_rng([seed, stream, index])


def random_spec(rng, L: float = 1.0, box: Box = Box(), max_zeros: int = 3,
                extra_zeros=()) -> ZeroProductSpec:
    d = int(rng.integers(0, max_zeros + 1))
    zeros = [box.draw(rng) for _ in range(d)] + [complex(z) for z in extra_zeros]
    m = len(zeros) + int(rng.integers(2, 5))
    return ZeroProductSpec(tuple(zeros), m, L / m, None)


def random_pair(rng, box: Box = Box((-2.0, 2.0), (0.2, 2.0))):
    """``(a, b)`` with ``b`` in ``box`` and ``|a - b| <= |b|/2`` (rejection)."""
    b = box.draw(rng)
    r = abs(b) / 2
    while True:
        a = b + complex(rng.uniform(-r, r), rng.uniform(-r, r))
        if abs(a - b) <= r and a.imag > 0:
            return FlipPoint.from_complex(a), FlipPoint.from_complex(b)


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class TrialResult:
    """Relative margin (``>= -tol`` passes) or a tolerance failure message."""

    margin: float
    scale: float = 1.0
    error: str | None = None


def _draw_function(cfg: SweepConfig, rng, extra_zeros=()) -> PWFunction:
    base = cfg.function or (preset_spec(cfg.preset, cfg.bandlimit) if cfg.preset else None)
    if base is None:
        return build_from_zeros(random_spec(rng, cfg.bandlimit, cfg.zero_box,
                                            extra_zeros=extra_zeros))
    if not extra_zeros:
        return build_from_zeros(base)
    return planted_function(extra_zeros[0], base, cfg.bandlimit)


def spectrum_sup_outside(S, lo: float, hi: float, samples: int = 2001) -> float:
    """Sup of ``|S|`` outside ``[lo, hi]``.

    Computed from the exact tail amplitudes plus dense sampling of any pieces
    that stick out of the interval.
    """
    best = 0.0
    if S.left_amp.size:
        best = max(best, float(np.abs(np.sum(S.left_amp))))
    b = S.breaks
    for j in range(S.n_pieces):
        p0, p1 = b[j], b[j + 1]
        for s0, s1 in ((p0, min(p1, lo)), (max(p0, hi), p1)):
            if s1 > s0:
                xs = np.linspace(s0, s1, samples)
                best = max(best, float(np.max(np.abs(S(xs)))))
    return best


def _check_unimodularity(cfg, rng):
    f = _draw_function(cfg, rng)
    a = cfg.point_box.draw(rng)
    nrm = l2_norm(f)
    spec_dev = abs(norm(flip_spectrum(f, a)) - nrm) / nrm
    time_dev = abs(time_norm(f, a) - nrm) / nrm
    m1 = cfg.tol("unimodularity") - spec_dev
    m2 = cfg.tol("unimodularity_time") - time_dev
    return TrialResult(min(m1, m2))


def _check_parseval(cfg, rng):
    f = _draw_function(cfg, rng)
    a, b = random_pair(rng, cfg.point_box)
    nrm2 = l2_norm(f) ** 2
    pi = stability.pair_inner(f, a, b)
    oracle = stability.time_oracle_inner(f, a, b)
    return TrialResult(cfg.tol("parseval") - abs(pi.inner - oracle) / nrm2)


def _check_bandlimit(cfg, rng, shifted: bool):
    a = FlipPoint.from_complex(cfg.point_box.draw(rng))
    f = _draw_function(cfg, rng, extra_zeros=(a.value,))
    L = f.bandlimit
    shift = a.beta if shifted else 0.0
    S = flip_spectrum(f, a)
    sup = spectrum_sup_outside(S, -L - 1e-6 + shift, L + 1e-6 + shift)
    name = "bandlimit_shifted" if shifted else "bandlimit"
    return TrialResult(cfg.tol(name) - sup / l2_norm(f))


def _check_thm1(cfg, rng):
    f = _draw_function(cfg, rng)
    a = FlipPoint.from_complex(cfg.point_box.draw(rng))
    nrm2 = l2_norm(f) ** 2
    coarse, sharp = bounds.thm1_bound(f, a)
    return TrialResult(min(coarse.margin, sharp.margin) / nrm2)


def _check_lemma1(cfg, rng):
    f = _draw_function(cfg, rng)
    a = FlipPoint.from_complex(cfg.point_box.draw(rng))
    lam = float(rng.choice([0.25, 0.5, 0.75])) * a.im
    try:
        rep = bounds.lemma1_bound(f, a, lam)
    except ToleranceNotMet:
        # slow (1/x) decay: truncated slices cannot reach the tolerance, use closed form
        rep = bounds.lemma1_bound(f, a, lam, method="spectral")
    return TrialResult(rep.margin / rep.rhs)


def _check_techlem1(cfg, rng):
    f = _draw_function(cfg, rng)
    a, b = random_pair(rng, cfg.point_box)
    rep = bounds.techlem1_bound(f, a, b)
    return TrialResult(rep.margin / l2_norm(f))


def _check_techlem2(cfg, rng):
    f = _draw_function(cfg, rng)
    _, b = random_pair(rng, cfg.point_box)
    rep = bounds.techlem2_bound(f, b)
    return TrialResult(rep.margin / l2_norm(f))


def _check_cab(cfg, rng):
    a, b = random_pair(rng, cfg.point_box)
    exact, coarse = bounds.cab_constant(a, b)
    return TrialResult(coarse - exact, max(coarse, 1e-300))


def _check_thm2(cfg, rng):
    f = _draw_function(cfg, rng)
    a, b = random_pair(rng, cfg.point_box)
    sharp, _ = bounds.thm2_bound(f, a, b)
    return TrialResult(sharp.margin / l2_norm(f) ** 2)


_CHECK_FUNCS = {
    "unimodularity": _check_unimodularity,
    "parseval": _check_parseval,
    "bandlimit": lambda cfg, rng: _check_bandlimit(cfg, rng, False),
    "bandlimit_shifted": lambda cfg, rng: _check_bandlimit(cfg, rng, True),
    "thm1": _check_thm1,
    "lemma1": _check_lemma1,
    "techlem1": _check_techlem1,
    "techlem2": _check_techlem2,
    "cab": _check_cab,
    "thm2": _check_thm2,
}


def run_trial(cfg: SweepConfig, check: str, index: int) -> TrialResult:
    rng = trial_rng(cfg.seed, _STREAMS[check], index)
    try:
        return _CHECK_FUNCS[check](cfg, rng)
    except ToleranceNotMet as exc:
        return TrialResult(float("nan"), error=str(exc))


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def verify(cfg: SweepConfig):
    """Run every configured check ``cfg.trials`` times.

    Returns ``(report_dict, exit_status)``. The status is 0 when everything
    passes, 1 on a bound violation and 3 when only tolerance failures occurred.
    """
    jobs = [(c, i) for c in cfg.checks for i in range(cfg.trials)]
    results = _map(lambda job: run_trial(cfg, *job), jobs, cfg.threads)
    entries = []
    violations = tolerance = 0
    for c in cfg.checks:
        rs = [r for (cc, _), r in zip(jobs, results) if cc == c]
        tol = cfg.tol(c)
        margins = [r.margin / r.scale for r in rs if r.error is None]
        fails = [i for i, r in enumerate(rs) if r.error is None and r.margin / r.scale < -tol]
        errs = [i for i, r in enumerate(rs) if r.error is not None]
        violations += len(fails)
        tolerance += len(errs)
        entries.append({
            "check": c,
            "trials": len(rs),
            "worst_margin": min(margins) if margins else None,
            "failures": fails,
            "tolerance_failures": errs,
            "tolerance": tol,
        })
    status = 1 if violations else (3 if tolerance else 0)
    return {"seed": cfg.seed, "checks": entries, "status": status}, status


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# sweeps


SWEEP_COLUMNS = ("re_a", "im_a", "region", "in_disc", "beta_a", "distance_sq", "thm1_regime",
                 "thm1_coarse_rhs", "thm1_sharp_rhs", "coarse_margin", "sharp_margin")
REGION_COLUMNS = ("re_a", "im_a", "beta_a", "region", "in_disc")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def sweep_row(f: PWFunction, a: complex):
    a = FlipPoint.from_complex(a)
    L = f.bandlimit
    reg = bounds.region_classify(a, L)
    rep = stability.self_distance(f, a)
    coarse, sharp = bounds.thm1_bound(f, a, rep)
    return (a.re, a.im, reg.label, bounds.in_disc(a, L), a.beta, rep.distance_sq,
            coarse.regime, coarse.rhs, sharp.rhs, coarse.margin, sharp.margin)


def sweep(cfg: SweepConfig, f: PWFunction | None = None) -> str:
    """CSV with one row per grid point, in grid order."""
    f = f or cfg.fixed_function() or preset("triangle", cfg.bandlimit)
    rows = _map(lambda a: sweep_row(f, a), cfg.grid.points(), cfg.threads)
    return _csv(SWEEP_COLUMNS, rows)


def region_map(cfg: SweepConfig) -> str:
    L = cfg.bandlimit

    def row(a):
        p = FlipPoint.from_complex(a)
        return (p.re, p.im, p.beta, bounds.region_classify(p, L).label, bounds.in_disc(p, L))

    return _csv(REGION_COLUMNS, [row(a) for a in cfg.grid.points()])


CONVERGE_COLUMNS = ("k", "re_a", "im_a", "distance_sq", "rhs", "ratio")


def convergence_study(f: PWFunction, b, a1, steps: int = 10):
    """Rows for ``a_k = b + 2**-(k-1) (a1 - b)``, ``k = 1..steps``, plus ``k = 0`` at ``b``.

    Raises:
        DomainError: unless ``|a1 - b| <= |b|/2``.
    """
    b = FlipPoint.from_complex(b)
    a1 = FlipPoint.from_complex(a1)
    bounds.cab_constant(a1, b)
    if not is_genuine_zero(f, b):
        raise ConstraintViolation("convergence study needs f(b) = 0")
    rows = [(0, b.re, b.im, 0.0, 0.0, 0.0)]
    for k in range(1, steps + 1):
        a = FlipPoint.from_complex(b.value + 2.0 ** -(k - 1) * (a1.value - b.value))
        rep = stability.pair_distance(f, a, b)
        sharp, _ = bounds.thm2_bound(f, a, b, rep)
        ratio = rep.distance_sq / sharp.rhs if sharp.rhs > 0 else 0.0
        rows.append((k, a.re, a.im, rep.distance_sq, sharp.rhs, ratio))
    return rows


def convergence_csv(rows) -> str:
    return _csv(CONVERGE_COLUMNS, rows)


def planted_function(b: complex, base: ZeroProductSpec | None = None, L: float = 1.0):
    """``f`` with a zero at ``b`` added to ``base`` (default: only ``b``, ``m = 3``)."""
    zeros = (tuple(base.zeros) if base else ()) + (complex(b),)
    m = max(base.m if base else 0, len(zeros) + 2)
    return build_from_zeros(ZeroProductSpec(zeros, m, L / m, None))


__all__ = [
    "Box", "CHECKS", "ConfigError", "Grid", "PRESETS", "SweepConfig", "convergence_csv",
    "convergence_study", "planted_function", "preset", "preset_spec", "random_pair",
    "random_spec", "region_map", "report_json", "run_trial", "spectrum_sup_outside", "sweep",
    "trial_rng", "verify",
]
