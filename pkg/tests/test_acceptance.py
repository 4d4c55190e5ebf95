"""Desk-scale acceptance run. Each test prints one ``PASS``/``FAIL`` verdict line."""

import math
import time

import numpy as np
import pytest

from zeroflip.bounds import (
    cab_constant,
    in_disc,
    lemma1_bound,
    region_classify,
    techlem1_bound,
    techlem2_bound,
    thm1_bound,
)
from zeroflip.errors import ToleranceNotMet
from zeroflip.flip import flip_spectrum, time_norm
from zeroflip.harness import (
    Grid,
    SweepConfig,
    convergence_study,
    planted_function,
    preset,
    random_pair,
    random_spec,
    spectrum_sup_outside,
    sweep,
    trial_rng,
)
from zeroflip.pwcore import FlipPoint, build_from_zeros, l2_norm
from zeroflip.spectra import PiecewisePolySpectrum, norm, omega2
from zeroflip.stability import pair_inner, self_distance, time_oracle_inner

SEED = 20240611
CFG = SweepConfig()


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        return ok
    return emit


def draw_f(rng, extra=()):
    return build_from_zeros(random_spec(rng, 1.0, CFG.zero_box, extra_zeros=extra))


def test_criterion_1_norm_preservation(verdict):
    t0 = time.perf_counter()
    spec_dev = time_dev = 0.0
    for i in range(200):
        rng = trial_rng(SEED, 1, i)
        f = draw_f(rng)
        a = CFG.point_box.draw(rng)
        nrm = l2_norm(f)
        spec_dev = max(spec_dev, abs(norm(flip_spectrum(f, a)) - nrm) / nrm)
        time_dev = max(time_dev, abs(time_norm(f, a) - nrm) / nrm)
    secs = time.perf_counter() - t0
    ok = spec_dev < 1e-8 and time_dev < 1e-6 and secs < 60
    verdict(1, ok, f"spectral {spec_dev:.2e}, time {time_dev:.2e}, {secs:.1f}s")
    assert ok


def test_criterion_2_parseval(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        rng = trial_rng(SEED, 2, i)
        f = draw_f(rng)
        a, b = random_pair(rng, CFG.point_box)
        dev = abs(pair_inner(f, a, b).inner - time_oracle_inner(f, a, b)) / l2_norm(f) ** 2
        worst = max(worst, dev)
    secs = time.perf_counter() - t0
    ok = worst < 1e-6 and secs < 120
    verdict(2, ok, f"max relative deviation {worst:.2e}, {secs:.1f}s")
    assert ok


def _planted_band_sups(shifted):
    out = []
    for i in range(50):
        rng = trial_rng(SEED, 3, i)
        a = FlipPoint.from_complex(CFG.point_box.draw(rng))
        f = draw_f(rng, extra=(a.value,))
        L, s = f.bandlimit, (a.beta if shifted else 0.0)
        sup = spectrum_sup_outside(flip_spectrum(f, a), -L - 1e-6 + s, L + 1e-6 + s)
        out.append(sup / l2_norm(f))
    return np.array(out)


def test_criterion_3_band_literal(verdict):
    # the modulation factor moves the support to [-L + beta_a, L + beta_a]; see notes
    rel = _planted_band_sups(shifted=False)
    ok = bool(np.all(rel < 1e-8))
    verdict(3, ok, f"literal band [-L, L]: {int(np.sum(rel >= 1e-8))}/50 draws leak, "
                   f"worst sup/||f|| {rel.max():.2e}")
    assert ok


def test_criterion_3_band_shifted(verdict):
    rel = _planted_band_sups(shifted=True)
    ok = bool(np.all(rel < 1e-8))
    verdict("3 (shifted band)", ok, f"worst sup/||f|| {rel.max():.2e}")
    assert ok


def test_criterion_4_single_flip(verdict):
    sinc = preset("sinc")
    a = FlipPoint(0.0, 1e-3)
    d = self_distance(sinc, a).distance_sq
    _, sharp = thm1_bound(sinc, a)
    unstable_ok = 1.97 <= d <= 2.03 and sharp.margin >= 0
    worst = math.inf
    n = i = 0
    while n < 100:
        rng = trial_rng(SEED, 4, i)
        i += 1
        f = draw_f(rng)
        a = FlipPoint.from_complex(CFG.point_box.draw(rng))
        if a.beta > 2 * f.bandlimit:
            continue
        coarse, sharp2 = thm1_bound(f, a)
        worst = min(worst, coarse.margin / l2_norm(f) ** 2, sharp2.margin / l2_norm(f) ** 2)
        n += 1
    ok = unstable_ok and worst >= -1e-9
    verdict(4, ok, f"sinc distance_sq {d:.5f}, sharp margin {sharp.margin:.3e}; "
                   f"stable-regime worst margin {worst:.3e}")
    assert ok


def test_criterion_5_strip_norm(verdict):
    worst = math.inf
    spectral = 0
    for i in range(50):
        rng = trial_rng(SEED, 5, i)
        f = draw_f(rng)
        a = FlipPoint.from_complex(CFG.point_box.draw(rng))
        for frac in (0.25, 0.5, 0.75):
            try:
                rep = lemma1_bound(f, a, frac * a.im)
            except ToleranceNotMet:
                rep = lemma1_bound(f, a, frac * a.im, method="spectral")
                spectral += 1
            worst = min(worst, rep.margin / rep.rhs)
    ok = worst >= -1e-6
    verdict(5, ok, f"worst relative margin {worst:.3e} over 150 cases "
                   f"({spectral} via closed form)")
    assert ok


def _admissible_draws():
    for i in range(100):
        rng = trial_rng(SEED, 6, i)
        f = draw_f(rng)
        a, b = random_pair(rng, CFG.point_box)
        yield f, a, b


def test_criterion_6_technical_lemmas(verdict):
    w1 = w2 = math.inf
    for f, a, b in _admissible_draws():
        nrm = l2_norm(f)
        w1 = min(w1, techlem1_bound(f, a, b).margin / nrm)
        w2 = min(w2, techlem2_bound(f, b).margin / nrm)
    ok = min(w1, w2) >= -1e-9
    verdict(6, ok, f"techlem1 worst {w1:.3e}, techlem2 worst {w2:.3e}")
    assert ok


def _cab_excess(pairs):
    bad = []
    for k, (a, b) in enumerate(pairs):
        exact, coarse = cab_constant(a, b)
        if exact > coarse:
            bad.append((k, exact / coarse, a.im / b.im))
    return bad


def _cab_detail(bad, n):
    if not bad:
        return f"exact C(a,b) <= 14|a-b|/Im b on all {n} draws"
    k, r, h = max(bad, key=lambda t: t[1])
    return (f"{len(bad)}/{n} draws exceed 14|a-b|/Im b; worst trial {k}: "
            f"ratio {r:.2f} with Im a/Im b = {h:.3f}")


def test_criterion_6_cab_coarse(verdict):
    bad = _cab_excess((a, b) for _, a, b in _admissible_draws())
    verdict("6 (C(a,b))", not bad, _cab_detail(bad, 100))
    assert not bad


def test_criterion_6_cab_coarse_wide(verdict):
    # same claim on more draws; the coarse form assumes Im a >= Im b / 2, which
    # |a - b| <= |b|/2 does not imply, and about 3.5% of draws break it
    n = 3000
    bad = _cab_excess(random_pair(trial_rng(SEED, 66, i), CFG.point_box) for i in range(n))
    verdict("6 (C(a,b), wide sample)", not bad, _cab_detail(bad, n))
    assert not bad


def test_criterion_7_convergence(verdict):
    b = 0.3 + 0.9j
    f = planted_function(b)
    rows = convergence_study(f, b, b + 0.3 + 0.2j, steps=10)[1:]
    dist = [r[3] for r in rows]
    rhs = [r[4] for r in rows]
    ok = (all(d <= r for d, r in zip(dist, rhs)) and rhs[-1] / rhs[0] < 0.01
          and dist[-1] < dist[0])
    verdict(7, ok, f"max ratio {max(r[5] for r in rows):.3f}, "
                   f"RHS(a10)/RHS(a1) {rhs[-1] / rhs[0]:.2e}")
    assert ok


def test_criterion_8_omega2_indicator(verdict):
    L = 1.0
    ind = PiecewisePolySpectrum([-L, L], [[1.0]])
    hs = np.linspace(2 * L / 20, 2 * L, 20)
    err = max(abs(omega2(ind, h) / math.sqrt(2 * h) - 1) for h in hs)
    ok = err < 1e-6
    verdict(8, ok, f"max relative error {err:.2e}")
    assert ok


def test_criterion_9_region_sweep(verdict):
    L = 1.0
    cfg = SweepConfig(grid=Grid((-2 / L, 2 / L), (0.0, 2 / L), (64, 64)), bandlimit=L)
    lines = sweep(cfg).splitlines()[1:]
    mismatches = 0
    counts = {}
    for line in lines:
        re, im, label, disc = line.split(",")[:4]
        a = FlipPoint(float(re), float(im))
        geo = abs(a.value - 0.5j / L) < 0.5 / L
        counts[label] = counts.get(label, 0) + 1
        if label != region_classify(a, L).label or bool(int(disc)) != in_disc(a, L):
            mismatches += 1
        elif label != "boundary" and (label == "unstable") != geo:
            mismatches += 1
    ok = len(lines) == 64 * 64 and mismatches == 0
    verdict(9, ok, f"{len(lines)} rows, {mismatches} mismatches, classes {dict(sorted(counts.items()))}")
    assert ok
