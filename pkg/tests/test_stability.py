import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_function, random_point
from zeroflip.flip import flip_spectrum
from zeroflip.harness import Box, planted_function, random_pair
from zeroflip.pwcore import FlipPoint, ZeroProductSpec, build_from_zeros, l2_norm
from zeroflip.spectra import autocorrelation, inner_product, omega2
from zeroflip.stability import (
    CSV_COLUMNS,
    _report,
    pair_distance,
    pair_inner,
    phase_grid_distance,
    report_from_dict,
    reports_to_csv,
    self_distance,
    self_inner,
    time_oracle_inner,
)


def pair_draw(seed):
    return random_pair(np.random.default_rng([seed, 7]), Box((-2.0, 2.0), (0.2, 2.0)))


@given(st.integers(0, 10 ** 6))
def test_self_inner_matches_direct_pairing(seed):
    f = random_function(seed)
    a = random_point(seed)
    direct = inner_product(flip_spectrum(f, a), f.spectrum)
    assert abs(self_inner(f, a) - direct) <= 1e-10 * max(abs(direct), 1e-3)


@given(st.integers(0, 10 ** 6))
def test_self_inner_matches_time_oracle(seed):
    f = random_function(seed)
    a = random_point(seed)
    assert abs(self_inner(f, a) - time_oracle_inner(f, a)) < 1e-6 * l2_norm(f) ** 2


def test_unstable_regime_inner_is_small(triangle):
    L = triangle.bandlimit
    for a in (0.1j, 0.05 + 0.2j, 0.3j):
        p = FlipPoint.from_complex(a)
        assert p.beta > 2 * L
        assert autocorrelation(triangle.spectrum, p.beta) == 0
        assert abs(self_inner(triangle, p)) <= 15 * L * p.im


def test_optimal_phase_real_positive(triangle):
    # on the imaginary axis the triangle flip gives a real positive pairing
    rep = self_distance(triangle, 2j)
    assert abs(rep.inner_value.imag) < 1e-14 and rep.inner_value.real > 0
    assert rep.optimal_phase == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("t", [0.3, 1.0, 3.0, 10.0])
def test_distance_matches_phase_grid(zero3, t):
    rep = self_distance(zero3, 1j * t)
    grid_min, best = phase_grid_distance(zero3, 1j * t)
    slack = 2 * abs(rep.inner_value) * (1 - math.cos(math.pi / 720)) + 1e-8
    assert rep.distance_sq - 1e-8 <= grid_min <= rep.distance_sq + slack
    assert abs(best - rep.optimal_phase) <= 2 * math.pi / 720


def test_distance_regime2_bound(sinc):
    a = FlipPoint(1.0, 1e-3)
    L = sinc.bandlimit
    assert a.beta <= 2 * L
    rep = self_distance(sinc, a)
    rhs = 2 * omega2(sinc.spectrum, a.beta) + 8 * math.sqrt(L * a.im)
    assert rep.distance_sq <= rhs


def test_pair_at_equal_points(zero3):
    a = FlipPoint(0.4, 0.7)
    pi = pair_inner(zero3, a, a)
    assert pi.total == pytest.approx(1.0, abs=1e-12)
    assert all(abs(t) < 1e-13 for t in pi.terms[1:])
    assert pair_distance(zero3, a, a).distance_sq == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 10 ** 6))
def test_pair_decomposition_consistency(seed):
    f = random_function(seed)
    a, b = pair_draw(seed)
    pi = pair_inner(f, a, b)
    scale = l2_norm(f) ** 2
    assert abs(pi.inner - pi.direct) < 1e-8 * scale
    assert abs(abs(pi.total) - abs(pi.direct)) < 1e-8 * scale
    assert abs(pi.bb_residual) < 1e-10 * scale


@given(st.integers(0, 10 ** 6))
def test_pair_matches_time_oracle(seed):
    f = random_function(seed)
    a, b = pair_draw(seed)
    oracle = time_oracle_inner(f, a, b)
    assert abs(pair_inner(f, a, b).inner - oracle) < 1e-6 * l2_norm(f) ** 2


def test_time_oracle_self_consistency(zero3):
    a, b = 0.3 + 0.9j, -0.2 + 1.1j
    assert time_oracle_inner(zero3, a, a) == pytest.approx(1.0, rel=1e-9)
    base = time_oracle_inner(zero3, a, b)
    finer = time_oracle_inner(zero3, a, b, refine=1)
    assert abs(base - finer) < 1e-7 * abs(base)


def test_pair_phase_grid(zero3):
    a, b = FlipPoint(0.5, 0.8), FlipPoint(0.3, 0.9)
    rep = pair_distance(zero3, a, b)
    grid_min, _ = phase_grid_distance(zero3, a, b)
    slack = 2 * abs(rep.inner_value) * (1 - math.cos(math.pi / 720)) + 1e-8
    assert rep.distance_sq - 1e-8 <= grid_min <= rep.distance_sq + slack


@given(st.integers(0, 10 ** 6))
def test_swap_and_triangle(seed):
    f = random_function(seed)
    a, b = pair_draw(seed)
    ab, ba = pair_inner(f, a, b), pair_inner(f, b, a)
    assert abs(abs(ab.inner) - abs(ba.inner)) < 1e-10
    d = pair_distance(f, a, b).distance_sq
    da, db = self_distance(f, a).distance_sq, self_distance(f, b).distance_sq
    assert math.sqrt(d) <= math.sqrt(da) + math.sqrt(db) + 1e-7


def test_scaling():
    spec = ZeroProductSpec((0.3 + 0.5j,), 3, 1 / 3, 1.0)
    f = build_from_zeros(spec)
    g = build_from_zeros(ZeroProductSpec(spec.zeros, 3, 1 / 3, 2.5))
    a, b = FlipPoint(0.2, 0.6), FlipPoint(0.1, 0.7)
    for rf, rg in ((self_distance(f, a), self_distance(g, a)),
                   (pair_distance(f, a, b), pair_distance(g, a, b))):
        assert rg.distance_sq == pytest.approx(6.25 * rf.distance_sq, rel=1e-10)
        assert rg.optimal_phase == pytest.approx(rf.optimal_phase, abs=1e-12)


def test_distance_shrinks_along_halving_sequence():
    b = 0.3 + 0.9j
    f = planted_function(b)
    d = [pair_distance(f, b + 0.2 * 2.0 ** -k * (1 + 1j), b).distance_sq for k in range(8)]
    assert all(x > y for x, y in zip(d, d[1:]))
    assert d[-1] < 1e-3 * d[0]


def test_report_invariants_and_serialisation(zero3):
    rep = pair_distance(zero3, 0.5 + 0.5j, 0.6 + 0.4j)
    assert 0 <= rep.distance_sq <= 2 * rep.norm_sq
    assert rep.distance_sq == pytest.approx(2 * (rep.norm_sq - abs(rep.inner_value)))
    back = report_from_dict(json.loads(rep.to_json()))
    assert back == rep
    text = reports_to_csv([rep, self_distance(zero3, 1j)])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3 and lines[1].endswith(",ok")


def test_zero_inner_flag():
    rep = _report(0j, 1.0, FlipPoint(0, 1))
    assert rep.flag == "zero_inner"
    assert rep.distance_sq == 2.0 and rep.optimal_phase == 1
