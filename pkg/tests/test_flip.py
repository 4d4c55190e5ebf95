import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from conftest import random_function, random_point
from zeroflip.errors import DomainError, PoleError, ToleranceNotMet
from zeroflip.flip import (
    flip,
    flip_spectrum,
    flip_time,
    gamma_kernel,
    is_genuine_zero,
    left_tail_amplitude,
    multiplier,
    slice_norm_sq,
    slice_norm_sq_spectral,
    strip_norm,
    time_norm,
    time_rule,
)
from zeroflip.harness import planted_function, spectrum_sup_outside
from zeroflip.pwcore import FlipPoint, PWFunction, eval_time, l2_norm
from zeroflip.spectra import conjugate, inverse_transform, norm, reflect

SQRT_2PI = math.sqrt(2 * math.pi)


def unsimplified(a: complex, x):
    ab = a.conjugate()
    return (1 - x / ab) / (1 - x / a) * np.exp(x / ab - x / a)


def test_multiplier_at_origin():
    assert multiplier(0.3 + 0.4j, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_multiplier_frozen_value():
    # mpmath evaluation of the unsimplified product form at a = i, x = 1
    ref = 0.9092974268256816954 + 0.416146836547142387j
    assert abs(multiplier(1j, 1.0) - ref) < 1e-14


@given(st.integers(0, 10 ** 6))
def test_multiplier_unimodular(seed):
    rng = np.random.default_rng(seed)
    a = complex(rng.uniform(-3, 3), rng.uniform(0.05, 3))
    x = rng.uniform(-50, 50, 200)
    u = multiplier(a, x)
    assert np.max(np.abs(np.abs(u) - 1)) < 1e-14
    np.testing.assert_allclose(u, unsimplified(a, x), rtol=1e-12)


def test_flip_time_real_axis_modulus():
    f = random_function(21)
    a = random_point(21)
    x = np.linspace(-30, 30, 1000)
    fx = np.abs(eval_time(f, x))
    dev = np.max(np.abs(np.abs(flip_time(f, a, x)) - fx))
    assert dev < 1e-10 * np.max(fx)


def test_flip_moves_zero_to_conjugate(planted):
    a = 0.4 + 0.9j
    assert is_genuine_zero(planted, a)
    assert abs(flip_time(planted, a, a.conjugate())) < 1e-10 * l2_norm(planted)
    # removable singularity at a itself
    val = flip_time(planted, a, a)
    near = flip_time(planted, a, a + 1e-6)
    assert abs(val - near) < 1e-5 * abs(val)


def test_pole_when_not_a_zero(triangle):
    with pytest.raises(PoleError):
        flip_time(triangle, 0.5 + 0.5j, 0.5 + 0.5j)
    z = 0.3 + 0.2j
    assert np.isfinite(flip_time(triangle, 0.5 + 0.5j, z))


def test_gamma_kernel():
    g = gamma_kernel(1j)
    assert g.transform(0.0) == pytest.approx(-1j)
    a = 0.3 + 0.8j
    k = gamma_kernel(a)
    assert k.l1_norm == pytest.approx(SQRT_2PI / a.imag)
    l1 = integrate.quad(lambda x: abs(k(np.array([x]))[0]), 0, np.inf)[0]
    assert l1 == pytest.approx(k.l1_norm, rel=1e-9)
    for w in (-1.0, 0.2, 2.5):
        re = integrate.quad(lambda x: (k(np.array([x]))[0] * cmath.exp(-1j * w * x)).real,
                            0, 60, limit=500)[0]
        im = integrate.quad(lambda x: (k(np.array([x]))[0] * cmath.exp(-1j * w * x)).imag,
                            0, 60, limit=500)[0]
        assert complex(re, im) / SQRT_2PI == pytest.approx(k.transform(w), rel=1e-8)


def test_spectrum_vanishes_right_of_support():
    f = random_function(31)
    a = FlipPoint.from_complex(random_point(31))
    S = flip_spectrum(f, a)
    xs = a.beta + f.bandlimit + np.array([1e-9, 0.1, 3.0, 40.0])
    assert np.all(S(xs) == 0)


@given(st.integers(0, 10 ** 6))
def test_norm_preservation(seed):
    f = random_function(seed)
    a = random_point(seed)
    nrm = l2_norm(f)
    assert abs(norm(flip_spectrum(f, a)) - nrm) < 1e-8 * nrm


def test_spectrum_inverts_to_time_values():
    f = random_function(41)
    a = 0.6 + 0.7j
    S = flip_spectrum(f, a)
    z = np.array([-3.0, -0.4, 0.0, 1.3, 7.5, 0.2 + 0.3j, -1 - 0.5j])
    np.testing.assert_allclose(inverse_transform(S, z), flip_time(f, a, z), rtol=1e-10, atol=1e-13)


def test_discrete_transform_converges():
    f = random_function(42)
    a = FlipPoint(-0.3, 0.9)
    xi = np.array([-1.5, -0.3, 0.8, 2.0]) + a.beta
    exact = flip_spectrum(f, a)(xi)
    errs = []
    for X in (40.0, 80.0, 160.0):
        x, w, _ = time_rule(f, [a], tol=1e-12)
        keep = np.abs(x) <= X
        vals = flip_time(f, a, x[keep]) * w[keep]
        approx = (vals[None, :] * np.exp(-1j * np.outer(xi, x[keep]))).sum(1) / SQRT_2PI
        errs.append(np.max(np.abs(approx - exact)))
    assert errs[-1] < errs[0] and errs[-1] < 1e-3


def test_left_tail_against_semi_infinite_quadrature():
    f = random_function(51)
    a = FlipPoint(0.35, 0.6)
    L = f.bandlimit
    S = flip_spectrum(f, a)
    spec = f.spectrum

    def direct(x):
        # a/conj(a) [f^(x - beta) - 2 Im a int_0^inf exp(i a s) f^(x - beta + s) ds]
        u = x - a.beta
        lo, hi = max(0.0, -L - u), L - u
        pts = [p - u for p in spec.breaks if lo < p - u < hi]
        fn = lambda s: cmath.exp(1j * a.value * s) * spec(np.array([u + s]))[0]  # noqa: E731
        re = integrate.quad(lambda s: fn(s).real, lo, hi, points=pts or None, epsabs=1e-13)[0]
        im = integrate.quad(lambda s: fn(s).imag, lo, hi, points=pts or None, epsabs=1e-13)[0]
        return a.phase * (spec(np.array([u]))[0] - 2 * a.im * complex(re, im))

    xs = np.linspace(a.beta - L - 6.0, a.beta + L - 1e-3, 20)
    for x in xs:
        assert abs(S(np.array([x]))[0] - direct(x)) < 1e-10
    cutoff = a.beta - L
    amp = left_tail_amplitude(f, a)
    assert abs(S(np.array([cutoff - 1e-12]))[0] - amp) < 1e-9 * max(1.0, abs(amp))
    ref = -a.phase * 2 * a.im * SQRT_2PI * eval_time(f, a.value) * cmath.exp(1j * a.value * L)
    assert abs(amp - ref) < 1e-12


@given(st.integers(0, 10 ** 6))
def test_tail_vanishes_iff_zero(seed):
    rng = np.random.default_rng(seed)
    a = complex(rng.uniform(-1.5, 1.5), rng.uniform(0.2, 1.5))
    f = planted_function(a)
    g = random_function(seed)
    assert abs(left_tail_amplitude(f, a)) < 1e-9
    assert is_genuine_zero(f, a)
    assert (abs(left_tail_amplitude(g, a)) < 1e-9) == is_genuine_zero(g, a)


@given(st.integers(0, 10 ** 6))
def test_genuine_zero_flip_lives_on_shifted_band(seed):
    rng = np.random.default_rng(seed)
    a = FlipPoint(rng.uniform(-1.5, 1.5), rng.uniform(0.2, 1.5))
    f = planted_function(a.value)
    L = f.bandlimit
    S = flip_spectrum(f, a)
    sup = spectrum_sup_outside(S, -L + a.beta - 1e-6, L + a.beta + 1e-6)
    assert sup < 1e-8 * l2_norm(f)


def test_conjugation_symmetry():
    f = random_function(61)
    a = 0.7 + 0.4j
    # fbar(z) = conj(f(conj z)) has spectrum conj(f^(-xi))
    fbar = PWFunction(reflect(conjugate(f.spectrum)))
    x = np.linspace(-8, 8, 97)
    lhs = unsimplified(a.conjugate(), x) * eval_time(f, x)
    rhs = np.conj(flip_time(fbar, a, x))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-14)


def test_strip_norm_domain(triangle):
    with pytest.raises(DomainError):
        strip_norm(triangle, 0.5j, 0.5)
    with pytest.raises(DomainError):
        strip_norm(triangle, 0.5j, 0.0)


def test_strip_norm_small_lambda_is_plain_norm(zero3):
    a = 0.5 + 1.0j
    assert strip_norm(zero3, a, 1e-6) == pytest.approx(l2_norm(zero3), rel=1e-5)


def test_strip_norm_refinement_and_bound():
    f = random_function(71)
    a, lam = 2j, 1.0
    coarse = strip_norm(f, a, lam)
    dense = strip_norm(f, a, lam, grid=128, refine=1)
    assert coarse == pytest.approx(dense, rel=1e-4)
    y = a.imag
    rhs = (1 + 2 * y / (y - lam)) * math.exp(2 * y * y / abs(a) ** 2) * math.exp(
        f.bandlimit * lam) * l2_norm(f)
    assert coarse < rhs


def test_strip_quadrature_matches_spectral(planted):
    a = -0.2 + 0.8j
    for y in (-0.5, 0.0, 0.3):
        q = slice_norm_sq(planted, a, y)
        assert q == pytest.approx(slice_norm_sq_spectral(planted, a, y), rel=1e-8)
    assert strip_norm(planted, a, 0.4, method="spectral") == pytest.approx(
        strip_norm(planted, a, 0.4), rel=1e-8)


def test_time_quadrature_needs_decay(sinc):
    with pytest.raises(ToleranceNotMet):
        time_rule(sinc, [1j])


def test_time_norm_agrees(zero3):
    assert time_norm(zero3, 0.3 + 0.6j) == pytest.approx(1.0, rel=1e-8)
    assert time_norm(zero3, 0.3 + 0.6j, refine=1) == pytest.approx(1.0, rel=1e-8)


def test_flipped_function_object(planted):
    F = flip(planted, 1 + 0.5j)
    assert F.spectrum is F.spectrum
    assert F.norm() == pytest.approx(1.0, rel=1e-12)
    text = F.spectrum_csv(np.array([-3.0, 0.0, 9.0]))
    lines = text.splitlines()
    assert lines[0] == "xi,re,im,piece_index"
    assert len(lines) == 4 and lines[-1].endswith(str(F.spectrum.n_pieces))
