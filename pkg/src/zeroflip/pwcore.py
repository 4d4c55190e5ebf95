"""Paley-Wiener functions with prescribed complex zeros and exact spectra.

The test family is ``f(z) = A * prod_k (z - z_k) * (sin(c z) / (c z))**m``.
The sinc power has a B-spline spectrum, and multiplying by ``(z - z_k)``
acts on a spectrum as ``i d/dxi - z_k``, so every spectrum here is an exact
piecewise polynomial on the knots ``-m c + 2 c j``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConstraintViolation, DomainError
from .spectra import PiecewisePolySpectrum, norm, poly_derivative

SQRT_2PI = kernels.SQRT_2PI


@dataclass(frozen=True)
class FlipPoint:
    """A point ``a`` of the open upper half-plane."""

    re: float
    im: float

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise DomainError("flip point must be finite")
        if im <= 0:
            raise DomainError(f"flip point needs Im a > 0, got {im}")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_complex(cls, a) -> FlipPoint:
        a = complex(a)
        return cls(a.real, a.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def abs2(self) -> float:
        return self.re * self.re + self.im * self.im

    @property
    def beta(self) -> float:
        """Spectral shift ``2 Im a / |a|^2``."""
        return 2.0 * self.im / self.abs2

    @property
    def phase(self) -> complex:
        """``a / conj(a)``."""
        a = self.value
        return a / a.conjugate()

    def __complex__(self):
        return self.value


@dataclass(frozen=True)
class ZeroProductSpec:
    """Recipe for ``A * prod (z - z_k) * sinc(c z)**m``.

    ``amplitude=None`` means "normalise to unit L2 norm".
    """

    zeros: tuple = ()
    m: int = 2
    c: float = 0.5
    amplitude: complex | None = None

    def __post_init__(self):
        zeros = tuple(complex(z) for z in self.zeros)
        if not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in zeros):
            raise ConstraintViolation("zeros must be finite")
        object.__setattr__(self, "zeros", zeros)
        if int(self.m) != self.m:
            raise ConstraintViolation("m must be an integer")
        object.__setattr__(self, "m", int(self.m))
        c = float(self.c)
        if not (c > 0 and math.isfinite(c)):
            raise DomainError(f"factor scale c must be positive, got {self.c}")
        object.__setattr__(self, "c", c)
        if self.m < len(zeros) + 1:
            raise ConstraintViolation(
                f"m = {self.m} is too small for {len(zeros)} zeros (need m >= {len(zeros) + 1})")
        if self.amplitude is not None:
            amp = complex(self.amplitude)
            if amp == 0 or not math.isfinite(abs(amp)):
                raise ConstraintViolation("amplitude must be finite and nonzero")
            object.__setattr__(self, "amplitude", amp)

    @property
    def bandlimit(self) -> float:
        return self.m * self.c

    @property
    def decay_order(self) -> int:
        return self.m - len(self.zeros)

    def to_dict(self) -> dict:
        amp = None if self.amplitude is None else [self.amplitude.real, self.amplitude.imag]
        return {"zeros": [[z.real, z.imag] for z in self.zeros], "m": self.m, "c": self.c,
                "amplitude": amp}

    @classmethod
    def from_dict(cls, d: dict) -> ZeroProductSpec:
        amp = d.get("amplitude")
        return cls(zeros=tuple(complex(re, im) for re, im in d.get("zeros", [])),
                   m=d["m"], c=d["c"],
                   amplitude=None if amp is None else complex(amp[0], amp[1]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> ZeroProductSpec:
        return cls.from_dict(json.loads(text))

    @classmethod
    def with_bandlimit(cls, zeros, m: int, L: float, amplitude=None) -> ZeroProductSpec:
        return cls(tuple(zeros), m, L / m, amplitude)


@dataclass(frozen=True, eq=False)
class PWFunction:
    """A bandlimited function given by its piecewise polynomial spectrum.

    ``source`` and ``amplitude`` are set when the function came from
    :func:`build_from_zeros`; they enable direct product-formula evaluation,
    which is independent of the spectral path.
    """

    spectrum: PiecewisePolySpectrum
    decay_order: int = field(default=-1)
    source: ZeroProductSpec | None = None
    amplitude: complex = 1.0

    def __post_init__(self):
        if self.decay_order < 0:
            from .quadrature import decay_constant

            object.__setattr__(self, "decay_order", decay_constant(self.spectrum)[0])

    @property
    def bandlimit(self) -> float:
        return float(self.spectrum.bandlimit)

    @property
    def zeros(self) -> tuple:
        return () if self.source is None else self.source.zeros

    def __call__(self, z):
        return eval_time(self, z)

    def eval_product(self, z):
        """Evaluate the product formula directly (requires ``source``)."""
        if self.source is None:
            raise ValueError("product formula needs a ZeroProductSpec source")
        z = np.asarray(z, dtype=complex)
        s = self.source
        out = np.full(z.shape, self.amplitude, dtype=complex)
        for zk in s.zeros:
            out *= z - zk
        return out * _sinc(s.c * z) ** s.m

    def eval_fast(self, z):
        """Product formula when available, otherwise spectral inversion."""
        if self.source is not None:
            return self.eval_product(z)
        return eval_time(self, z)

    def derivative(self) -> PWFunction:
        """``f'`` (spectrum multiplied by ``i xi``)."""
        sp = self.spectrum
        local = np.asarray(sp.coef)
        shifted = np.zeros((local.shape[0], local.shape[1] + 1), dtype=complex)
        shifted[:, 1:] = local
        shifted[:, :-1] += sp.breaks[:-1, None] * local
        return PWFunction(PiecewisePolySpectrum(sp.breaks, 1j * shifted, bandlimit=sp.bandlimit),
                          max(self.decay_order - 1, 0))

    def norm(self) -> float:
        return l2_norm(self)

    @classmethod
    def from_spectrum(cls, breaks, coef, bandlimit=None) -> PWFunction:
        return cls(PiecewisePolySpectrum(breaks, coef, bandlimit=bandlimit))


def _sinc(w):
    # sin(w)/w with the removable singularity filled in
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-4
    safe = np.where(small, 1.0, w)
    w2 = w * w
    return np.where(small, 1.0 - w2 / 6.0 + w2 * w2 / 120.0, np.sin(safe) / safe)


def bspline_spectrum(m: int, c: float) -> PiecewisePolySpectrum:
    """Spectrum of ``(sin(c z)/(c z))**m``.

    It is the m-fold convolution of the indicator of ``[-c, c]``, scaled by
    ``(sqrt(pi/2)/c)**m / sqrt(2 pi)**(m-1)``.
    """
    if m < 1:
        raise ConstraintViolation("m must be at least 1")
    h = 2.0 * c
    pieces = np.ones((1, 1), dtype=float)
    for _ in range(m - 1):
        k, deg1 = pieces.shape
        anti = np.zeros((k, deg1 + 1))
        anti[:, 1:] = pieces / np.arange(1, deg1 + 1)
        mass = np.sum(anti * h ** np.arange(deg1 + 1), axis=1)
        new = np.zeros((k + 1, deg1 + 1))
        new[:k] += anti
        new[1:] -= anti
        new[1:, 0] += mass
        pieces = new
    scale = (math.sqrt(math.pi / 2.0) / c) ** m / SQRT_2PI ** (m - 1)
    breaks = -m * c + h * np.arange(m + 1)
    return PiecewisePolySpectrum(breaks, pieces * scale, bandlimit=m * c)


def apply_zero(spectrum: PiecewisePolySpectrum, zk: complex) -> PiecewisePolySpectrum:
    """Spectrum of ``(z - zk) f(z)`` given that of ``f``."""
    coef = 1j * poly_derivative(spectrum.coef) - complex(zk) * np.asarray(spectrum.coef)
    return PiecewisePolySpectrum(spectrum.breaks, coef, bandlimit=spectrum.bandlimit)


def build_from_zeros(spec: ZeroProductSpec) -> PWFunction:
    """Construct ``f`` with the zeros of ``spec`` and an exact spectrum."""
    sp = bspline_spectrum(spec.m, spec.c)
    deg = len(spec.zeros)
    if deg:
        sp = PiecewisePolySpectrum(sp.breaks, np.pad(sp.coef, ((0, 0), (0, deg))),
                                   bandlimit=sp.bandlimit)
    for zk in spec.zeros:
        sp = apply_zero(sp, zk)
    if spec.amplitude is None:
        amp = 1.0 / norm(sp)
    else:
        amp = spec.amplitude
    sp = sp.scaled(amp)
    return PWFunction(sp, spec.decay_order, spec, complex(amp))


def eval_time(f, z):
    """``(1/sqrt(2 pi)) int f^(xi) exp(i z xi) dxi`` in closed form, any complex ``z``."""
    sp = f.spectrum if isinstance(f, PWFunction) else f
    z = np.asarray(z, dtype=complex)
    out = kernels.invert_piecewise_poly(sp.breaks, np.asarray(sp.coef), z.ravel())
    out = out.reshape(z.shape)
    return out[()] if out.ndim == 0 else out


def l2_norm(f) -> float:
    """``||f||_2`` via Parseval on the spectrum."""
    sp = f.spectrum if isinstance(f, PWFunction) else f
    return norm(sp)
