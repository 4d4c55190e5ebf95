"""Zero flipping for Paley-Wiener functions with exact spectral distances.

Set ``ZEROFLIP_NUMBA=0`` before import to force the pure numpy kernels.
"""

from .errors import (
    ConstraintViolation,
    DivergenceError,
    DomainError,
    PoleError,
    ToleranceNotMet,
    ZeroFlipError,
)
from .kernels import HAVE_NUMBA, set_backend, use_backend
from .pwcore import FlipPoint, PWFunction, ZeroProductSpec, build_from_zeros, eval_time, l2_norm
from .spectra import (
    ExpPolySpectrum,
    PiecewisePolySpectrum,
    inner_product,
    omega2,
    weighted_norm,
)
from .flip import FlippedFunction, flip, flip_spectrum, flip_time, multiplier, strip_norm
from .stability import (
    StabilityReport,
    pair_distance,
    pair_inner,
    self_distance,
    time_oracle_inner,
)
from .bounds import BoundReport, region_classify, thm1_bound, thm2_bound
from .harness import SweepConfig, preset, verify

__version__ = "0.1.0"

__all__ = [
    "HAVE_NUMBA", "BoundReport", "ConstraintViolation", "DivergenceError",
    "DomainError", "ExpPolySpectrum", "FlipPoint", "FlippedFunction", "PWFunction",
    "PiecewisePolySpectrum", "PoleError", "StabilityReport", "SweepConfig", "ToleranceNotMet",
    "ZeroFlipError", "ZeroProductSpec", "build_from_zeros", "eval_time", "flip",
    "flip_spectrum", "flip_time", "inner_product", "l2_norm", "multiplier", "omega2",
    "pair_distance", "pair_inner", "preset", "region_classify", "self_distance",
    "set_backend", "strip_norm", "thm1_bound", "thm2_bound", "time_oracle_inner",
    "use_backend", "verify", "weighted_norm",
]
