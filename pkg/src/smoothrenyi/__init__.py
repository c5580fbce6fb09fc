"""Smooth Renyi entropies and divergences on finite alphabets, with one-shot source coding schemes."""
from .errors import (
    AlphabetMismatchError,
    ParameterError,
    ResourceError,
    SmoothRenyiError,
    SupportError,
    ValidationError,
)
from .prob import FiniteDist, JointDist, Kernel, SubWeighting, load_dist
from .smooth import (
    d_inf,
    h0,
    h0_cond,
    i_inf,
    max_distortion_quantile,
    smooth_d_inf,
    smooth_h0,
    smooth_h0_cond,
    smooth_i_inf,
    sw_truncation,
)

__version__ = "0.1.0"

__all__ = [
    "AlphabetMismatchError",
    "FiniteDist",
    "JointDist",
    "Kernel",
    "ParameterError",
    "ResourceError",
    "SmoothRenyiError",
    "SubWeighting",
    "SupportError",
    "ValidationError",
    "d_inf",
    "h0",
    "h0_cond",
    "i_inf",
    "load_dist",
    "max_distortion_quantile",
    "smooth_d_inf",
    "smooth_h0",
    "smooth_h0_cond",
    "smooth_i_inf",
    "sw_truncation",
]
