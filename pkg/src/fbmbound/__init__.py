"""Trajectory-based generalization bounds for SGD modelled as fBm-driven dynamics."""

from .bounds import BoundInputs, BoundReport, full_bound, rademacher_bound
from .enclosing_ball import Ball, exact_ball_welzl, miniball_core_set
from .errors import (
    DomainError,
    EstimationError,
    FbmBoundError,
    FormatError,
    IntegrationError,
    InternalError,
    NumericalError,
    TrainingDivergence,
    UnsupportedDimensionError,
)
from .fbm import FbmPath, sample_fbm_multi, sample_fgn
from .fractal_dim import estimate_boxdim
from .hurst import SeriesMatrix, estimate_hurst_from_vectors, estimate_hurst_rs

__version__ = "0.1.0"
