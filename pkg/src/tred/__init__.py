"""Polynomial time-dependent reduced generators for projected linear dynamics."""
from .exceptions import (BreakdownError, ConfigError, DimensionError, NotHermitianError,
                         PositivityViolation, SeriesTruncationWarning)
from .propagation import (PropagatorSeries, Trajectory, build_E_terms, error_curve,
                          eval_series, exact_reduced, integrate_ltv, taylor_baseline)
from .reduction import (PolyGenerator, ProjectorFactorization, build_F_terms,
                        exact_tcl_oracle, norm_study)

__version__ = "0.1.0"

__all__ = [
    "BreakdownError", "ConfigError", "DimensionError", "NotHermitianError",
    "PositivityViolation", "SeriesTruncationWarning",
    "PropagatorSeries", "Trajectory", "build_E_terms", "error_curve", "eval_series",
    "exact_reduced", "integrate_ltv", "taylor_baseline",
    "PolyGenerator", "ProjectorFactorization", "build_F_terms", "exact_tcl_oracle",
    "norm_study",
]
