"""Spectral expansions in Laguerre, Hermite and spherical-harmonic bases with
ultradifferentiable weight envelopes, and an exact diagonal solver."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: F401
from .weights import (  # noqa: F401
    AssociatedFunction,
    ConditionReport,
    ConditionVerdict,
    HorizonLimitedWarning,
    WeightError,
    WeightSequence,
    assoc_eval,
    assoc_inverse_envelope,
    check_conditions,
    make_weight,
)
from .indexing import (  # noqa: F401
    laguerre_nu,
    level_count,
    linear_to_multi,
    multi_to_linear,
)
