"""Coefficient tensors, expansions and coefficient-level diagnostics."""

from .tensor import ZERO_THRESHOLD, CoefficientTensor, TensorError  # noqa: F401
from .transform import expand, synthesize  # noqa: F401
from .decay import (  # noqa: F401
    DUAL_LIKE,
    INDETERMINATE,
    TEST_FUNCTION_LIKE,
    DecayFit,
    classify_decay,
)
from .hankel import hankel_clifford  # noqa: F401
from .polydisc import (  # noqa: F401
    DerivativeBoundFit,
    PolydiscValue,
    TailCertificate,
    TailNotCertified,
    difference_coefficients,
    fit_derivative_bounds,
    polydisc_eval,
    reconstruct_coefficients,
)
from .seminorm import estimate_g_seminorm, g_seminorm_terms  # noqa: F401
