"""Diagonal solver: symbols, resonance sets, division and small-divisor scans."""

from .exact import Interval, Surd, parse_coefficient  # noqa: F401
from .operator import (  # noqa: F401
    Factor,
    OperatorError,
    OperatorSpec,
    SymbolValue,
    forward_apply,
    symbol,
)
from .resonance import (  # noqa: F401
    ResolutionInsufficient,
    ResonanceReport,
    SolveReport,
    resonance_scan,
    solve,
)
from .liouville import LiouvilleReport, adversarial_c3, liouville_scan  # noqa: F401
from .growth import GrowthVerdict, assess_growth_conditions  # noqa: F401
