"""Exact rounding of real matrices with bounded row and column interval errors."""

from .bitwise import round_bitwise
from .errors import BoundViolation, DomainError, InvariantError, ParseError, RoundingError
from .fixedpoint import DyadicMatrix, RationalMatrix, parse_decimal, quantize, quantize_matrix
from .halfint import ColorPolicy, HalfLayer, build_aux_graph, round_half_layer
from .oracle import FeasibleSet, TrialStats, enumerate_roundings, estimate_distribution
from .pipeline import (
    ControlledTable,
    RoundingOptions,
    RoundingResult,
    controlled_table,
    default_bits,
    pad_to_integral_sums,
    round_general,
    round_matrix,
)
from .report import DEFAULT_LIMITS, Bound, ErrorReport, error_report, verify_bounds

__version__ = "0.1.0"
