"""Top-level rounding entry points.

``round_matrix`` handles dyadic matrices in [0, 1): pad with one row and
one column so every line sum is an integer, round the padded matrix bit by
bit, drop the padding. Padding makes the error of every full line zero, so
the error of the whole original block equals minus the error of the corner
cell, which is below 1.

``round_general`` reduces arbitrary non-negative rationals to that case
(integer part plus rounded fractional part), and ``controlled_table``
rounds a table to multiples of a base with totals recomputed from the
rounded cells.
"""

from __future__ import annotations

import logging
import secrets
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bitwise import round_bitwise
from .errors import BoundViolation, DomainError, InvariantError
from .fixedpoint import (
    INT64_SAFE,
    DyadicMatrix,
    RationalMatrix,
    int_array,
    natural_bits,
    quantize_matrix,
    split_integer_fraction,
)
from .halfint import ColorPolicy
from .report import Bound, ErrorReport, error_report

__all__ = [
    "RoundingOptions",
    "RoundingResult",
    "ControlledTable",
    "pad_to_integral_sums",
    "round_matrix",
    "round_general",
    "controlled_table",
    "default_bits",
    "quantized_limits",
]

logger = logging.getLogger(__name__)

MODES = ("deterministic", "unbiased")


@dataclass
class RoundingOptions:
    """``bits=None`` means: natural bit length for dyadic input, else :func:`default_bits`."""

    bits: int | None = None
    mode: str = "deterministic"
    seed: int | None = None
    base: int = 1
    verify: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.bits is not None and self.bits < 1:
            raise ValueError("bits must be >= 1")
        if int(self.base) != self.base or self.base < 1:
            raise ValueError("base must be a positive integer")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(eq=False)
class RoundingResult:
    y: np.ndarray
    mode: str
    seed: int | None
    bits: int
    certificate: ErrorReport
    timing: dict = field(default_factory=dict)
    quantized: bool = False
    attempt: int = 0


@dataclass(eq=False)
class ControlledTable:
    """Rounded inner cells (multiples of ``base``) and their exact totals."""

    inner: np.ndarray
    row_totals: np.ndarray
    col_totals: np.ndarray
    grand_total: int
    base: int
    result: RoundingResult

    def as_array(self) -> np.ndarray:
        """(m+1) x (n+1) table with row totals last column, column totals last row."""
        m, n = self.inner.shape
        out = np.zeros((m + 1, n + 1), dtype=self.inner.dtype)
        out[:m, :n] = self.inner
        out[:m, n] = self.row_totals
        out[m, :n] = self.col_totals
        out[m, n] = self.grand_total
        return out


def default_bits(m: int, n: int) -> int:
    """Smallest l with l > log2(4 m n max(m, n))."""
    return int(4 * m * n * max(m, n)).bit_length()


def _seed_for(opts: RoundingOptions) -> int | None:
    if opts.mode != "unbiased":
        return None
    if opts.seed is None:
        return secrets.randbits(64)
    return opts.seed


def _policy(mode: str, seed: int | None, rng=None) -> ColorPolicy:
    if mode == "unbiased":
        return ColorPolicy.randomized(rng if rng is not None else np.random.default_rng(seed))
    return ColorPolicy.canonical()


def pad_to_integral_sums(x: DyadicMatrix) -> DyadicMatrix:
    """Append a row and a column holding each line's deficit to the next integer.

    The corner is computed both from the padding column and from the
    padding row; the two must agree.
    """
    if not x.unit_range:
        raise DomainError("padding needs entries in [0, 1)")
    m, n = x.shape
    scale = 1 << x.scale_bits
    num = x.numerators
    if num.dtype != object and (max(m, n) + 1) * scale >= INT64_SAFE:
        num = num.astype(object)
    pad_row = (-num.sum(axis=0)) % scale
    pad_col = (-num.sum(axis=1)) % scale
    corner = (-int(pad_col.sum())) % scale
    if corner != (-int(pad_row.sum())) % scale:
        raise InvariantError("padding corner formulas disagree")
    out = np.empty((m + 1, n + 1), dtype=num.dtype)
    out[:m, :n] = num
    out[m, :n] = pad_row
    out[:m, n] = pad_col
    out[m, n] = corner
    return DyadicMatrix(out, x.scale_bits)


def _round_unit(x: DyadicMatrix, policy: ColorPolicy) -> np.ndarray:
    """Pad, round bitwise, strip. No certification."""
    m, n = x.shape
    padded = pad_to_integral_sums(x)
    y = round_bitwise(padded, policy)
    return y[:m, :n]


def _check(cert: ErrorReport, what: str):
    if not cert.passed:
        failed = [v for v in cert.verdicts if not v.passed]
        raise BoundViolation(f"{what}: " + "; ".join(str(v) for v in failed), failed)


def round_matrix(x: DyadicMatrix, opts: RoundingOptions | None = None) -> RoundingResult:
    """Round a dyadic matrix in [0, 1) to 0/1 with all initial-interval errors < 1.

    The grand-total error is below 1 as well. In unbiased mode every entry,
    every initial-interval sum and the grand total are randomized roundings
    of their exact values.
    """
    opts = opts or RoundingOptions()
    if not x.unit_range:
        raise DomainError("round_matrix needs entries in [0, 1); use round_general")
    bits = max(1, x.scale_bits)
    if opts.bits is not None:
        if opts.bits < x.scale_bits:
            raise DomainError(f"matrix has {x.scale_bits} bits, options ask for {opts.bits}")
        bits = opts.bits
    if bits != x.scale_bits:
        x = x.with_bits(bits)
    seed = _seed_for(opts)
    policy = _policy(opts.mode, seed)

    timing = {}
    t0 = time.perf_counter()
    y = _round_unit(x, policy).astype(np.int64)
    t1 = time.perf_counter()
    cert = error_report(x, y)
    t2 = time.perf_counter()
    timing.update(round=t1 - t0, report=t2 - t1)
    if opts.verify:
        _check(cert, "round_matrix")
    return RoundingResult(y, opts.mode, seed, bits, cert, timing)


def quantized_limits(m: int, n: int, bits: int) -> dict[str, Bound]:
    """Bounds against the unquantized input after per-entry quantization to ``bits``.

    Each entry moves by less than u = 2**-bits, and the rounded error of a
    prefix is a multiple of u of size at most 1 - u, so a prefix of length
    b stays below 1 + (b - 1) u.
    """
    u = Fraction(1, 1 << bits)
    return {
        "initial_row": Bound(1 + (n - 1) * u),
        "initial_col": Bound(1 + (m - 1) * u),
        "grand_total": Bound(1 + (m * n - 1) * u),
        "arbitrary_row": Bound(2 + (n - 2) * u),
        "arbitrary_col": Bound(2 + (m - 2) * u),
    }


def _as_rational(values) -> RationalMatrix:
    if isinstance(values, RationalMatrix):
        return values
    if isinstance(values, DyadicMatrix):
        return values.to_rational()
    return RationalMatrix.from_fractions(values)


def round_general(values, opts: RoundingOptions | None = None) -> RoundingResult:
    """Round a non-negative rational matrix to integers.

    Integer parts pass through; fractional parts go through the padded
    bitwise rounding. Fractional parts that are not exactly representable
    with the requested bits are quantized first: unbiased residual rounding
    in unbiased mode, truncation in deterministic mode.

    Unbiased mode then only guarantees :func:`quantized_limits` against the
    unquantized input. Deterministic mode searches for a coloring whose
    result meets the strict bounds against the exact input: the canonical
    coloring first, then up to ``SEARCH_ATTEMPTS`` fixed-seed randomized
    colorings. Under a randomized coloring a truncated prefix sum s_q
    misses its strict bound with probability below s - s_q < b 2**-bits,
    so with the default bit count each attempt fails with probability
    below 3/4. If every attempt fails the canonical result is returned,
    certified against :func:`quantized_limits`.
    """
    opts = opts or RoundingOptions()
    rm = _as_rational(values)
    m, n = rm.shape
    whole, frac = split_integer_fraction(rm)
    natural = natural_bits(frac)
    seed = _seed_for(opts)
    rng = np.random.default_rng(seed) if opts.mode == "unbiased" else None

    timing = {}
    t0 = time.perf_counter()
    quantized = natural is None or (opts.bits is not None and opts.bits < natural)
    if quantized:
        bits = opts.bits or default_bits(m, n)
        qmode = "unbiased" if opts.mode == "unbiased" else "truncate"
        x = quantize_matrix(frac, bits, qmode, rng)
        if not x.unit_range:
            # unbiased round-up to exactly 1 moves into the integer part
            carry = x.numerators >> bits
            whole = whole + carry
            x = DyadicMatrix(x.numerators - (carry << bits), bits)
    else:
        bits = max(1, natural, opts.bits or 0)
        x = DyadicMatrix.from_rational(frac, bits)
    whole = int_array(whole, INT64_SAFE)
    t1 = time.perf_counter()

    attempt = 0
    if quantized and opts.mode == "deterministic":
        y, cert, attempt = _search_strict(rm, whole, x)
    else:
        y = whole + _round_unit(x, _policy(opts.mode, seed, rng)).astype(np.int64)
        cert = error_report(rm, y, quantized_limits(m, n, bits) if quantized else None)
    t2 = time.perf_counter()
    timing.update(quantize=t1 - t0, round=t2 - t1)
    if opts.verify:
        _check(cert, "round_general")
    return RoundingResult(y, opts.mode, seed, bits, cert, timing, quantized, attempt)


SEARCH_ATTEMPTS = 64
# fixed entropy for the deterministic coloring search, so results are reproducible
_SEARCH_TAG = 0x6D6174726F756E64


def _search_strict(rm: RationalMatrix, whole: np.ndarray, x: DyadicMatrix):
    """Deterministic search for a rounding certified strictly against ``rm``.

    Returns ``(y, certificate, attempt)``; attempt 0 is the canonical
    coloring, ``-1`` marks the fallback.
    """
    first = None
    for attempt in range(SEARCH_ATTEMPTS + 1):
        if attempt == 0:
            policy = ColorPolicy.canonical()
        else:
            policy = ColorPolicy.randomized(np.random.default_rng([_SEARCH_TAG, attempt]))
        y = whole + _round_unit(x, policy).astype(np.int64)
        cert = error_report(rm, y)
        if cert.passed:
            if attempt:
                logger.debug("strict bounds met at coloring attempt %d", attempt)
            return y, cert, attempt
        if first is None:
            first = y
    m, n = rm.shape
    logger.warning("no coloring met the strict bounds; falling back to quantization bounds")
    return first, error_report(rm, first, quantized_limits(m, n, x.scale_bits)), -1


def controlled_table(table, base: int = 1, opts: RoundingOptions | None = None) -> ControlledTable:
    """Round a non-negative table to multiples of ``base`` with additive totals.

    Cells are divided by ``base``, rounded with :func:`round_general` and
    scaled back. Row, column and grand totals are sums of the rounded
    cells, so the table is additive by construction, and each total is
    within ``base`` of the original total.
    """
    opts = opts or RoundingOptions(base=base)
    if int(base) != base or base < 1:
        raise ValueError("base must be a positive integer")
    base = int(base)
    rm = _as_rational(table)
    scaled = RationalMatrix(rm.numerators, rm.denominator * base)
    result = round_general(scaled, opts)
    inner = result.y * base
    return ControlledTable(
        inner=inner,
        row_totals=inner.sum(axis=1),
        col_totals=inner.sum(axis=0),
        grand_total=int(inner.sum()),
        base=base,
        result=result,
    )
