"""Exact dyadic fixed-point values and quantization of rationals.

Everything here is integer arithmetic. A rational matrix is held as an
integer numerator array over one shared denominator; a dyadic matrix is the
special case where that denominator is ``2**scale_bits``. Numerator arrays
use ``int64`` when the magnitudes leave headroom and fall back to ``object``
arrays of Python ints otherwise.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Dyadic",
    "DyadicMatrix",
    "RationalMatrix",
    "parse_decimal",
    "format_exact",
    "quantize",
    "quantize_matrix",
    "split_integer_fraction",
    "natural_bits",
    "int_array",
]

# int64 arrays are only used while every value stays below this
INT64_SAFE = 1 << 62

_DECIMAL = re.compile(r"^\s*([+-]?)(\d+(?:\.\d*)?|\.\d+)(?:[eE]([+-]?\d+))?\s*$")


def int_array(values, max_abs: int | None = None) -> np.ndarray:
    """Integer array, ``int64`` if ``max_abs`` leaves headroom, else ``object``."""
    arr = np.asarray(values)
    if arr.dtype == object:
        if max_abs is None:
            max_abs = max((abs(int(v)) for v in arr.flat), default=0)
        if max_abs < INT64_SAFE:
            return arr.astype(np.int64)
        return np.vectorize(int, otypes=[object])(arr) if arr.size else arr
    if not np.issubdtype(arr.dtype, np.integer):
        raise TypeError(f"expected integers, got {arr.dtype}")
    if max_abs is not None and max_abs >= INT64_SAFE:
        return arr.astype(object)
    return arr.astype(np.int64)


def parse_decimal(text: str, row: int | None = None, col: int | None = None) -> Fraction:
    """Parse a non-negative decimal literal exactly.

    ``row``/``col`` are 1-based and only used to label errors.

    >>> parse_decimal("0.3")
    Fraction(3, 10)
    """
    match = _DECIMAL.match(text)
    if match is None:
        raise ParseError(f"malformed decimal literal {text!r}", row, col)
    sign, digits, exponent = match.groups()
    whole, _, frac = digits.partition(".")
    value = Fraction(int((whole or "0") + frac), 10 ** len(frac))
    if exponent:
        value *= Fraction(10) ** int(exponent)
    if sign == "-" and value != 0:
        raise DomainError(f"negative value {text.strip()!r} not allowed", row, col)
    return value


def format_exact(value: Fraction | int) -> str:
    """Decimal string for values whose denominator is 2^a 5^b, else ``p/q``."""
    value = Fraction(value)
    num, den = value.numerator, value.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    digits = max(twos, fives)
    if digits == 0:
        return str(num)
    scaled = num * 10**digits // den
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")


@dataclass(frozen=True)
class Dyadic:
    """Non-negative dyadic rational ``numerator / 2**scale_bits``."""

    numerator: int
    scale_bits: int

    def __post_init__(self):
        if self.numerator < 0 or self.scale_bits < 0:
            raise DomainError(f"invalid dyadic {self.numerator}/2^{self.scale_bits}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.scale_bits)

    def __str__(self):
        return format_exact(self.value)


@dataclass(frozen=True, eq=False)
class RationalMatrix:
    """Non-negative rational matrix ``numerators / denominator``."""

    numerators: np.ndarray
    denominator: int

    def __post_init__(self):
        num = self.numerators
        if num.ndim != 2 or num.shape[0] < 1 or num.shape[1] < 1:
            raise DomainError(f"matrix must be 2-D and non-empty, got shape {num.shape}")
        if self.denominator < 1:
            raise DomainError("denominator must be positive")
        if num.size and (num < 0).any():
            i, j = np.argwhere(num < 0)[0]
            raise DomainError("negative entry", int(i) + 1, int(j) + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.numerators.shape

    @classmethod
    def from_fractions(cls, rows: Iterable[Sequence]) -> "RationalMatrix":
        values = [[Fraction(v) for v in row] for row in rows]
        if not values or len({len(r) for r in values}) != 1:
            raise DomainError("rows must be non-empty and of equal length")
        den = 1
        for row in values:
            for v in row:
                den = math.lcm(den, v.denominator)
        nums = [[v.numerator * (den // v.denominator) for v in row] for row in values]
        top = max(abs(v) for row in nums for v in row)
        return cls(int_array(np.array(nums, dtype=object), top), den)

    def to_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.denominator) for v in row] for row in self.numerators]

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix) or self.shape != other.shape:
            return NotImplemented
        return self.to_fractions() == other.to_fractions()


@dataclass(frozen=True, eq=False)
class DyadicMatrix:
    """m x n matrix of ``numerators / 2**scale_bits``.

    With ``unit_range`` set (the default) every value must lie in [0, 1),
    i.e. every numerator in ``[0, 2**scale_bits)``.
    """

    numerators: np.ndarray
    scale_bits: int
    unit_range: bool = True

    def __post_init__(self):
        num = self.numerators
        if num.ndim != 2 or num.shape[0] < 1 or num.shape[1] < 1:
            raise DomainError(f"matrix must be 2-D and non-empty, got shape {num.shape}")
        if self.scale_bits < 0:
            raise DomainError("scale_bits must be >= 0")
        if (num < 0).any():
            i, j = np.argwhere(num < 0)[0]
            raise DomainError("negative entry", int(i) + 1, int(j) + 1)
        if self.unit_range:
            over = num >= (1 << self.scale_bits)
            if over.any():
                i, j = np.argwhere(over)[0]
                raise DomainError("entry outside [0, 1)", int(i) + 1, int(j) + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.numerators.shape

    @property
    def denominator(self) -> int:
        return 1 << self.scale_bits

    @classmethod
    def from_numerators(cls, numerators, scale_bits: int, unit_range: bool = True):
        top = (1 << scale_bits) if unit_range else None
        return cls(int_array(numerators, top), scale_bits, unit_range)

    @classmethod
    def from_fractions(cls, rows, scale_bits: int | None = None, unit_range: bool = True):
        """Build from exactly representable values; ``scale_bits`` defaults to the natural one."""
        rm = RationalMatrix.from_fractions(rows)
        bits = natural_bits(rm)
        if bits is None:
            raise DomainError("values are not dyadic; quantize them first")
        if scale_bits is None:
            scale_bits = bits
        elif scale_bits < bits:
            raise DomainError(f"values need {bits} fractional bits, got {scale_bits}")
        return cls.from_rational(rm, scale_bits, unit_range)

    @classmethod
    def from_rational(cls, rm: RationalMatrix, scale_bits: int, unit_range: bool = True):
        scale = 1 << scale_bits
        if scale % rm.denominator == 0:
            factor = scale // rm.denominator
            top = int(rm.numerators.max()) * factor
            num = rm.numerators.astype(object) if top >= INT64_SAFE else rm.numerators
            num = num * factor
        else:
            num = rm.numerators.astype(object) * scale
            if any(v % rm.denominator for v in num.flat):
                raise DomainError(f"values not representable with {scale_bits} bits")
            num = num // rm.denominator
        return cls(int_array(num), scale_bits, unit_range)

    def to_rational(self) -> RationalMatrix:
        return RationalMatrix(self.numerators, self.denominator)

    def to_fractions(self) -> list[list[Fraction]]:
        return self.to_rational().to_fractions()

    def with_bits(self, scale_bits: int) -> "DyadicMatrix":
        """Same values on a finer grid (``scale_bits`` >= current)."""
        if scale_bits < self.scale_bits:
            raise DomainError("cannot drop bits without quantizing")
        shift = scale_bits - self.scale_bits
        top = (int(self.numerators.max()) + 1) << shift
        num = int_array(self.numerators, top)
        return DyadicMatrix(num << shift if shift else num, scale_bits, self.unit_range)

    def __eq__(self, other):
        if not isinstance(other, DyadicMatrix) or self.shape != other.shape:
            return NotImplemented
        return self.to_fractions() == other.to_fractions()


def natural_bits(rm: RationalMatrix) -> int | None:
    """Fewest fractional bits representing every entry exactly, or None if not dyadic."""
    g = rm.denominator
    for v in rm.numerators.flat:
        g = math.gcd(g, int(v))
        if g == 1:
            break
    den = rm.denominator // g
    if den & (den - 1):
        return None
    return den.bit_length() - 1


def _check_mode(mode, rng):
    if mode not in ("truncate", "unbiased"):
        raise ValueError(f"unknown quantization mode {mode!r}")
    if mode == "unbiased" and rng is None:
        raise ValueError("unbiased quantization needs a random generator")


def _bernoulli(rng: np.random.Generator, numer: int, denom: int) -> bool:
    """Exact Bernoulli(numer/denom) draw."""
    if denom < INT64_SAFE:
        return int(rng.integers(0, denom)) < numer
    nbytes = (denom.bit_length() + 7) // 8
    limit = (256**nbytes // denom) * denom
    while True:
        u = int.from_bytes(rng.bytes(nbytes), "little")
        if u < limit:
            return u % denom < numer


def quantize(value, bits: int, mode: str = "truncate", rng=None) -> Dyadic:
    """Round ``value`` in [0, 1) to a ``bits``-bit dyadic.

    ``truncate`` returns ``floor(value * 2**bits) / 2**bits``. ``unbiased``
    adds one ulp with probability equal to the truncated residual measured
    in ulps, so the expectation equals ``value``.
    """
    _check_mode(mode, rng)
    value = Fraction(value)
    if not 0 <= value < 1:
        raise DomainError(f"{value} outside [0, 1)")
    scaled = value * (1 << bits)
    base = scaled.numerator // scaled.denominator
    rem = scaled.numerator - base * scaled.denominator
    if mode == "unbiased" and rem and _bernoulli(rng, rem, scaled.denominator):
        base += 1
    return Dyadic(base, bits)


def quantize_matrix(rm: RationalMatrix, bits: int, mode: str = "truncate", rng=None) -> DyadicMatrix:
    """Entrywise :func:`quantize` of a matrix in [0, 1).

    Unbiased mode draws one uniform integer below the denominator per entry
    with a non-zero residual, in row-major order. An unbiased round-up can
    reach ``2**bits`` (value 1); the result is then not unit-range.
    """
    _check_mode(mode, rng)
    den = rm.denominator
    num = rm.numerators
    over = num >= den
    if over.any():
        i, j = np.argwhere(over)[0]
        raise DomainError("entry outside [0, 1)", int(i) + 1, int(j) + 1)
    scale = 1 << bits
    if den * scale < INT64_SAFE:
        shifted = num.astype(np.int64) * scale
    else:
        shifted = num.astype(object) * scale
    base, rem = np.divmod(shifted, den)
    if mode == "unbiased":
        nz = np.flatnonzero(rem)
        if nz.size:
            flat = base.reshape(-1).copy()
            rflat = rem.reshape(-1)
            if den < INT64_SAFE:
                draws = rng.integers(0, den, size=nz.size)
                flat[nz] += (draws < rflat[nz].astype(np.int64)).astype(flat.dtype)
            else:
                for k in nz:
                    flat[k] += _bernoulli(rng, int(rflat[k]), den)
            base = flat.reshape(base.shape)
    unit = not (base >= scale).any()
    return DyadicMatrix(int_array(base, scale), bits, unit_range=unit)


def split_integer_fraction(rm: RationalMatrix) -> tuple[np.ndarray, RationalMatrix]:
    """Split into integer part ``F`` and fractional part ``R`` with entries in [0, 1)."""
    whole, rem = np.divmod(rm.numerators, rm.denominator)
    return int_array(whole), RationalMatrix(int_array(rem, rm.denominator), rm.denominator)
