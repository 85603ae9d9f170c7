"""Digit-by-digit rounding of l-bit matrices in [0, 1).

Write x = b/2 + x''/2 with b the leading bit. Rounding x'' to y'' first and
then rounding the {0, 1/2, 1} layer b/2 + y''/2 costs at most 1/2 plus half
the error of y'', so after l levels every prefix error is at most
1 - 2**-l. The loop below runs the levels from the least significant bit
up, which is the same recursion unrolled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fixedpoint import DyadicMatrix
from .halfint import SCAN_CUTOFF, ColorPolicy, _round_scan, _round_vectorized

__all__ = ["BitPlan", "round_bitwise"]


@dataclass(eq=False)
class BitPlan:
    """Bit levels of a unit-range dyadic matrix.

    Level ``d`` (1 = most significant) holds bit ``d`` of every entry;
    :meth:`layer` combines it with the running rounding into the doubled
    {0, 1/2, 1} layer ``bit + y``.
    """

    matrix: DyadicMatrix
    policy: ColorPolicy

    def __post_init__(self):
        if not self.matrix.unit_range:
            raise DomainError("bitwise rounding needs entries in [0, 1)")

    @property
    def bits(self) -> int:
        return self.matrix.scale_bits

    def levels(self) -> range:
        return range(self.bits, 0, -1)

    def bit(self, d: int) -> np.ndarray:
        shifted = self.matrix.numerators >> (self.bits - d)
        return (shifted & 1).astype(np.int8)

    def layer(self, d: int, y: np.ndarray) -> np.ndarray:
        return self.bit(d) + y


def round_bitwise(matrix: DyadicMatrix, policy: ColorPolicy | None = None) -> np.ndarray:
    """Round an l-bit matrix in [0, 1) to a 0/1 matrix.

    Every initial row and column interval ends with error at most
    ``1 - 2**-l``. With a randomized policy each entry rounds up with
    probability equal to its value; the generator is consumed level by
    level from the least significant bit.
    """
    policy = policy or ColorPolicy.canonical()
    plan = BitPlan(matrix, policy)
    m, n = matrix.shape
    if m * n <= SCAN_CUTOFF:
        return _round_bitwise_small(plan)
    y = np.zeros((m, n), dtype=np.int8)
    for d in plan.levels():
        y = _round_vectorized(plan.layer(d, y), policy)
    return y


def _round_bitwise_small(plan: BitPlan) -> np.ndarray:
    m, n = plan.matrix.shape
    bits = plan.bits
    nums = [[int(v) for v in row] for row in plan.matrix.numerators.tolist()]
    y = [[0] * n for _ in range(m)]
    for d in plan.levels():
        shift = bits - d
        twice = [[((v >> shift) & 1) + yv for v, yv in zip(nrow, yrow)] for nrow, yrow in zip(nums, y)]
        y = _round_scan(twice, m, n, plan.policy)
    return np.array(y, dtype=np.int8).reshape(m, n)
