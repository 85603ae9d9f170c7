"""Exact certification of rounding errors.

All errors are kept as integer numerators over the input's common
denominator. The worst error over arbitrary intervals of a line is the
spread (max minus min) of its prefix-error sequence with a leading 0,
since every interval error is a difference of two prefix errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import DomainError
from .fixedpoint import INT64_SAFE, DyadicMatrix, RationalMatrix, format_exact, int_array

__all__ = [
    "Bound",
    "Verdict",
    "ErrorReport",
    "error_report",
    "verify_bounds",
    "DEFAULT_LIMITS",
    "STRICT_LIMITS",
    "HALF_LAYER_LIMITS",
]


@dataclass(frozen=True)
class Bound:
    limit: Fraction
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "limit", Fraction(self.limit))

    def admits(self, value: Fraction) -> bool:
        return value < self.limit if self.strict else value <= self.limit

    def __str__(self):
        return ("< " if self.strict else "<= ") + format_exact(self.limit)


# report attribute checked by each named bound
_MEASURES = {
    "initial_row": "max_initial_row",
    "initial_col": "max_initial_col",
    "grand_total": "grand_total_error",
    "arbitrary_row": "max_arbitrary_row",
    "arbitrary_col": "max_arbitrary_col",
    "half_layer_row": "max_initial_row",
    "half_layer_col": "max_initial_col",
}

STRICT_LIMITS = {
    "initial_row": Bound(Fraction(1)),
    "initial_col": Bound(Fraction(1)),
    "grand_total": Bound(Fraction(1)),
}

DEFAULT_LIMITS = {
    **STRICT_LIMITS,
    "arbitrary_row": Bound(Fraction(2)),
    "arbitrary_col": Bound(Fraction(2)),
}

HALF_LAYER_LIMITS = {
    "half_layer_row": Bound(Fraction(1, 2), strict=False),
    "half_layer_col": Bound(Fraction(1, 2), strict=False),
}


@dataclass(frozen=True)
class Verdict:
    name: str
    bound: Bound
    achieved: Fraction
    passed: bool
    where: tuple | None = None

    @property
    def limit(self) -> Fraction:
        return self.bound.limit

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        loc = f" at {self.where}" if self.where else ""
        return f"{status} {self.name}: {format_exact(self.achieved)} {self.bound}{loc}"


@dataclass(eq=False)
class ErrorReport:
    """Exact error profile of an integer matrix Y against X.

    ``row_prefix[i, b]`` is the numerator of sum_{j<=b} (x_ij - y_ij) and
    ``col_prefix[b, j]`` of sum_{i<=b} (x_ij - y_ij), both over
    ``denominator`` and 0-based. Locations in ``worst`` are 1-based:
    ``(row, prefix_len)``, ``(prefix_len, col)`` or ``(line, first, last)``.
    """

    shape: tuple[int, int]
    denominator: int
    row_prefix: np.ndarray
    col_prefix: np.ndarray
    max_initial_row: Fraction
    max_initial_col: Fraction
    max_arbitrary_row: Fraction
    max_arbitrary_col: Fraction
    grand_total_signed: Fraction
    half_integral: bool
    worst: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    @property
    def grand_total_error(self) -> Fraction:
        return abs(self.grand_total_signed)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def row_errors(self, i: int) -> list[Fraction]:
        return [Fraction(int(v), self.denominator) for v in self.row_prefix[i]]

    def col_errors(self, j: int) -> list[Fraction]:
        return [Fraction(int(v), self.denominator) for v in self.col_prefix[:, j]]

    def maxima(self) -> dict[str, Fraction]:
        return {
            "max_initial_row": self.max_initial_row,
            "max_initial_col": self.max_initial_col,
            "max_arbitrary_row": self.max_arbitrary_row,
            "max_arbitrary_col": self.max_arbitrary_col,
            "grand_total_error": self.grand_total_error,
        }

    def to_dict(self, profiles: bool = False) -> dict:
        """JSON-ready form; exact values as decimal (or p/q) strings."""
        out = {
            "rows": self.shape[0],
            "cols": self.shape[1],
            **{k: format_exact(v) for k, v in self.maxima().items()},
            "grand_total_signed": format_exact(self.grand_total_signed),
            "worst": {k: list(v) for k, v in self.worst.items()},
            "verdicts": [
                {
                    "bound": v.name,
                    "limit": format_exact(v.limit),
                    "strict": v.bound.strict,
                    "achieved": format_exact(v.achieved),
                    "pass": v.passed,
                }
                for v in self.verdicts
            ],
            "pass": self.passed,
        }
        if profiles:
            out["row_prefix_errors"] = [[format_exact(e) for e in self.row_errors(i)] for i in range(self.shape[0])]
            out["col_prefix_errors"] = [[format_exact(e) for e in self.col_errors(j)] for j in range(self.shape[1])]
        return out

    def to_json(self, profiles: bool = False) -> str:
        return json.dumps(self.to_dict(profiles), indent=2)

    def to_text(self) -> str:
        lines = [f"rows={self.shape[0]}", f"cols={self.shape[1]}"]
        lines += [f"{k}={format_exact(v)}" for k, v in self.maxima().items()]
        lines += [f"verdict.{v.name}={'pass' if v.passed else 'fail'} ({format_exact(v.achieved)} {v.bound})" for v in self.verdicts]
        lines.append(f"pass={str(self.passed).lower()}")
        return "\n".join(lines) + "\n"


def _as_rational(x) -> RationalMatrix:
    if isinstance(x, RationalMatrix):
        return x
    if isinstance(x, DyadicMatrix):
        return x.to_rational()
    return RationalMatrix.from_fractions(x)


def _spread(prefix: np.ndarray, axis: int):
    hi = np.maximum(prefix.max(axis=axis), 0)
    lo = np.minimum(prefix.min(axis=axis), 0)
    return hi - lo


def _spread_interval(seq) -> tuple[int, int]:
    """1-based (first, last) of the interval with the largest |error| in a line."""
    full = [0] + [int(v) for v in seq]
    hi = max(range(len(full)), key=full.__getitem__)
    lo = min(range(len(full)), key=full.__getitem__)
    a, b = sorted((hi, lo))
    return a + 1, b


def error_report(x, y, limits: Mapping[str, Bound] | None = None) -> ErrorReport:
    """Certify integer matrix ``y`` against ``x`` and attach verdicts.

    ``limits`` defaults to the standard set, plus the 1/2 bounds when every
    entry of ``x`` is in {0, 1/2, 1}.
    """
    rm = _as_rational(x)
    y = np.asarray(y)
    if y.shape != rm.shape:
        raise DomainError(f"shape mismatch: X is {rm.shape}, Y is {y.shape}")
    m, n = rm.shape
    den = rm.denominator
    num = rm.numerators
    top_y = int(np.abs(y).max()) if y.size else 0
    top_x = int(num.max()) if num.size else 0
    if (top_x + top_y * den) * m * n < INT64_SAFE and num.dtype != object:
        diff = num.astype(np.int64) - y.astype(np.int64) * den
    else:
        diff = int_array(num, INT64_SAFE).astype(object) - int_array(y, INT64_SAFE).astype(object) * den

    row_prefix = np.cumsum(diff, axis=1)
    col_prefix = np.cumsum(diff, axis=0)
    abs_row = np.abs(row_prefix)
    abs_col = np.abs(col_prefix)
    row_spread = _spread(row_prefix, axis=1)
    col_spread = _spread(col_prefix, axis=0)
    grand = int(row_prefix[:, -1].sum())

    def frac(v):
        return Fraction(int(v), den)

    ri, rb = np.unravel_index(int(np.argmax(abs_row)), abs_row.shape)
    cb, cj = np.unravel_index(int(np.argmax(abs_col)), abs_col.shape)
    ar = int(np.argmax(row_spread))
    ac = int(np.argmax(col_spread))
    worst = {
        "initial_row": (int(ri) + 1, int(rb) + 1),
        "initial_col": (int(cb) + 1, int(cj) + 1),
        "arbitrary_row": (ar + 1, *_spread_interval(row_prefix[ar])),
        "arbitrary_col": (ac + 1, *_spread_interval(col_prefix[:, ac])),
    }
    half = top_x <= den and bool(((num * 2) % den == 0).all())
    rep = ErrorReport(
        shape=(m, n),
        denominator=den,
        row_prefix=row_prefix,
        col_prefix=col_prefix,
        max_initial_row=frac(abs_row.max()),
        max_initial_col=frac(abs_col.max()),
        max_arbitrary_row=frac(row_spread.max()),
        max_arbitrary_col=frac(col_spread.max()),
        grand_total_signed=frac(grand),
        half_integral=half,
        worst=worst,
    )
    rep.verdicts = verify_bounds(rep, limits)
    return rep


def verify_bounds(rep: ErrorReport, limits: Mapping[str, Bound] | None = None) -> list[Verdict]:
    """Compare report maxima with named bounds; failures are data, not exceptions."""
    if limits is None:
        limits = dict(DEFAULT_LIMITS)
        if rep.half_integral:
            limits.update(HALF_LAYER_LIMITS)
    verdicts = []
    for name, bound in limits.items():
        if name not in _MEASURES:
            raise KeyError(f"unknown bound {name!r}")
        achieved = getattr(rep, _MEASURES[name])
        where = rep.worst.get(name.replace("half_layer", "initial"))
        verdicts.append(Verdict(name, bound, achieved, bound.admits(achieved), where))
    return verdicts
