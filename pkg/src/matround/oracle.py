"""Independent checks: exhaustive enumeration and Monte-Carlo estimation.

``enumerate_roundings`` tries every floor/ceil choice on small matrices
with its own vectorized prefix sums (it does not call the report module),
so pipeline outputs can be checked for membership.
``estimate_distribution`` repeats unbiased roundings with per-trial seeds
and counts how often entries, initial-interval sums and the grand total
round up.

Per-trial seeds: ``SeedSequence([master_seed, trial_index])`` and the
first ``uint64`` of its generated state.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import binomtest

from .errors import BoundViolation, DomainError
from .fixedpoint import DyadicMatrix, RationalMatrix, natural_bits, split_integer_fraction
from .pipeline import RoundingOptions, _policy, _round_unit, round_general
from .report import STRICT_LIMITS, Bound

__all__ = [
    "FeasibleSet",
    "TrialStats",
    "enumerate_roundings",
    "estimate_distribution",
    "trial_seed",
    "MAX_FRACTIONAL",
]

MAX_FRACTIONAL = 20
_CHUNK = 1 << 14


def _rational(x) -> RationalMatrix:
    if isinstance(x, RationalMatrix):
        return x
    if isinstance(x, DyadicMatrix):
        return x.to_rational()
    return RationalMatrix.from_fractions(x)


@dataclass(eq=False)
class FeasibleSet:
    x: RationalMatrix
    limits: dict
    matrices: list

    def __len__(self):
        return len(self.matrices)

    def __contains__(self, y) -> bool:
        key = np.asarray(y, dtype=np.int64).tobytes()
        return any(mat.tobytes() == key for mat in self.matrices)

    def as_tuples(self) -> set:
        return {tuple(map(tuple, mat.tolist())) for mat in self.matrices}


def _admits(err: np.ndarray, bound: Bound, den: int) -> np.ndarray:
    # err / den vs p / q  <=>  err * q vs p * den
    lhs = err * bound.limit.denominator
    rhs = bound.limit.numerator * den
    return lhs < rhs if bound.strict else lhs <= rhs


def enumerate_roundings(x, limits=None) -> FeasibleSet:
    """All floor/ceil roundings of ``x`` meeting ``limits`` (default: the three strict < 1 bounds)."""
    limits = dict(STRICT_LIMITS if limits is None else limits)
    rm = _rational(x)
    m, n = rm.shape
    den = rm.denominator
    num = rm.numerators.astype(np.int64)
    floor = num // den
    frac_pos = np.flatnonzero(num % den)
    k = len(frac_pos)
    if k > MAX_FRACTIONAL:
        raise DomainError(f"{k} fractional entries; enumeration is limited to {MAX_FRACTIONAL}")

    found = []
    shifts = np.arange(k)
    for start in range(0, 1 << k, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, 1 << k))
        choice = (codes[:, None] >> shifts) & 1
        ys = np.broadcast_to(floor.reshape(-1), (len(codes), m * n)).copy()
        ys[:, frac_pos] += choice
        ys = ys.reshape(-1, m, n)
        diff = num[None] - ys * den
        rows = np.cumsum(diff, axis=2)
        cols = np.cumsum(diff, axis=1)
        ok = np.ones(len(codes), dtype=bool)
        for name, bound in limits.items():
            if name == "initial_row":
                err = np.abs(rows).reshape(len(codes), -1).max(axis=1)
            elif name == "initial_col":
                err = np.abs(cols).reshape(len(codes), -1).max(axis=1)
            elif name == "grand_total":
                err = np.abs(diff.reshape(len(codes), -1).sum(axis=1))
            elif name == "arbitrary_row":
                err = (np.maximum(rows.max(axis=2), 0) - np.minimum(rows.min(axis=2), 0)).max(axis=1)
            elif name == "arbitrary_col":
                err = (np.maximum(cols.max(axis=1), 0) - np.minimum(cols.min(axis=1), 0)).max(axis=1)
            else:
                raise KeyError(f"unknown bound {name!r}")
            ok &= _admits(err, bound, den)
        found.extend(ys[ok])
    return FeasibleSet(rm, limits, [np.ascontiguousarray(y) for y in found])


def trial_seed(master_seed: int, trial: int) -> int:
    state = np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)
    return int(state[0])


@dataclass(eq=False)
class TrialStats:
    """Up-counts over repeated unbiased roundings.

    ``row_prefix_up[i, b]`` counts trials where the row-i prefix of length
    b+1 was rounded to its ceiling (likewise ``col_prefix_up[b, j]``);
    ``entry_up`` counts entries rounded to their ceiling. Up-rates should
    match the fractional parts of the exact values.
    """

    trials: int
    master_seed: int
    x: RationalMatrix
    entry_up: np.ndarray
    row_prefix_up: np.ndarray
    col_prefix_up: np.ndarray
    grand_up: int
    matrix_counts: Counter = field(repr=False)

    def _fracs(self):
        den = self.x.denominator
        num = self.x.numerators.astype(object)
        entry = num % den
        rows = np.cumsum(num, axis=1) % den
        cols = np.cumsum(num, axis=0) % den
        grand = int(num.sum()) % den
        return den, entry, rows, cols, grand

    def expected(self) -> dict:
        """Fractional parts (exact) of entries, prefix sums and grand total."""
        den, entry, rows, cols, grand = self._fracs()

        def f(a):
            return [[Fraction(int(v), den) for v in row] for row in a]

        return {"entry": f(entry), "row_prefix": f(rows), "col_prefix": f(cols), "grand": Fraction(grand, den)}

    def entry_frequency(self) -> np.ndarray:
        return self.entry_up / self.trials

    def row_prefix_histogram(self, i: int, b: int) -> dict[int, float]:
        """Distribution of the rounded sum of row ``i`` over columns ``0..b``."""
        s = sum(Fraction(int(v), self.x.denominator) for v in self.x.numerators[i, : b + 1])
        return self._histogram(s, int(self.row_prefix_up[i, b]))

    def col_prefix_histogram(self, b: int, j: int) -> dict[int, float]:
        s = sum(Fraction(int(v), self.x.denominator) for v in self.x.numerators[: b + 1, j])
        return self._histogram(s, int(self.col_prefix_up[b, j]))

    def _histogram(self, s: Fraction, up: int) -> dict[int, float]:
        lo = math.floor(s)
        if up == 0:
            return {lo: 1.0}
        if up == self.trials:
            return {lo + 1: 1.0}
        return {lo: (self.trials - up) / self.trials, lo + 1: up / self.trials}

    def matrix_frequencies(self) -> dict[tuple, float]:
        m, n = self.x.shape
        out = {}
        for key, count in self.matrix_counts.items():
            y = np.frombuffer(key, dtype=np.int64).reshape(m, n)
            out[tuple(map(tuple, y.tolist()))] = count / self.trials
        return out

    def outliers(self, sigmas: float = 4.0) -> list[dict]:
        """Cells whose up-rate is more than ``sigmas`` standard deviations off."""
        den, entry, rows, cols, grand = self._fracs()
        out = []
        groups = [
            ("entry", entry, self.entry_up),
            ("row_prefix", rows, self.row_prefix_up),
            ("col_prefix", cols, self.col_prefix_up),
            ("grand", np.array([[grand]], dtype=object), np.array([[self.grand_up]])),
        ]
        for kind, fr, counts in groups:
            for (i, j), c in np.ndenumerate(counts):
                p = Fraction(int(fr[i, j]), den)
                observed = int(c) / self.trials
                tol = sigmas * math.sqrt(float(p * (1 - p)) / self.trials)
                if abs(observed - float(p)) > tol or (p in (0, 1) and observed != float(p)):
                    pval = binomtest(int(c), self.trials, float(p)).pvalue if 0 < p < 1 else 0.0
                    out.append(
                        {"kind": kind, "cell": [i + 1, j + 1], "expected": float(p), "observed": observed,
                         "tolerance": tol, "p_value": pval}
                    )
        return out

    def to_dict(self) -> dict:
        m, n = self.x.shape
        return {
            "trials": self.trials,
            "master_seed": self.master_seed,
            "rows": m,
            "cols": n,
            "entry_up_rate": self.entry_frequency().tolist(),
            "row_prefix_up_rate": (self.row_prefix_up / self.trials).tolist(),
            "col_prefix_up_rate": (self.col_prefix_up / self.trials).tolist(),
            "grand_up_rate": self.grand_up / self.trials,
            "distinct_outputs": len(self.matrix_counts),
            "outliers": self.outliers(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def estimate_distribution(x, opts: RoundingOptions | None = None, trials: int = 1000, master_seed: int = 0) -> TrialStats:
    """Run ``trials`` unbiased roundings and count up-roundings.

    Any initial-interval sum or grand total outside {floor, ceil} of its
    exact value raises :class:`BoundViolation` naming the trial seed.
    """
    opts = opts or RoundingOptions(mode="unbiased")
    if opts.mode != "unbiased":
        raise ValueError("estimate_distribution needs unbiased mode")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rm = _rational(x)
    m, n = rm.shape
    den = rm.denominator
    num = rm.numerators.astype(object)
    row_cum = np.cumsum(num, axis=1)
    col_cum = np.cumsum(num, axis=0)
    row_lo, row_hi = row_cum // den, -(-row_cum // den)
    col_lo, col_hi = col_cum // den, -(-col_cum // den)
    total = int(num.sum())
    grand_lo, grand_hi = total // den, -(-total // den)
    entry_lo = (num // den).astype(np.int64)

    # dyadic input with enough bits skips quantization: round the fractional part directly
    whole, frac = split_integer_fraction(rm)
    bits = natural_bits(frac)
    fast = bits is not None and (opts.bits is None or opts.bits >= bits)
    if fast:
        unit = DyadicMatrix.from_rational(frac, max(1, bits, opts.bits or 0))

    entry_up = np.zeros((m, n), dtype=np.int64)
    row_up = np.zeros((m, n), dtype=np.int64)
    col_up = np.zeros((m, n), dtype=np.int64)
    grand_up = 0
    counts = Counter()
    for t in range(trials):
        seed = trial_seed(master_seed, t)
        if fast:
            y = whole + _round_unit(unit, _policy("unbiased", seed)).astype(np.int64)
        else:
            y = round_general(rm, RoundingOptions(bits=opts.bits, mode="unbiased", seed=seed, verify=False)).y
        rs = np.cumsum(y, axis=1)
        cs = np.cumsum(y, axis=0)
        g = int(y.sum())
        bad_row = (rs < row_lo) | (rs > row_hi)
        bad_col = (cs < col_lo) | (cs > col_hi)
        if bad_row.any() or bad_col.any() or not grand_lo <= g <= grand_hi:
            if bad_row.any():
                i, b = np.argwhere(bad_row)[0]
                where = f"row {i + 1} prefix 1..{b + 1}"
            elif bad_col.any():
                b, j = np.argwhere(bad_col)[0]
                where = f"column {j + 1} prefix 1..{b + 1}"
            else:
                where = "grand total"
            raise BoundViolation(f"{where} left {{floor, ceil}} in trial {t} (seed {seed})")
        entry_up += y > entry_lo
        row_up += rs > row_lo
        col_up += cs > col_lo
        grand_up += g > grand_lo
        counts[y.tobytes()] += 1
    return TrialStats(trials, master_seed, rm, entry_up, row_up, col_up, grand_up, counts)
