"""Wall-time of the padded bitwise rounding as m*n and l double."""

import argparse
import statistics
import time

import numpy as np

from matround.fixedpoint import DyadicMatrix
from matround.halfint import ColorPolicy
from matround.pipeline import _round_unit


def median_time(shape, bits, rng, runs):
    times = []
    for _ in range(runs):
        x = DyadicMatrix(rng.integers(0, 1 << bits, size=shape), bits)
        t = time.perf_counter()
        _round_unit(x, ColorPolicy.canonical())
        times.append(time.perf_counter() - t)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-side", type=int, default=1000)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    side = args.max_side
    shapes = [(side // 4, side // 2), (side // 2, side // 2), (side // 2, side), (side, side)]
    print("shape        bits  median_s  ratio")
    prev = None
    for shape in shapes:
        t = median_time(shape, 20, rng, args.runs)
        ratio = f"{t / prev:.2f}" if prev else "-"
        print(f"{shape[0]:>4}x{shape[1]:<6}  {20:>4}  {t:8.3f}  {ratio}")
        prev = t
    prev = None
    for bits in (5, 10, 20):
        t = median_time((side // 2, side // 2), bits, rng, args.runs)
        ratio = f"{t / prev:.2f}" if prev else "-"
        print(f"{side // 2:>4}x{side // 2:<6}  {bits:>4}  {t:8.3f}  {ratio}")
        prev = t


if __name__ == "__main__":
    main()
