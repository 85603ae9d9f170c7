"""Fuzz the CLI with random matrices and seeds; exit codes 2 or 3 are bugs."""

import argparse
import subprocess
import sys

import numpy as np


def random_csv(rng):
    m, n = rng.integers(1, 12, size=2)
    scale = rng.choice([1, 10, 100, 1000])
    vals = rng.integers(0, 50 * scale, size=(m, n)) / scale
    return "\n".join(",".join(f"{v:g}" for v in row) for row in vals) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    failures = 0
    for k in range(args.runs):
        text = random_csv(rng)
        cmd = ["round", "--check", "--mode", str(rng.choice(["deterministic", "unbiased"])), "--seed", str(int(rng.integers(0, 2**63)))]
        if k % 3 == 0:
            cmd = ["table", "--check", "--base", str(int(rng.choice([1, 10, 100]))), *cmd[2:]]
        proc = subprocess.run([sys.executable, "-m", "matround", *cmd], input=text, capture_output=True, text=True)
        if proc.returncode in (2, 3):
            failures += 1
            print(f"exit {proc.returncode}: {' '.join(cmd)}\n{text}{proc.stderr}")
    print(f"{args.runs} runs, {failures} failures")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
