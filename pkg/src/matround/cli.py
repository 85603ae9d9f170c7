"""Command-line interface: ``matround {round,table,report,simulate}``.

Exit codes: 0 success, 1 input/parse/domain error, 2 bound violation,
3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from .errors import BoundViolation, DomainError, InvariantError, ParseError
from .fixedpoint import RationalMatrix, parse_decimal
from .oracle import estimate_distribution
from .pipeline import RoundingOptions, controlled_table, round_general
from .report import error_report

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_BOUND, EXIT_INVARIANT = 0, 1, 2, 3


@dataclass
class CliConfig:
    command: str
    input: str = "-"
    output: str | None = None
    bits: int | None = None
    mode: str = "deterministic"
    seed: int | None = None
    base: int = 1
    trials: int = 10000
    check: bool = False
    header: bool = False
    report_path: str | None = None
    rounded: str | None = None
    format: str = "text"
    profiles: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.command == "table" and self.base < 1:
            raise DomainError("--base must be >= 1")

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "CliConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in vars(ns).items() if k in known})


@dataclass
class CsvTable:
    values: list
    col_labels: list | None = None
    row_labels: list | None = None
    corner: str = ""


def read_csv(text: str, header: bool = False) -> CsvTable:
    """Parse CSV text into exact fractions. Cells are cited 1-based by file position."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty input")
    table = CsvTable([])
    offset = 0
    if header:
        table.corner, table.col_labels = rows[0][0], rows[0][1:]
        rows, offset = rows[1:], 1
        table.row_labels = [r[0] for r in rows]
        rows = [r[1:] for r in rows]
        if not rows:
            raise ParseError("no data rows")
    width = len(rows[0])
    if width == 0:
        raise ParseError("no data columns")
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}", row=i + 1 + offset)
        table.values.append([parse_decimal(c, i + 1 + offset, j + 1 + int(header)) for j, c in enumerate(row)])
    return table


def format_csv(y: np.ndarray, table: CsvTable | None = None, totals: bool = False) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    labelled = table is not None and table.col_labels is not None
    if labelled:
        w.writerow([table.corner, *table.col_labels, *(["Total"] if totals else [])])
    m = y.shape[0]
    for i, row in enumerate(y.tolist()):
        cells = [str(int(v)) for v in row]
        if labelled:
            label = "Total" if totals and i == m - 1 else table.row_labels[i]
            cells = [label, *cells]
        w.writerow(cells)
    return out.getvalue()


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _write_report(path: str | None, cert):
    if path:
        _write(path, cert.to_json() + "\n" if path.endswith(".json") else cert.to_text())


def _options(args) -> RoundingOptions:
    opts = RoundingOptions(bits=args.bits, mode=args.mode, seed=args.seed, verify=args.check)
    if opts.mode == "unbiased" and opts.seed is None:
        import secrets

        opts.seed = secrets.randbits(64)
        print(f"seed={opts.seed}", file=sys.stderr)
    return opts


def cmd_round(args) -> int:
    table = read_csv(_read_source(args.input), args.header)
    result = round_general(table.values, _options(args))
    _write(args.output, format_csv(result.y, table))
    _write_report(args.report_path, result.certificate)
    return EXIT_OK


def cmd_table(args) -> int:
    table = read_csv(_read_source(args.input), args.header)
    ct = controlled_table(table.values, args.base, _options(args))
    if table.row_labels is not None:
        table.row_labels = [*table.row_labels, "Total"]
    _write(args.output, format_csv(ct.as_array(), table, totals=True))
    _write_report(args.report_path, ct.result.certificate)
    return EXIT_OK


def cmd_report(args) -> int:
    table = read_csv(_read_source(args.input), args.header)
    if args.rounded:
        ytab = read_csv(_read_source(args.rounded), args.header)
        y = np.array([[int(v) if v.denominator == 1 else None for v in row] for row in ytab.values], dtype=object)
        bad = np.argwhere(y == None)  # noqa: E711
        if len(bad):
            i, j = bad[0]
            raise ParseError("rounded value is not an integer", int(i) + 1, int(j) + 1)
        cert = error_report(table.values, y.astype(np.int64))
    else:
        opts = _options(args)
        opts.verify = False
        cert = round_general(table.values, opts).certificate
    text = cert.to_json(args.profiles) + "\n" if args.format == "json" else cert.to_text()
    _write(args.output, text)
    _write_report(args.report_path, cert)
    if args.check and not cert.passed:
        return EXIT_BOUND
    return EXIT_OK


def cmd_simulate(args) -> int:
    table = read_csv(_read_source(args.input), args.header)
    opts = RoundingOptions(bits=args.bits, mode="unbiased")
    stats = estimate_distribution(RationalMatrix.from_fractions(table.values), opts, args.trials, args.seed or 0)
    _write(args.output, stats.to_json() + "\n")
    if args.check and stats.outliers():
        return EXIT_BOUND
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matround", description="Exact matrix rounding with bounded interval errors.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode=True):
        p.add_argument("input", nargs="?", default="-", help="CSV file, '-' for stdin")
        p.add_argument("-o", "--output", default=None)
        p.add_argument("--bits", type=int, default=None)
        if mode:
            p.add_argument("--mode", choices=["deterministic", "unbiased"], default="deterministic")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--check", action="store_true", help="verify bounds; exit 2 on violation")
        p.add_argument("--header", action="store_true", help="first row and column are labels")
        p.add_argument("--report-path", default=None, help="write error report (.json for JSON)")

    p = sub.add_parser("round", help="round a matrix to integers")
    common(p)

    p = sub.add_parser("table", help="controlled rounding of a table with totals")
    common(p)
    p.add_argument("--base", type=int, default=1)

    p = sub.add_parser("report", help="error report for a rounding")
    common(p)
    p.add_argument("--rounded", default=None, help="CSV of the rounded matrix; rounds the input if omitted")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--profiles", action="store_true", help="include full prefix error profiles in JSON")

    p = sub.add_parser("simulate", help="Monte-Carlo check of unbiased rounding")
    common(p, mode=False)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(mode="unbiased")
    return parser


def run(config: CliConfig) -> int:
    """Execute one subcommand and map failures to exit codes."""
    try:
        return COMMANDS[config.command](config)
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ParseError, DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


COMMANDS = {"round": cmd_round, "table": cmd_table, "report": cmd_report, "simulate": cmd_simulate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = CliConfig.from_namespace(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
