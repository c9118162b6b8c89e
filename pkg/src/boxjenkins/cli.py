"""Command-line driver: CSV in, report and plot data out.

Exit codes: 0 success, 1 usage error, 2 data error, 3 pipeline exhausted,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    BoxJenkinsError,
    IntegrityError,
    ParseError,
    PipelineExhaustedError,
    SchemaError,
)
from .pipeline import PipelineConfig, run_pipeline
from .report import emit_plot_data, emit_report
from .series import TimeSeries

logger = logging.getLogger("boxjenkins")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_EXHAUSTED, EXIT_IO = 0, 1, 2, 3, 4

_ISO_WEEK = re.compile(r"^(\d{4})-W(\d{2})$")
_TRAILING_INT = re.compile(r"^(.*?)(\d+)$")


@dataclass(frozen=True)
class InputRecord:
    week_label: str
    date_text: str | None
    count: int


def _week_ordinal(label: str) -> int | None:
    """Day number for ISO week or ISO date labels, else None."""
    m = _ISO_WEEK.match(label)
    try:
        if m:
            return _dt.date.fromisocalendar(int(m.group(1)), int(m.group(2)), 1).toordinal()
        return _dt.date.fromisoformat(label).toordinal()
    except ValueError:
        return None


def _check_sequence(labels: list[str]) -> None:
    """Reject gaps or disorder when labels are calendar-like or numbered."""
    days = [_week_ordinal(s) for s in labels]
    if all(d is not None for d in days):
        for i in range(1, len(days)):
            if days[i] - days[i - 1] != 7:
                raise IntegrityError(f"weeks {labels[i - 1]!r} and {labels[i]!r} are not consecutive")
        return
    matches = [_TRAILING_INT.match(s) for s in labels]
    if all(matches) and len({m.group(1) for m in matches}) == 1:
        nums = [int(m.group(2)) for m in matches]
        for i in range(1, len(nums)):
            if nums[i] != nums[i - 1] + 1:
                raise IntegrityError(f"weeks {labels[i - 1]!r} and {labels[i]!r} are not consecutive")


def read_records(path: str | Path, week_col: str = "week", date_col: str = "date",
                 count_col: str = "count") -> list[InputRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise SchemaError(f"{path}: file is empty or has no header row")
        header = [h.strip() for h in reader.fieldnames]
        for col in (week_col, count_col):
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        reader.fieldnames = header
        records, seen = [], set()
        for row in reader:
            line = reader.line_num
            week = (row.get(week_col) or "").strip()
            if not week:
                raise ParseError(f"{path}:{line}: empty week label", row=line)
            raw = (row.get(count_col) or "").strip()
            if not raw.isdigit():
                raise ParseError(f"{path}:{line}: count {raw!r} is not a non-negative integer", row=line)
            if week in seen:
                raise IntegrityError(f"{path}:{line}: duplicate week {week!r}")
            seen.add(week)
            date = row.get(date_col)
            records.append(InputRecord(week, date.strip() if date else None, int(raw)))
    if not records:
        raise SchemaError(f"{path}: no data rows")
    _check_sequence([r.week_label for r in records])
    return records


def ingest_csv(path: str | Path, week_col: str = "week", date_col: str = "date",
               count_col: str = "count") -> TimeSeries:
    """Read a weekly-count CSV into a labelled `TimeSeries`."""
    records = read_records(path, week_col, date_col, count_col)
    series = TimeSeries([r.count for r in records], labels=tuple(r.week_label for r in records))
    if len(series) != len(records):
        raise IntegrityError("reconstructed series length differs from the row count")
    return series


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _boxcox_arg(text: str):
    if text in ("auto", "off"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected auto, off or a number, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="boxjenkins", description="Box-Jenkins ARIMA identification, fitting and hold-out evaluation.")
    p.add_argument("--input", required=True, help="CSV with a header row (week,date,count)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--holdout", type=int, default=10, help="trailing points held out (default 10)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--boxcox", type=_boxcox_arg, default="auto", help="auto, off or a fixed lambda")
    p.add_argument("--max-diff", type=int, default=2, help="maximum differencing order (0-2)")
    p.add_argument("--seed", type=int, default=0, help="recorded in the report for reproducibility")
    p.add_argument("--format", choices=("json", "markdown", "both"), default="both")
    p.add_argument("--no-plot-data", action="store_true", help="skip figures/*.csv")
    p.add_argument("--week-col", default="week")
    p.add_argument("--date-col", default="date")
    p.add_argument("--count-col", default="count")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = PipelineConfig(holdout=args.holdout, alpha=args.alpha, max_diff=args.max_diff,
                                use_boxcox=args.boxcox)
    except ValueError as exc:
        print(f"boxjenkins: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        records = read_records(args.input, args.week_col, args.date_col, args.count_col)
        series = TimeSeries([r.count for r in records], labels=tuple(r.week_label for r in records))
        report = run_pipeline(series, config)
    except OSError as exc:
        print(f"boxjenkins: cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO
    except PipelineExhaustedError as exc:
        print(f"boxjenkins: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except BoxJenkinsError as exc:
        print(f"boxjenkins: data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    dates = {r.week_label: r.date_text for r in records if r.date_text}
    try:
        written = emit_report(report, args.format, args.out, seed=args.seed, dates=dates)
        if not args.no_plot_data:
            written += emit_plot_data(report, args.out)
    except OSError as exc:
        print(f"boxjenkins: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        logger.info("wrote %s", path)
    fit = report.chosen
    print(f"chosen {fit.spec}  AIC {fit.aic:.2f}  Ljung-Box p {report.diagnostics.ljung_box.p_value:.4f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
