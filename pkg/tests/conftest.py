import csv
import datetime as dt

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_weekly_csv(path, counts, start=dt.date(2016, 1, 4), with_dates=True):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["week", "date", "count"] if with_dates else ["week", "count"])
        for i, c in enumerate(counts):
            day = start + dt.timedelta(weeks=i)
            y, wk, _ = day.isocalendar()
            label = f"{y}-W{wk:02d}"
            row = [label, f"{day:%d %b}-{day + dt.timedelta(days=6):%d %b}", c] if with_dates else [label, c]
            w.writerow(row)
    return path


def synthetic_counts(n=70, seed=7):
    """Positive weekly counts with a rise-and-fall trend and ARIMA(2,1,0) noise."""
    from boxjenkins import ArimaSpec, inv_boxcox, simulate

    w = simulate(ArimaSpec(2, 1, 0), [-0.22712, -0.50015], [], 0.6, n, seed=seed).values
    k = n * 5 // 14
    w = 12 + w + np.concatenate((np.linspace(0, 6, k), np.linspace(6, -2, n - k)))
    return np.maximum(1, np.round(inv_boxcox(w, 0.5).values)).astype(int)


@pytest.fixture
def weekly_csv(tmp_path):
    return write_weekly_csv(tmp_path / "weekly.csv", synthetic_counts())
