import datetime as dt

import numpy as np
import pytest

from hfes.data_io import Dataset, Label

# filled by the acceptance suite, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def record():
    def _record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return _record


def make_dataset(y_p, d_p, y_c=(), d_c=(), weeks_before=None, start=dt.date(2010, 1, 1)):
    n_p, n_c = len(d_p), len(d_c)
    dates = [start + dt.timedelta(days=i) for i in range(n_p + n_c)]
    labels = [Label.POLICY] * n_p + [Label.CONTROL] * n_c
    wb = [None] * n_p + (list(weeks_before) if weeks_before is not None else [None] * n_c)
    return Dataset.from_arrays(
        dates,
        np.concatenate([np.asarray(y_p, float), np.asarray(y_c, float)]),
        np.concatenate([np.asarray(d_p, float), np.asarray(d_c, float)]),
        labels,
        wb,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
