"""Synthetic datasets shaped like the published FOMC samples.

The real policy-surprise and yield data are proprietary; these builders
produce CSV-ready datasets whose headline moments (sample sizes, variance
ratios, pre-announcement variances) are set exactly, for tests and demos.
"""

from __future__ import annotations

import datetime as dt
import math
from typing import Sequence

import numpy as np

from . import rng
from .data_io import Dataset, Label

# published headline numbers for the 2-Year / 5-Year samples
TWO_YEAR = dict(t_p=74, t_c=762)
FIVE_YEAR = dict(t_p=106, t_c=1130)
VARIANCE_RATIO = 32.43
PANEL_B = (0.000025, 0.000052, 0.000040)


def exact_variance(x: np.ndarray, var: float, mean: float = 0.0) -> np.ndarray:
    """Affinely rescale ``x`` to the given sample mean and variance (divisor n-1)."""
    x = np.asarray(x, dtype=float)
    z = (x - x.mean()) / x.std(ddof=1)
    return mean + math.sqrt(var) * z


def _calendar(t_p: int, t_c: int, start: dt.date) -> tuple[list[dt.date], np.ndarray]:
    total = t_p + t_c
    dates = [start + dt.timedelta(days=i) for i in range(total)]
    policy_pos = np.unique(np.linspace(total / t_p - 1, total - 1, t_p).round().astype(int))
    if policy_pos.size != t_p:
        raise ValueError("could not place policy rows")
    is_policy = np.zeros(total, dtype=bool)
    is_policy[policy_pos] = True
    return dates, is_policy


def _weeks_before(is_policy: np.ndarray, days_per_week: int = 2, weeks: int = 3) -> list[int | None]:
    """Label the control rows preceding each policy row: 1 for the nearest pair, then 2, 3."""
    out: list[int | None] = [None] * is_policy.size
    k = None
    for i in range(is_policy.size - 1, -1, -1):
        if is_policy[i]:
            k = 0
            continue
        if k is not None:
            k += 1
            wb = (k - 1) // days_per_week + 1
            out[i] = wb if wb <= weeks else None
    return out


def headline_fixture(
    t_p: int = TWO_YEAR["t_p"],
    t_c: int = TWO_YEAR["t_c"],
    variance_ratio: float = VARIANCE_RATIO,
    beta: float = 0.99,
    d_c_var: float = 0.000037,
    noise_var: float | None = None,
    bucket_variances: Sequence[float] | None = None,
    seed: int = 0,
    start: dt.date = dt.date(2000, 1, 4),
) -> Dataset:
    """Dataset with exactly ``t_p`` policy rows, ``t_c`` control rows and
    policy/control variance ratio of d equal to ``variance_ratio``.

    y = beta * d + noise in both samples. When ``bucket_variances`` is
    given, the control rows labelled 1, 2, 3 weeks before an announcement
    get exactly those d variances (the overall control variance then drifts
    away from ``d_c_var``; the ratio stays exact).
    """
    g = rng.substream(seed, rng.FIXTURE)
    noise_var = d_c_var if noise_var is None else noise_var
    dates, is_policy = _calendar(t_p, t_c, start)
    wb = _weeks_before(is_policy)
    d = np.empty(t_p + t_c)
    d[~is_policy] = exact_variance(g.standard_normal(t_c), d_c_var)
    if bucket_variances is not None:
        for b, var in enumerate(bucket_variances, start=1):
            idx = np.array([i for i, w in enumerate(wb) if w == b and not is_policy[i]])
            d[idx] = exact_variance(g.standard_normal(idx.size), var)
    # ratio is exact against the realized control variance
    realized = float(np.var(d[~is_policy], ddof=1))
    d[is_policy] = exact_variance(g.standard_normal(t_p), variance_ratio * realized)
    y = beta * d + math.sqrt(noise_var) * g.standard_normal(t_p + t_c)
    labels = [Label.POLICY if p else Label.CONTROL for p in is_policy]
    wb = [None if p else w for p, w in zip(is_policy, wb)]
    return Dataset.from_arrays(dates, y, d, labels, wb)
