"""Event-study regression on the policy sample."""

from __future__ import annotations

from dataclasses import dataclass

from .data_io import Dataset, require_policy
from .errors import HfesError
from .stats import CRITICAL_VALUE, OlsFit, ols


@dataclass(frozen=True)
class EventStudyResult:
    fit: OlsFit
    ci95: tuple[float, float]
    n_policy: int
    control_fit: OlsFit | None = None

    def to_dict(self) -> dict:
        out = {
            "slope": self.fit.slope,
            "intercept": self.fit.intercept,
            "se_hc1": self.fit.se_hc1,
            "se_hac": self.fit.se_hac,
            "hac_bandwidth": self.fit.hac_bandwidth,
            "ci95": list(self.ci95),
            "n_policy": self.n_policy,
        }
        if self.control_fit is not None:
            out["control"] = {
                "slope": self.control_fit.slope,
                "intercept": self.control_fit.intercept,
                "se_hc1": self.control_fit.se_hc1,
                "n": self.control_fit.n,
            }
        return out


def event_study_estimate(ds: Dataset, hac_bandwidth: int | None = None) -> EventStudyResult:
    """Regress y on d over the policy rows.

    The interval is slope +/- 1.96 se, with the HAC standard error when a
    bandwidth is given and HC1 otherwise. A control-sample fit is attached
    when the control sample has at least three rows and a non-constant d.
    """
    pol = require_policy(ds)
    fit = ols(pol.y, pol.d, hac_bandwidth=hac_bandwidth)
    se = fit.se
    ci = (fit.slope - CRITICAL_VALUE * se, fit.slope + CRITICAL_VALUE * se)
    control_fit = None
    ctl = ds.control()
    if len(ctl) >= 3:
        try:
            control_fit = ols(ctl.y, ctl.d)
        except HfesError:
            control_fit = None
    return EventStudyResult(fit=fit, ci95=ci, n_policy=len(pol), control_fit=control_fit)
