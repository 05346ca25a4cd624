"""Announcement-window shock variance with and without leakage, plus the
autoregression ladder it induces on the days before an announcement."""

import argparse

import numpy as np

from hfes.diagnostics import autoregression_ladder, ladder_pairs, panel_c_csv
from hfes.dgp import LeakageParams, leakage_limit_variance, simulate_leakage_paths


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--theta", default="0.5,0.3")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    theta = tuple(float(t) for t in args.theta.split(","))

    print(f"MA limit 1 + sum(theta^2) = {leakage_limit_variance(theta):.4f}")
    print(f"{'sigma':>8}{'Var None':>14}{'Var Inverse':>14}")
    for sigma in (10.0, 100.0, 1000.0):
        row = []
        for mode in ("None", "Inverse"):
            p = LeakageParams([1.0] * 7 + [sigma], mode, theta)
            row.append(np.var(simulate_leakage_paths(p, args.paths, args.seed)[:, -1]))
        print(f"{sigma:8.0f}{row[0]:14.4g}{row[1]:14.4f}")

    p = LeakageParams([1.0] * 7 + [1000.0], "Inverse", theta)
    paths = simulate_leakage_paths(p, 200, args.seed)[:, ::-1]
    print("\nladder on 200 announcements:")
    print(panel_c_csv(autoregression_ladder(ladder_pairs(paths))), end="")


if __name__ == "__main__":
    main()
