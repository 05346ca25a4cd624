"""Write synthetic datasets shaped like the 2-Year and 5-Year FOMC samples to data/."""

import argparse
from pathlib import Path

from hfes.data_io import write_dataset
from hfes.fixtures import FIVE_YEAR, PANEL_B, TWO_YEAR, headline_fixture


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    two = headline_fixture(**TWO_YEAR, bucket_variances=PANEL_B, seed=args.seed)
    five = headline_fixture(**FIVE_YEAR, seed=args.seed + 1)
    write_dataset(two, out / "fixture_2y.csv")
    write_dataset(five, out / "fixture_5y.csv")
    print(f"wrote {out / 'fixture_2y.csv'} (T_P={two.t_p}, T_C={two.t_c})")
    print(f"wrote {out / 'fixture_5y.csv'} (T_P={five.t_p}, T_C={five.t_c})")


if __name__ == "__main__":
    main()
