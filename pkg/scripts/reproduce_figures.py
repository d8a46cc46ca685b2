"""Write fig3.csv, fig4.csv and fig5.csv and print a short digest of each."""

import argparse
import csv
from pathlib import Path

from signcompute.cli import main as cli_main


def digest(path: Path, keys):
    rows = list(csv.DictReader(path.open()))
    print(f"{path.name}: {len(rows)} rows")
    for r in (rows[0], rows[len(rows) // 2], rows[-1]):
        print("  " + ", ".join(f"{k}={r[k]}" for k in keys))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/figures")
    args = ap.parse_args()
    if cli_main(["figures", "--out", args.out]) != 0:
        raise SystemExit(1)
    out = Path(args.out)
    digest(out / "fig3.csv", ["L", "S_exact_K1", "lower_K1", "upper_K1", "S_exact_K16"])
    digest(out / "fig4.csv", ["K", "Rres_p3M", "Rres_p6M", "Rres_p12M"])
    digest(out / "fig5.csv", ["D", "Rnet_K3", "Rnet_K16", "upper"])


if __name__ == "__main__":
    main()
