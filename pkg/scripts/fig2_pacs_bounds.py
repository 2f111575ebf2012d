"""Bounds for the photon-added coherent state against |alpha|.

Writes out/fig2/fig2_pacs.{csv,svg}; prints the endpoints and the g = 1 point.
"""

import argparse
import csv
import os

from scipy import optimize

from ne_uncertainty import cli, measures, states


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/fig2")
    args = p.parse_args()
    code = cli.main(["fig2", "--alpha", "0:3:0.05", "--svg", "--out", args.out])
    if code != cli.EXIT_OK:
        raise SystemExit(code)
    with open(os.path.join(args.out, "fig2_pacs.csv"), newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in (rows[0], rows[-1]):
        print(f"|alpha| = {r['alpha']}: sqrt(det V) = {r['sqrt_det_v']}, NE = {r['ne']}")
    root = optimize.brentq(lambda a: measures.gaussianity(states.pacs(a, 40)) - 1, 0.3, 0.9, xtol=1e-10)
    print(f"g = 1 at |alpha| = {root:.4f}")


if __name__ == "__main__":
    main()
