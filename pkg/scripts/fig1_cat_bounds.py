"""Bounds on sqrt(det V) for even and odd cat states against |alpha|.

Writes out/fig1/fig1_{even,odd}.{csv,svg} and prints where the NE bound
overtakes the pure-state bound and where g crosses one.
"""

import argparse
import csv
import os

from scipy import optimize

from ne_uncertainty import cli, measures, states


def crossing(rows):
    pairs = [(float(r["alpha"]), float(r["ne"]), float(r["pg"])) for r in rows if r["pg"] not in ("", "nan")]
    for (a, ne, pg), (b, ne2, pg2) in zip(pairs, pairs[1:]):
        if ne < pg and ne2 >= pg2:
            return 0.5 * (a + b)
    return None


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/fig1")
    args = p.parse_args()
    for kind in ("even", "odd"):
        code = cli.main(["fig1", kind, "--alpha", "0.05:3:0.05", "--svg", "--out", args.out])
        if code != cli.EXIT_OK:
            raise SystemExit(code)
        with open(os.path.join(args.out, f"fig1_{kind}.csv"), newline="") as fh:
            rows = list(csv.DictReader(fh))
        c = crossing(rows)
        print(f"{kind} cat: NE overtakes PG near |alpha| = {c:.3f}" if c else f"{kind} cat: no NE/PG crossing on the grid")
    root = optimize.brentq(lambda a: measures.gaussianity(states.even_cat(a, 40)) - 1, 1.3, 1.8, xtol=1e-10)
    print(f"even cat: g = 1 at |alpha| = {root:.4f}")


if __name__ == "__main__":
    main()
