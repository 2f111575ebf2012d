"""Allowed (nu_+, nu_-) region of two-mode states for B = 0..5.

Writes out/region/region.{csv,svg} and prints the symmetric boundary point
nu_+ = nu_- for each B.
"""

import argparse

from ne_uncertainty import bounds, cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/region")
    args = p.parse_args()
    code = cli.main(["region", "--b", "0:5:1", "--nu", "0.5:4:0.05", "--svg", "--out", args.out])
    if code != cli.EXIT_OK:
        raise SystemExit(code)
    for b in range(6):
        print(f"B = {b}: symmetric boundary at nu = {bounds.h_inverse(b / 2):.6f}")


if __name__ == "__main__":
    main()
