"""Homoclinic gamma of the inner (eps_hat) system converging to the BF split value.

    python3 scripts/inner_homoclinic.py --eps-hat 0.05 0.02 0.01 0.005
"""
import argparse
import time

from _common import write_csv
from beb.connect import homoclinic_inner, linear_return
from beb.model import NormalFormParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--eps-hat", type=float, nargs="+", default=[0.05, 0.02, 0.01, 0.005])
    ap.add_argument("--out", default="results/inner_homoclinic.csv")
    a = ap.parse_args()
    g0 = linear_return(NormalFormParams(a.tau, a.delta, 0.5)).gamma_hom0
    p = NormalFormParams(a.tau, a.delta, g0)
    print(f"gamma_hom0 = {g0:.12f}")
    rows = []
    for e in a.eps_hat:
        t0 = time.time()
        r = homoclinic_inner(p, e)
        rows.append((e, r.critical_value, r.critical_value - g0, r.residual))
        print("eps_hat=%.4g  gamma=%.8f  shift=%+.3e  residual=%.1e" % rows[-1]
              + f"  ({time.time() - t0:.0f}s)")
    write_csv(a.out, ["eps_hat", "gamma", "gamma_minus_gamma_hom0", "residual"], rows)


if __name__ == "__main__":
    main()
