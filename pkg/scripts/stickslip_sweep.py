"""Cycle amplitude against belt speed for the regularized stick-slip oscillator.

    python3 scripts/stickslip_sweep.py --rho 7.5 --step 1e-3
"""
import argparse

import numpy as np

from _common import write_csv
from beb.stickslip import StickSlipParams, amplitude_ratios, stickslip_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[4.0, 7.5])
    ap.add_argument("--alpha-max", type=float, default=0.22)
    ap.add_argument("--step", type=float, default=1e-3)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--out", default="results/stickslip.csv")
    a = ap.parse_args()
    grid = np.round(np.arange(0.0, a.alpha_max + 1e-12, a.step), 12)
    rows = []
    for rho in a.rho:
        p = StickSlipParams(rho=rho, eps=a.eps)
        res = stickslip_experiment(p, grid)
        r = amplitude_ratios(res["points"])
        print(f"rho={rho} ({p.regime}, slope {p.slope0:.2f}): Hopf at {res['hopf']}, "
              f"max amplitude ratio {r.max() if r.size else float('nan'):.3f}")
        for pt in res["points"]:
            lf = pt.cycle.log_floquet if pt.cycle is not None else float("nan")
            rows.append((rho, float(pt.alpha), pt.x_eq, pt.trace, pt.amplitude, lf, pt.note))
    write_csv(a.out, ["rho", "alpha", "x_eq", "trace", "amplitude", "log_floquet", "note"], rows)


if __name__ == "__main__":
    main()
