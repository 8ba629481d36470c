"""Cycle family of the regularized BN3 system for a list of eps values.

Records mu(s, eps), the scaled offset from the heteroclinic value, period,
log Floquet multiplier and the Hausdorff distance to the singular cycle.

    python3 scripts/bn3_explosion.py --eps 1e-2 1e-3 1e-4 --s 0.1 0.3 1.0
"""
import argparse
import math
import time

from _common import write_csv
from beb.connect import bn3_family, heteroclinic_mu_hat
from beb.model import NormalFormParams, regularization_by_name


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--gamma", type=float, default=-1.0)
    ap.add_argument("--reg", default="arctan")
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    ap.add_argument("--s", type=float, nargs="+", default=[0.1, 0.3, 0.6, 1.0])
    ap.add_argument("--out", default="results/bn3_explosion.csv")
    a = ap.parse_args()
    p = NormalFormParams(a.tau, a.delta, a.gamma, reg=regularization_by_name(a.reg))
    het = heteroclinic_mu_hat(p).critical_value
    scale_exp = p.k / (1.0 + p.k)
    print(f"mu_hat_het = {het:.12f}")
    rows = []
    for eps in a.eps:
        t0 = time.time()
        for r in bn3_family(p, eps, a.s, mu_hat_het=het):
            off = r.mu / eps ** scale_exp - het
            rows.append((eps, r.s, r.mu, off, r.amplitude, r.period, r.log_floquet, r.hausdorff))
            print("eps=%.0e s=%.2f mu=%.8f offset=%+.3e period=%.3f logF=%.3g haus=%.3g"
                  % (eps, r.s, r.mu, off, r.period, r.log_floquet, r.hausdorff))
        print(f"  ({time.time() - t0:.0f}s)")
    write_csv(a.out, ["eps", "s", "mu", "scaled_offset", "amplitude", "period", "log_floquet",
                      "hausdorff"], rows)
    if not all(math.isfinite(r[2]) for r in rows):
        print("some grid points failed; see nan rows")


if __name__ == "__main__":
    main()
