"""Heteroclinic value against the Hopf value across gamma in the BN3 region.

    python3 scripts/heteroclinic_sweep.py --gamma -2 -1 -0.5
"""
import argparse

from _common import write_csv
from beb.connect import heteroclinic_mu_hat
from beb.desing import mu_hat_ah
from beb.model import NormalFormParams, direct_tail


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--gamma", type=float, nargs="+", default=[-2.0, -1.5, -1.0, -0.5, -0.25])
    ap.add_argument("--out", default="results/heteroclinic_sweep.csv")
    a = ap.parse_args()
    rows = []
    for g in a.gamma:
        p = NormalFormParams(a.tau, a.delta, g, reg=direct_tail(a.k, a.beta))
        r = heteroclinic_mu_hat(p)
        ah = mu_hat_ah(p, g)
        rows.append((g, r.critical_value, ah, r.residual, r.transversality))
        print("gamma=%.3f  het=%.10f  ah=%.10f  residual=%.1e  d(sep)/d(mu)=%.3g" % rows[-1])
    write_csv(a.out, ["gamma", "mu_hat_het", "mu_hat_ah", "residual", "transversality"], rows)


if __name__ == "__main__":
    main()
