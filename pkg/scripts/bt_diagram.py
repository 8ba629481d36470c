"""Saddle-node, Hopf and homoclinic curves of the desingularized system near BT.

    python3 scripts/bt_diagram.py --tau 1 --delta 1 --k 1 --out results/bt_diagram.csv
"""
import argparse
import math

import numpy as np

from _common import write_csv
from beb.connect import homoclinic_mu_hat
from beb.desing import bt_point, hom_slope, mu_hat_ah, mu_hat_hom_local, mu_hat_sn
from beb.errors import NumericalFailure, OutOfDomain
from beb.model import NormalFormParams, direct_tail


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--gamma-min", type=float, default=0.15)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--out", default="results/bt_diagram.csv")
    a = ap.parse_args()
    p = NormalFormParams(a.tau, a.delta, 0.0, reg=direct_tail(a.k, a.beta))
    m_bt, g_bt = bt_point(p)
    print(f"BT at gamma={g_bt:.10f}, mu_hat={m_bt:.10f}; local homoclinic slope {hom_slope(p):.6f}")
    rows = []
    # the homoclinic value blows up as gamma approaches its lower end, so stay away from it
    for g in np.linspace(g_bt - 1e-3, a.gamma_min, a.n):
        try:
            hom = homoclinic_mu_hat(p, g).critical_value
        except NumericalFailure as e:
            print(f"gamma={g:.4f}: homoclinic solve failed ({e})")
            hom = math.nan
        try:
            local = mu_hat_hom_local(p, g)
        except OutOfDomain:
            local = math.nan
        row = (float(g), mu_hat_sn(p, g), mu_hat_ah(p, g), hom, local)
        print("gamma=%.4f  sn=%.6f  ah=%.6f  hom=%.6f  hom_local=%.6f" % row)
        rows.append(row)
    write_csv(a.out, ["gamma", "mu_hat_sn", "mu_hat_ah", "mu_hat_hom", "mu_hat_hom_local"], rows)


if __name__ == "__main__":
    main()
