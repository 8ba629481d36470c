"""Command-line front end: ``beb <command> --config FILE [--out DIR] ...``.

Config files are flat key=value text. Normal-form keys follow the parameter
file format; run keys (grids, stick-slip constants) are listed in RUN_KEYS.
Exit codes: 0 success, 2 invalid config, 3 required quantity did not
converge, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BebError, NumericalFailure, ParameterError
from .model import NormalFormParams, params_from_text, params_to_text, parse_key_values

COMMANDS = ("classify", "diagram", "simulate", "homoclinic", "explosion", "stickslip")

RUN_KEYS = {
    "gamma_min", "gamma_max", "gamma_n", "s_grid", "eps_list", "hom_n",
    "x0", "y0", "side", "t_end",
    "mu_s", "mu_m", "rho", "c", "alpha_min", "alpha_max", "alpha_step",
    "explosive_ratio", "gradual_ratio",
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return "nan"
    return "%.17g" % float(v)


@dataclass
class RunConfig:
    command: str
    params: object
    run: Dict[str, str] = field(default_factory=dict)
    gamma_grid: Optional[np.ndarray] = None
    eps_list: Tuple[float, ...] = ()
    out: str = "."
    threads: int = 1

    def get(self, key: str, default: float) -> float:
        try:
            return float(self.run.get(key, default))
        except ValueError as exc:
            raise ParameterError(f"{key} must be numeric", key) from exc

    def floats(self, key: str, default: Sequence[float]) -> Tuple[float, ...]:
        if key not in self.run:
            return tuple(default)
        try:
            vals = tuple(float(v) for v in self.run[key].split(","))
        except ValueError as exc:
            raise ParameterError(f"{key} must be a comma list of numbers", key) from exc
        if not vals:
            raise ParameterError(f"{key} is empty", key)
        return vals


def parse_grid(text: str) -> np.ndarray:
    """a:b:n -> n evenly spaced values from a to b."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ParameterError(f"grid {text!r} must look like a:b:n", "grid syntax") from exc
    if n < 1 or b < a:
        raise ParameterError("grid needs n >= 1 and a <= b", "ordered non-empty grid")
    return np.linspace(a, b, n)


def load_config(command: str, path: str, grid: Optional[str], eps: Optional[str],
                out: str, threads: int) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParameterError(f"cannot read config {path!r}: {exc}", "config file") from exc
    kv = parse_key_values(text)
    run = {k: v for k, v in kv.items() if k in RUN_KEYS}
    rest = "\n".join(f"{k}={v}" for k, v in kv.items() if k not in RUN_KEYS)
    if command == "stickslip":
        from .stickslip import StickSlipParams
        extra = [k for k in kv if k not in RUN_KEYS and k not in ("eps", "reg")]
        if extra:
            raise ParameterError(f"unknown stick-slip keys {extra}", "known keys")
        try:
            params = StickSlipParams(**{k: float(run[k]) for k in ("mu_s", "mu_m", "rho", "c")
                                        if k in run},
                                     **({"eps": float(kv["eps"])} if "eps" in kv else {}))
        except ValueError as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(str(exc), "numeric value") from exc
    else:
        params = params_from_text(rest)
    cfg = RunConfig(command, params, run, out=out, threads=max(1, threads))
    if grid is not None:
        cfg.gamma_grid = parse_grid(grid)
    elif "gamma_min" in run:
        cfg.gamma_grid = np.linspace(cfg.get("gamma_min", 0), cfg.get("gamma_max", 0),
                                     int(cfg.get("gamma_n", 21)))
        if cfg.gamma_grid[-1] < cfg.gamma_grid[0]:
            raise ParameterError("gamma range must be ordered", "gamma_min <= gamma_max")
    if eps is not None:
        try:
            cfg.eps_list = tuple(float(e) for e in eps.split(","))
        except ValueError as exc:
            raise ParameterError("--eps must be a comma list", "eps list") from exc
    else:
        cfg.eps_list = cfg.floats("eps_list", (1e-3,))
    if any(e <= 0 for e in cfg.eps_list):
        raise ParameterError("eps values must be positive", "eps > 0")
    return cfg


# ---------------------------------------------------------------------------
# output helpers

class OrderedWriter:
    """Appends rows in grid order; a resume marker records how many rows are
    complete until the run finishes."""

    def __init__(self, path: str, header: Sequence[str]):
        self.path, self.header = path, list(header)
        self.marker = path + ".resume"
        self.done = 0
        if os.path.exists(self.marker) and os.path.exists(path):
            with open(self.marker, encoding="utf-8") as fh:
                self.done = int(fh.read().strip() or 0)
        else:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerow(self.header)
            self._mark()

    def _mark(self):
        with open(self.marker, "w", encoding="utf-8") as fh:
            fh.write(str(self.done))

    def append(self, row: Sequence):
        with open(self.path, "a", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow([fmt(v) for v in row])
        self.done += 1
        self._mark()

    def close(self):
        if os.path.exists(self.marker):
            os.remove(self.marker)


def run_ordered(fn: Callable, items: Sequence, writer: OrderedWriter, threads: int):
    """Evaluate fn over items (skipping rows already written) and append every
    returned row in item order."""
    todo = list(items)[writer.done:]
    if threads > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            for rows in ex.map(fn, todo):
                for r in rows:
                    writer.append(r)
    else:
        for it in todo:
            for r in fn(it):
                writer.append(r)


def check(name: str, ok: bool, **detail) -> dict:
    return {"name": name, "pass": bool(ok),
            **{k: (fmt(v) if isinstance(v, float) else v) for k, v in detail.items()}}


def write_summary(out: str, summary: dict):
    base = {"label": None, "bt_point": None, "gamma_hom0": None, "mu_hat_het": None, "checks": []}
    base.update(summary)
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(base, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands

def cmd_classify(cfg: RunConfig) -> dict:
    from .pws import classify_beb
    label = classify_beb(cfg.params)
    return {"label": label.value, "checks": [check("classified", True, label=label.value)]}


def _diagram_rows(args) -> List[list]:
    text, g = args
    p = params_from_text(text)
    from .desing import (l1_closed, mu_hat_ah, mu_hat_sn, numeric_ah, numeric_sn)
    from .errors import OutOfDomain
    q = replace(p, gamma=g)
    rows = []
    if g / p.delta > 0:
        m = mu_hat_sn(q, g)
        try:
            mn = numeric_sn(q, g)[0]
            res = abs(mn - m)
        except NumericalFailure:
            res = math.nan
        rows.append(["SN", g, m, math.nan, res])
    try:
        m = mu_hat_ah(q, g)
    except OutOfDomain:
        m = None
    if m is not None:
        try:
            mn = numeric_ah(q, g)[0]
            res = abs(mn - m)
        except NumericalFailure:
            res = math.nan
        l1 = l1_closed(q, g) if p.delta > 0 and g < p.delta / p.tau else math.nan
        rows.append(["AH", g, m, l1, res])
    return rows


def cmd_diagram(cfg: RunConfig) -> dict:
    from .connect import homoclinic_branch
    from .desing import bt_point, hom_slope, mu_hat_ah, mu_hat_hom_local, mu_hat_sn
    p: NormalFormParams = cfg.params
    grid = cfg.gamma_grid if cfg.gamma_grid is not None else np.linspace(-1, 2, 31)
    w = OrderedWriter(os.path.join(cfg.out, "curves.csv"), ["kind", "gamma", "mu_hat", "l1", "residual"])
    run_ordered(_diagram_rows, [(params_to_text(p), float(g)) for g in grid], w, cfg.threads)
    checks = []
    summary: dict = {}
    if p.tau > 0 and p.delta > 0:
        m_bt, g_bt = bt_point(p)
        summary["bt_point"] = [g_bt, m_bt]
        w.append(["BT", g_bt, m_bt, math.nan, 0.0])
        gap = max(abs(mu_hat_sn(p, g_bt) - m_bt), abs(mu_hat_ah(p, g_bt) - m_bt),
                  abs(mu_hat_hom_local(p, g_bt) - m_bt))
        checks.append(check("bt_tangency", gap <= 1e-10, gap=gap))
        n = int(cfg.get("hom_n", 8))
        gs = [g_bt - 0.1 * (i + 1) / (n + 1) for i in range(n)]
        gs = [g for g in gs if g > 0]
        branch = homoclinic_branch(p, gs)
        for r in branch:
            w.append(["HOM", r.meta["gamma"], r.critical_value, math.nan, r.residual])
        order_ok = all(0 < mu_hat_sn(p, r.meta["gamma"]) < mu_hat_ah(p, r.meta["gamma"])
                       < r.critical_value for r in branch)
        checks.append(check("ordering_sn_ah_hom", order_ok and bool(branch), points=len(branch)))
        if branch:
            r0 = branch[0]
            slope = (m_bt - r0.critical_value) / (g_bt - r0.meta["gamma"])
            checks.append(check("hom_slope_10pct", abs(slope - hom_slope(p)) <= 0.1 * hom_slope(p),
                                slope=slope, expected=hom_slope(p)))
    w.close()
    summary["checks"] = checks
    return summary


def cmd_simulate(cfg: RunConfig) -> dict:
    from .pws import PwsState, Side, pws_flow
    p: NormalFormParams = cfg.params
    st = PwsState(cfg.get("x0", -0.5), cfg.get("y0", 0.5), Side(cfg.run.get("side", "plus")))
    tr = pws_flow(p, st, cfg.get("t_end", 10.0))
    w = OrderedWriter(os.path.join(cfg.out, "trajectory.csv"), ["t", "x", "y", "side", "event_flag"])
    for row in zip(tr.t, tr.x, tr.y, tr.side, tr.event_flag):
        w.append([row[0], row[1], row[2], str(row[3]), str(int(row[4]))])
    w.close()
    return {"checks": [check("segments_finite", tr.segments >= 1, segments=tr.segments)]}


def cmd_homoclinic(cfg: RunConfig) -> dict:
    from .connect import homoclinic_branch, linear_return
    from .desing import bt_point
    p: NormalFormParams = cfg.params
    summary: dict = {"checks": []}
    if p.disc < 0 and p.tau > 0:
        lr = linear_return(p)
        summary["gamma_hom0"] = lr.gamma_hom0
        summary["t_d"] = lr.t_d
        summary["X_d"] = lr.X_d
        summary["checks"].append(check("R_at_t_d", lr.R_residual <= 1e-10, residual=lr.R_residual))
    m_bt, g_bt = bt_point(p)
    grid = cfg.gamma_grid if cfg.gamma_grid is not None else np.linspace(g_bt * 0.98, g_bt * 0.2, 20)
    w = OrderedWriter(os.path.join(cfg.out, "curves.csv"),
                      ["kind", "gamma", "mu_hat", "l1", "residual"])
    branch = homoclinic_branch(p, [float(g) for g in grid if 0 < g < g_bt])
    for r in branch:
        w.append(["HOM", r.meta["gamma"], r.critical_value, math.nan, r.residual])
    w.close()
    summary["bt_point"] = [g_bt, m_bt]
    summary["checks"].append(check("hom_residuals", all(r.residual <= 1e-8 for r in branch),
                                   points=len(branch)))
    return summary


def cmd_explosion(cfg: RunConfig) -> dict:
    from .connect import bn3_family, growth_exponent, heteroclinic_mu_hat
    p: NormalFormParams = cfg.params
    het = heteroclinic_mu_hat(replace(p, mu=0.0))
    s_grid = cfg.floats("s_grid", (0.1, 0.3, 1.0))
    w = OrderedWriter(os.path.join(cfg.out, "cycles.csv"),
                      ["s", "mu", "eps", "amplitude", "period", "floquet", "hausdorff"])
    all_recs = []
    for eps in cfg.eps_list:
        recs = bn3_family(p, eps, s_grid, mu_hat_het=het.critical_value)
        all_recs.append(recs)
        for r in recs:
            w.append([r.s, r.mu, r.eps, r.amplitude, r.period, r.floquet, r.hausdorff])
    w.close()
    checks = [check("heteroclinic_residual", het.residual <= 1e-8, residual=het.residual)]
    for recs in all_recs:
        mus = [r.mu for r in recs]
        ok = all(np.isfinite(mus)) and all(b > a for a, b in zip(mus, mus[1:]))
        checks.append(check(f"mu_monotone_eps_{fmt(recs[0].eps)}", ok))
        checks.append(check(f"stable_eps_{fmt(recs[0].eps)}",
                            all(r.log_floquet < 0 for r in recs)))
    return {"mu_hat_het": het.critical_value, "lambda": growth_exponent(p), "checks": checks}


def cmd_stickslip(cfg: RunConfig) -> dict:
    from .stickslip import amplitude_ratios, pws_plus_equilibrium, stickslip_experiment
    p = cfg.params
    grid = np.arange(cfg.get("alpha_min", 0.0), cfg.get("alpha_max", 0.22) + 1e-12,
                     cfg.get("alpha_step", 1e-3))
    res = stickslip_experiment(p, grid)
    w = OrderedWriter(os.path.join(cfg.out, "stickslip.csv"),
                      ["alpha", "x_eq", "trace", "amplitude", "period", "floquet"])
    for pt in res["points"]:
        c = pt.cycle
        w.append([pt.alpha, pt.x_eq, pt.trace, pt.amplitude if c else 0.0,
                  c.period if c else math.nan, c.floquet if c else math.nan])
    w.close()
    ratios = amplitude_ratios(res["points"])
    rmax = float(ratios.max()) if ratios.size else math.nan
    xe, ye = pws_plus_equilibrium(p, 0.0)
    checks = [check("two_hopf_points", len(res["hopf"]) == 2, hopf=res["hopf"]),
              check("beb_point", abs(xe + p.mu_s) < 1e-12 and ye == 0.0)]
    if p.regime == "BN3":
        checks.append(check("explosive", rmax > cfg.get("explosive_ratio", 10.0), max_ratio=rmax))
    else:
        checks.append(check("gradual", rmax < cfg.get("gradual_ratio", 2.0), max_ratio=rmax))
    return {"label": p.regime, "hopf": res["hopf"], "slope0": p.slope0, "checks": checks}


HANDLERS = {"classify": cmd_classify, "diagram": cmd_diagram, "simulate": cmd_simulate,
            "homoclinic": cmd_homoclinic, "explosion": cmd_explosion, "stickslip": cmd_stickslip}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="beb", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=".")
    ap.add_argument("--grid-γ", "--grid-gamma", dest="grid", default=None)
    ap.add_argument("--eps", default=None)
    ap.add_argument("--threads", type=int, default=1)
    return ap


def run(cfg: RunConfig) -> dict:
    os.makedirs(cfg.out, exist_ok=True)
    summary = HANDLERS[cfg.command](cfg)
    summary.setdefault("command", cfg.command)
    write_summary(cfg.out, summary)
    return summary


def _glue_values(argv: List[str]) -> List[str]:
    # argparse reads "-1:2:5" as an option; attach values to their flags
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--grid-γ", "--grid-gamma", "--eps") and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_glue_values(argv))
    try:
        cfg = load_config(args.command, args.config, args.grid, args.eps, args.out, args.threads)
        run(cfg)
    except ParameterError as exc:
        print(f"beb: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"beb: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"beb: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except BebError as exc:
        print(f"beb: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
