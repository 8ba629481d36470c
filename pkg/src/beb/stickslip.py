"""Regularized stick-slip oscillator with a Stribeck-type friction law.

Z+ = (y - alpha, -x - mu(y)), Z- = (y - alpha, -x + mu(-y)),
mu(y) = mu_m + (mu_s - mu_m) exp(-rho y) + c y, blended as phi Z+ + (1 - phi) Z-.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .desing import numeric_jacobian
from .errors import NumericalFailure, ParameterError
from .model import ALGEBRAIC_SIGMOID, Regularization
from .numerics import CycleRecord, Section, find_limit_cycle, find_root, integrate
from .pws import PwsState, Side


@dataclass(frozen=True)
class StickSlipParams:
    mu_s: float = 1.0
    mu_m: float = 0.5
    rho: float = 4.0
    c: float = 0.85
    alpha: float = 0.0
    eps: float = 1e-3
    reg: Regularization = field(default=ALGEBRAIC_SIGMOID)

    def __post_init__(self):
        if not self.mu_s > self.mu_m > 0:
            raise ParameterError("need mu_s > mu_m > 0", "mu_s > mu_m > 0")
        if not self.rho > 0:
            raise ParameterError("need rho > 0", "rho > 0")
        if not 0 < self.c < self.rho * (self.mu_s - self.mu_m):
            raise ParameterError("need 0 < c < rho (mu_s - mu_m)", "c in (0, rho (mu_s - mu_m))")
        if not self.eps > 0:
            raise ParameterError("need eps > 0", "eps > 0")

    @property
    def slope0(self) -> float:
        """mu'(0) = -rho (mu_s - mu_m) + c."""
        return -self.rho * (self.mu_s - self.mu_m) + self.c

    @property
    def regime(self) -> str:
        """Degenerate BN3 for mu'(0) < -2, degenerate BF3 for mu'(0) in (-2, 0)."""
        return "BN3" if self.slope0 < -2 else "BF3"


BF3_PARAMS = StickSlipParams(rho=4.0)
BN3_PARAMS = StickSlipParams(rho=7.5)


def friction(p: StickSlipParams, y):
    return p.mu_m + (p.mu_s - p.mu_m) * np.exp(-p.rho * y) + p.c * y


def friction_slope(p: StickSlipParams, y):
    return -p.rho * (p.mu_s - p.mu_m) * np.exp(-p.rho * y) + p.c


def plus_side(p: StickSlipParams, x, y, alpha=None):
    a = p.alpha if alpha is None else alpha
    return np.array([y - a, -x - friction(p, y)])


def minus_side(p: StickSlipParams, x, y, alpha=None):
    a = p.alpha if alpha is None else alpha
    return np.array([y - a, -x + friction(p, -y)])


def stickslip_field(p: StickSlipParams, state, alpha: Optional[float] = None) -> np.ndarray:
    """PWS field for a PwsState, regularized field for a plain (x, y) pair."""
    if isinstance(state, PwsState):
        side = Side(state.side)
        if side is Side.PLUS:
            return plus_side(p, state.x, state.y, alpha)
        if side is Side.MINUS:
            return minus_side(p, state.x, state.y, alpha)
        # Filippov convex combination on y = 0
        zp, zm = plus_side(p, state.x, 0.0, alpha), minus_side(p, state.x, 0.0, alpha)
        lam = zm[1] / (zm[1] - zp[1])
        return lam * zp + (1 - lam) * zm
    x, y = state
    ph = float(p.reg.eval(y / p.eps))
    return ph * plus_side(p, x, y, alpha) + (1 - ph) * minus_side(p, x, y, alpha)


def regularized_field(p: StickSlipParams, alpha: Optional[float] = None):
    a = p.alpha if alpha is None else alpha
    phi, eps = p.reg.eval, p.eps
    mm, dm, r, c = p.mu_m, p.mu_s - p.mu_m, p.rho, p.c

    def f(t, z):
        x, y = z[0], z[1]
        ph = phi(y / eps)
        fp = mm + dm * math.exp(-r * y) + c * y
        fm = mm + dm * math.exp(r * y) - c * y
        return np.array([y - a, -x - ph * fp + (1 - ph) * fm])
    return f


def pws_plus_equilibrium(p: StickSlipParams, alpha: float) -> Tuple[float, float]:
    return -float(friction(p, alpha)), alpha


def equilibrium(p: StickSlipParams, alpha: float) -> Tuple[float, float]:
    ph = float(p.reg.eval(alpha / p.eps))
    return -ph * float(friction(p, alpha)) + (1 - ph) * float(friction(p, -alpha)), alpha


def equilibrium_trace(p: StickSlipParams, alpha: float) -> float:
    x, y = equilibrium(p, alpha)
    h = 1e-4 * p.eps
    return float(np.trace(numeric_jacobian(regularized_field(p, alpha), [x, y], h=h)))


def hopf_points(p: StickSlipParams, alpha_range: Tuple[float, float] = (0.0, 0.5),
                n: int = 2001) -> List[float]:
    """alpha values where the trace at the equilibrium changes sign (det = 1 > 0)."""
    grid = np.linspace(alpha_range[0], alpha_range[1], n)
    # resolve the switching layer, where the first crossing sits
    fine = np.geomspace(p.eps * 1e-2, min(50 * p.eps, alpha_range[1]), 400)
    grid = np.unique(np.concatenate([grid, fine[(fine > alpha_range[0])]]))
    tr = np.array([equilibrium_trace(p, a) for a in grid])
    out = []
    for i in range(len(grid) - 1):
        if np.sign(tr[i]) != np.sign(tr[i + 1]) and tr[i] != 0:
            out.append(find_root(lambda a: equilibrium_trace(p, a), (grid[i], grid[i + 1]),
                                 tol=1e-6))
    return out


@dataclass
class StickSlipPoint:
    alpha: float
    x_eq: float
    trace: float
    cycle: Optional[CycleRecord] = None
    amplitude: float = 0.0           # max x over the cycle minus x_eq
    note: str = ""


def _cycle_at(p: StickSlipParams, alpha: float, guess: np.ndarray, x_eq: float,
              settle_laps: int = 3) -> CycleRecord:
    f = regularized_field(p, alpha)
    sec = Section((1.0, 0.0), x_eq, +1, True)
    # relax toward the attracting cycle before Newton
    z = np.array(guess, dtype=float)
    z[0] = x_eq
    for _ in range(settle_laps):
        tr = integrate(f, z, (0.0, 200.0), tol=1e-9, sections=[sec], method="LSODA",
                       record=False)
        if tr.termination != "event":
            break
        z = tr.final
    rec = find_limit_cycle(f, sec, z, tol=1e-8, t_max=200.0, method="LSODA", int_tol=1e-10,
                           fd_scale=max(1e-2, abs(z[1] - alpha)), mu=alpha)
    return rec


def stickslip_experiment(p: StickSlipParams, alpha_grid: Sequence[float]) -> dict:
    """Equilibrium branch, Hopf points and a forward-continued cycle branch.

    The cycle branch is followed from the first Hopf point up to the second
    (or the end of the grid); each cycle seeds the next grid point.
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    hopf = hopf_points(p, (float(alphas.min()), float(alphas.max())))
    points: List[StickSlipPoint] = []
    guess = None
    # a grid ending before the second Hopf point still gets its cycles
    lo = hopf[0] if hopf else math.inf
    hi = hopf[1] if len(hopf) >= 2 else math.inf
    for a in alphas:
        xe, _ = equilibrium(p, a)
        tr = equilibrium_trace(p, a)
        pt = StickSlipPoint(a, xe, tr)
        if lo < a < hi and tr > 0:
            if guess is None:
                guess = np.array([xe, a + 1e-2])
            try:
                rec = _cycle_at(p, a, guess, xe)
                pt.cycle = rec
                pt.amplitude = rec.amplitude - xe
                guess = rec.point
            except NumericalFailure as e:
                pt.note = f"no cycle: {e}"
        points.append(pt)
    return {"hopf": hopf, "points": points}


def amplitude_ratios(points: Sequence[StickSlipPoint], skip_onset: int = 1) -> np.ndarray:
    """Consecutive-step amplitude ratios along the cycle branch.

    The first ``skip_onset`` steps after the Hopf point are left out since the
    square-root onset makes their ratio depend on the grid offset only.
    """
    amps = [pt.amplitude for pt in points if pt.cycle is not None and pt.amplitude > 0]
    amps = amps[skip_onset:]
    if len(amps) < 2:
        return np.array([])
    a = np.asarray(amps)
    return a[1:] / a[:-1]
