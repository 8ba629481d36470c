"""Piecewise-smooth limit: X+ above y=0, X- below, Filippov sliding on y=0."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import BoundaryCase, EventConvergenceFailure, MaxSegments, NotSliding, NoReturn
from .model import ZERO_TOL, NormalFormParams, Theta, minus_field, plus_field
from .numerics import Event, Section, integrate


class Side(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    SLIDING = "sliding"


class SigmaPointKind(str, enum.Enum):
    CROSSING = "crossing"
    SLIDING = "sliding"
    FOLD_VISIBLE = "fold_visible"
    FOLD_INVISIBLE = "fold_invisible"
    DEGENERATE_TANGENCY = "degenerate_tangency"


class BebLabel(str, enum.Enum):
    BF1 = "BF1"; BF2 = "BF2"; BF3 = "BF3"; BF4 = "BF4"; BF5 = "BF5"
    BN1 = "BN1"; BN2 = "BN2"; BN3 = "BN3"; BN4 = "BN4"
    BS1 = "BS1"; BS2 = "BS2"; BS3 = "BS3"


@dataclass(frozen=True)
class PwsState:
    x: float
    y: float
    side: Side

    def __post_init__(self):
        tol = 1e-12
        ok = {Side.PLUS: self.y >= -tol, Side.MINUS: self.y <= tol,
              Side.SLIDING: abs(self.y) <= tol}[Side(self.side)]
        if not ok:
            raise ValueError(f"side {self.side} inconsistent with y={self.y}")


def _mu(p: NormalFormParams, mu: Optional[float]) -> float:
    return p.mu if mu is None else mu


def normal_speed_plus(p: NormalFormParams, x: float, mu: Optional[float] = None) -> float:
    """(X+ f)(x, 0) = x + theta2(x, 0, mu)."""
    mu = _mu(p, mu)
    return x + (p.theta2(x, 0.0, mu) if p.theta2 else 0.0)


def second_lie_plus(p: NormalFormParams, x: float, mu: Optional[float] = None) -> float:
    """X+(X+ f) at (x, 0)."""
    mu = _mu(p, mu)
    P = mu + p.tau * x + (p.theta1(x, 0.0, mu) if p.theta1 else 0.0)
    Q = normal_speed_plus(p, x, mu)
    gx, gy = p.theta2.grad(x, 0.0, mu) if p.theta2 else (0.0, 0.0)
    return (1.0 + gx) * P + gy * Q


def sliding_field_x(p: NormalFormParams, x: float, mu: Optional[float] = None) -> float:
    """x-component of the Filippov field on y = 0 written as a quotient."""
    mu = _mu(p, mu)
    th1 = p.theta1(x, 0.0, mu) if p.theta1 else 0.0
    th2 = p.theta2(x, 0.0, mu) if p.theta2 else 0.0
    return (mu + p.gamma * x + th1 - (p.tau - p.gamma) * th2) / (1.0 - x - th2)


def sliding_field_convex(p: NormalFormParams, x: float, mu: Optional[float] = None) -> np.ndarray:
    """Filippov field as the convex combination tangent to y = 0."""
    mu = _mu(p, mu)
    zp = plus_field(p, mu)(0.0, np.array([x, 0.0]))
    zm = minus_field(p)(0.0, np.array([x, 0.0]))
    lam = zm[1] / (zm[1] - zp[1])
    return lam * zp + (1.0 - lam) * zm


def classify_sigma_point(p: NormalFormParams, x: float, mu: Optional[float] = None,
                         tol: float = ZERO_TOL) -> SigmaPointKind:
    mu = _mu(p, mu)
    a = normal_speed_plus(p, x, mu)         # (X- f) = 1 on all of y = 0
    if abs(a) > tol * max(1.0, abs(x)):
        return SigmaPointKind.CROSSING if a > 0 else SigmaPointKind.SLIDING
    b = second_lie_plus(p, x, mu)
    if abs(b) <= tol:
        return SigmaPointKind.DEGENERATE_TANGENCY
    return SigmaPointKind.FOLD_VISIBLE if b > 0 else SigmaPointKind.FOLD_INVISIBLE


def pws_field(p: NormalFormParams, state: PwsState, mu: Optional[float] = None) -> np.ndarray:
    mu = _mu(p, mu)
    side = Side(state.side)
    z = np.array([state.x, state.y])
    if side is Side.PLUS:
        return plus_field(p, mu)(0.0, z)
    if side is Side.MINUS:
        return minus_field(p)(0.0, z)
    kind = classify_sigma_point(p, state.x, mu)
    if kind is SigmaPointKind.CROSSING:
        raise NotSliding(f"x={state.x} is a crossing point", "sliding region")
    return np.array([sliding_field_x(p, state.x, mu), 0.0])


def fold_point(p: NormalFormParams, mu: Optional[float] = None, x0: float = 0.0) -> float:
    """Root of x + theta2(x, 0, mu) closest to x0 (Newton)."""
    mu = _mu(p, mu)
    x = x0
    for _ in range(60):
        f = normal_speed_plus(p, x, mu)
        gx = 1.0 + (p.theta2.grad(x, 0.0, mu)[0] if p.theta2 else 0.0)
        dx = f / gx
        x -= dx
        if abs(dx) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def sliding_equilibrium(p: NormalFormParams, mu: Optional[float] = None) -> float:
    """Zero of the sliding numerator near -mu/gamma (Newton)."""
    mu = _mu(p, mu)
    x = -mu / p.gamma
    g = lambda x: (mu + p.gamma * x + (p.theta1(x, 0.0, mu) if p.theta1 else 0.0)
                   - (p.tau - p.gamma) * (p.theta2(x, 0.0, mu) if p.theta2 else 0.0))
    for _ in range(60):
        h = 1e-7 * max(1e-8, abs(x))
        d = (g(x + h) - g(x - h)) / (2 * h)
        dx = g(x) / d
        x -= dx
        if abs(dx) < 1e-15 * max(1e-12, abs(x)):
            break
    return x


# ---------------------------------------------------------------------------
# hybrid flow

@dataclass
class PwsTrajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    side: List[str]
    event_flag: List[int]
    segments: int = 0

    @property
    def final(self) -> PwsState:
        return PwsState(float(self.x[-1]), float(self.y[-1]), Side(self.side[-1]))


def pws_flow(p: NormalFormParams, state: PwsState, t_end: float, tol: float = 1e-11,
             max_segments: int = 1000, mu: Optional[float] = None) -> PwsTrajectory:
    """Hybrid integration with exact switching at y = 0 and Filippov sliding."""
    mu = _mu(p, mu)
    Xp, Xm = plus_field(p, mu), minus_field(p)
    down = Section((0.0, 1.0), 0.0, direction=-1)
    up = Section((0.0, 1.0), 0.0, direction=+1)
    leave = Event(lambda t, z: normal_speed_plus(p, z[0], mu), direction=+1)

    def slide(t, z):
        return np.array([sliding_field_x(p, z[0], mu), 0.0])

    ts, xs, ys, sides, flags = [], [], [], [], []
    t = 0.0
    cur = state
    side = Side(cur.side)
    if side is Side.SLIDING and classify_sigma_point(p, cur.x, mu) is SigmaPointKind.CROSSING:
        raise NotSliding(f"x={cur.x} is a crossing point", "sliding region")
    segs = 0
    z = np.array([cur.x, cur.y])
    while t < t_end:
        segs += 1
        if segs > max_segments:
            raise MaxSegments(f"more than {max_segments} segments before t={t_end}")
        if side is Side.PLUS:
            tr = integrate(lambda s, w: Xp(s, w), z, (t, t_end), tol=tol, sections=[down])
        elif side is Side.MINUS:
            tr = integrate(lambda s, w: Xm(s, w), z, (t, t_end), tol=tol, sections=[up])
        else:
            tr = integrate(slide, z, (t, t_end), tol=tol, sections=[leave])
        n0 = 0 if not ts else 1      # drop duplicated junction sample
        for i in range(n0, len(tr.t)):
            ts.append(tr.t[i]); xs.append(tr.y[i, 0]); ys.append(tr.y[i, 1])
            sides.append(side.value); flags.append(0)
        t = float(tr.t[-1])
        z = tr.y[-1].copy()
        if tr.termination != "event":
            break
        if side is not Side.SLIDING and abs(z[1]) > 1e-10:
            raise EventConvergenceFailure(f"switching event off y=0 by {z[1]:.3g}")
        z[1] = 0.0
        flags[-1] = 1
        kind = classify_sigma_point(p, z[0], mu, tol=1e-9)
        if side is Side.PLUS:
            side = Side.SLIDING if kind is SigmaPointKind.SLIDING else Side.PLUS
            if side is Side.PLUS:
                z[1] = 1e-14    # grazing contact; stay above
        elif side is Side.MINUS:
            if kind is SigmaPointKind.CROSSING or kind is SigmaPointKind.FOLD_VISIBLE:
                side = Side.PLUS
            else:
                side = Side.SLIDING
        else:
            # the sliding segment reached a tangency: leave into y > 0
            if kind is SigmaPointKind.DEGENERATE_TANGENCY:
                raise EventConvergenceFailure("sliding reached a degenerate tangency")
            z[0] = fold_point(p, mu, z[0])
            side = Side.PLUS
        ys[-1] = 0.0
        xs[-1] = z[0]
    return PwsTrajectory(np.array(ts), np.array(xs), np.array(ys), sides, flags, segs)


# ---------------------------------------------------------------------------
# separatrix oracles and the classifier

def fold_separatrix_landing(p: NormalFormParams, mu: float, tol: float = 1e-12) -> float:
    """x where the forward X+ orbit from the visible fold point returns to y = 0."""
    xf = fold_point(p, mu)
    tr = integrate(plus_field(p, mu), [xf, 0.0], (0.0, 1e4 / max(1e-12, abs(p.tau))),
                   tol=tol, sections=[Section((0.0, 1.0), 0.0, direction=-1)])
    if tr.termination != "event":
        raise NoReturn("fold separatrix does not return to y=0")
    return float(tr.final[0])


def fold_separatrix_hits(p: NormalFormParams, mu: float = 1e-3) -> bool:
    """Does the fold separatrix of X+ land on the sliding segment between the
    sliding equilibrium and the fold?"""
    xl = fold_separatrix_landing(p, mu)
    xe, xf = sliding_equilibrium(p, mu), fold_point(p, mu)
    return min(xe, xf) < xl < max(xe, xf)


def saddle_separatrix_landing(p: NormalFormParams, mu: float, tol: float = 1e-12) -> float:
    """x where the downward unstable branch of the X+ saddle reaches y = 0."""
    from scipy.optimize import fsolve
    F = plus_field(p, mu)
    z0 = fsolve(lambda z: F(0.0, z), [0.0, mu / p.delta], xtol=1e-14)
    h = 1e-7
    J = np.column_stack([(F(0, z0 + h * e) - F(0, z0 - h * e)) / (2 * h) for e in np.eye(2)])
    ev, V = np.linalg.eig(J)
    if np.iscomplexobj(ev) and np.any(np.abs(ev.imag) > 0) or not (ev.real.min() < 0 < ev.real.max()):
        raise BoundaryCase("X+ equilibrium is not a saddle", "saddle")
    v = np.real(V[:, np.argmax(ev.real)])
    if v[1] > 0:
        v = -v
    seed = z0 + 1e-8 * abs(mu) * v / np.linalg.norm(v)
    tr = integrate(F, seed, (0.0, 1e4), tol=tol, sections=[Section((0.0, 1.0), 0.0, direction=-1)])
    if tr.termination != "event":
        raise NoReturn("saddle separatrix does not reach y=0")
    return float(tr.final[0])


def saddle_separatrix_hits(p: NormalFormParams, mu: float = -1e-3) -> bool:
    xl = saddle_separatrix_landing(p, mu)
    xe, xf = sliding_equilibrium(p, mu), fold_point(p, mu)
    return min(xe, xf) < xl < max(xe, xf)


def _is_zero(q: float, scale: float) -> bool:
    return abs(q) < ZERO_TOL * max(1.0, scale)


def classify_beb(p: NormalFormParams) -> BebLabel:
    """Twelve-way classification by the sign tuple (tau, delta, disc, gamma)."""
    from .connect import bs_het_gamma0, linear_return
    tau, delta, gamma, disc = p.tau, p.delta, p.gamma, p.disc
    scale = max(abs(tau), abs(delta), tau * tau)
    for name, q in (("tau", tau), ("delta", delta), ("disc", disc), ("gamma", gamma)):
        if _is_zero(q, scale):
            raise BoundaryCase(f"{name} is zero within tolerance", name)
    lin = replace(p, mu=0.0, theta1=Theta(), theta2=Theta())
    if delta < 0:
        if gamma > 0:
            return BebLabel.BS3
        g0 = bs_het_gamma0(p)
        if _is_zero(gamma - g0, scale):
            raise BoundaryCase("gamma is on the BS separatrix boundary", "gamma_het0")
        # orientation: which side of g0 makes the saddle separatrix hit the segment
        probe_hits = saddle_separatrix_hits(replace(lin, gamma=0.5 * g0))
        above = gamma > g0
        return BebLabel.BS2 if above == probe_hits else BebLabel.BS1
    if disc > 0:
        return {(False, False): BebLabel.BN1, (True, True): BebLabel.BN2,
                (True, False): BebLabel.BN3, (False, True): BebLabel.BN4}[(tau > 0, gamma > 0)]
    if tau > 0 and gamma > 0:
        g0 = linear_return(p).gamma_hom0
        if _is_zero(gamma - g0, scale):
            raise BoundaryCase("gamma is on the BF homoclinic boundary", "gamma_hom0")
        probe_hits = fold_separatrix_hits(replace(lin, gamma=0.5 * g0))
        below = gamma < g0
        return BebLabel.BF1 if below == probe_hits else BebLabel.BF2
    return {(True, False): BebLabel.BF3, (False, False): BebLabel.BF4,
            (False, True): BebLabel.BF5}[(tau > 0, gamma > 0)]
