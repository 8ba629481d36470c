"""Connecting orbits: the BF linear return data, saddle-homoclinic branches of
the desingularized system, the BN3 heteroclinic on the blow-up sphere, the
singular PWS cycles and the BN3 explosion sweep."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .blowup import rho1_reduced_field
from .desing import (find_equilibria, hat_field, jacobian_xy, mu_hat_ah, numeric_jacobian,
                     x1rho1_field, xy_field)
from .errors import (Blowup, NoBracket, NoConvergence, NoReturn, NoRoot, NoSaddle,
                     NoSignChange, NonMonotone, NumericalFailure, OutOfDomain,
                     SignConventionConflict, StepFailure)
from .model import NormalFormParams, Theta, full_field, plus_field
from .numerics import (CycleRecord, Event, Section, Trajectory, bisect_sign, find_root,
                       integrate, liouville_multiplier)


class ConnectionKind(str, enum.Enum):
    HOMOCLINIC_INNER = "homoclinic_inner"
    HOMOCLINIC_DESING = "homoclinic_desing"
    HETEROCLINIC_BN3 = "heteroclinic_bn3"
    HETEROCLINIC_BS = "heteroclinic_bs"


@dataclass
class ConnectionResult:
    kind: ConnectionKind
    critical_value: float
    residual: float
    orbit: Optional[Trajectory] = None
    transversality: float = float("nan")
    meta: Dict[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# BF linear return

SIGN_NOTE = ("the forward solution of the linearized X+ flow through the origin is "
             "Y(t) = (1 + exp(+tau t/2)((tau/w) sin(w t/2) - cos(w t/2)))/delta with "
             "w = sqrt(-disc), and X(t) = (2/w) exp(+tau t/2) sin(w t/2); the return "
             "time solves that bracket = 0 and gamma_hom0 = -1/X_d")


@dataclass
class LinearReturnData:
    t_d: float
    X_d: float
    gamma_hom0: float
    sign_convention_note: str = SIGN_NOTE
    R_residual: float = float("nan")
    X_d_integrated: float = float("nan")
    t_d_integrated: float = float("nan")
    gamma_hom0_formula: float = float("nan")


def return_function(p: NormalFormParams, t):
    """Return-time function with the growth factor of the forward flow."""
    w = math.sqrt(-p.disc)
    return 1.0 + np.exp(p.tau * t / 2) * (p.tau / w * np.sin(w * t / 2) - np.cos(w * t / 2))


def linear_return(p: NormalFormParams, tol: float = 1e-6) -> LinearReturnData:
    if not (p.disc < 0 and p.tau > 0):
        raise OutOfDomain("linear return needs disc < 0 and tau > 0", "disc < 0, tau > 0")
    w = math.sqrt(-p.disc)
    R = lambda t: float(return_function(p, t))
    t_end = 4 * math.pi / w
    a, step = 1e-3, 0.05
    ra = R(a)
    t_d = None
    while a < t_end:
        b = min(a + step, t_end)
        rb = R(b)
        if np.sign(ra) != np.sign(rb):
            # roundoff in R grows with the exp(tau t/2) factor
            scale = 1.0 + math.exp(p.tau * b / 2) * (p.tau / w + 1.0)
            t_d = find_root(R, (a, b), tol=1e-12 * scale)
            break
        a, ra = b, rb
    if t_d is None:
        raise NoRoot(f"no sign change of R before t={t_end:.6g}")
    X_d = 2.0 / w * math.exp(p.tau * t_d / 2) * math.sin(w * t_d / 2)
    g_formula = -0.5 * math.exp(-p.tau * t_d / 2) * w / math.sin(w * t_d / 2)

    lin = lambda t, z: np.array([1.0 + p.tau * z[0] - p.delta * z[1], z[0]])
    tr = integrate(lin, [0.0, 0.0], (0.0, 2 * t_end), tol=1e-13,
                   sections=[Section((0.0, 1.0), 0.0, -1, True)])
    if tr.termination != "event":
        raise NoReturn("linearized flow does not return to Y = 0")
    X_int, t_int = float(tr.final[0]), float(tr.t[-1])
    vals = {"formula": g_formula, "drop": -1.0 / X_d, "integration": -1.0 / X_int}
    spread = max(vals.values()) - min(vals.values())
    if spread > tol or abs(t_int - t_d) > tol:
        raise SignConventionConflict(
            f"gamma_hom0 evaluations disagree by {spread:.3g}", **vals, t_d=t_d, t_int=t_int)
    return LinearReturnData(t_d, X_d, -1.0 / X_int, SIGN_NOTE, abs(R(t_d)), X_int, t_int,
                            g_formula)


def bs_het_gamma0(p: NormalFormParams) -> float:
    if not p.delta < 0:
        raise OutOfDomain("strong heteroclinic split needs delta < 0", "delta < 0")
    return (p.tau - math.sqrt(p.disc)) / 2


# ---------------------------------------------------------------------------
# saddle loops of planar fields

@dataclass
class _Loop:
    mismatch: float
    orbit_u: Optional[Trajectory] = None
    orbit_s: Optional[Trajectory] = None


def _branch(J: np.ndarray, sign: int, toward: np.ndarray) -> np.ndarray:
    ev, V = np.linalg.eig(J)
    i = int(np.argmax(ev.real)) if sign > 0 else int(np.argmin(ev.real))
    v = np.real(V[:, i])
    v = v / np.linalg.norm(v)
    return v if np.dot(v, toward) > 0 else -v


def saddle_loop_mismatch(field_fn: Callable, saddle: np.ndarray, antisaddle: np.ndarray,
                         J: np.ndarray, seed: float = 1e-6, t_max: float = 1e4,
                         tol: float = 1e-12, bound: float = 1e6, keep: bool = False,
                         method: str = "DOP853") -> _Loop:
    """Y-gap between the saddle's unstable and stable branches on {X = X_a, Y > Y_a}."""
    toward = antisaddle - saddle
    scale = max(1.0, float(np.linalg.norm(antisaddle)))
    vu = _branch(J, +1, toward)
    vs = _branch(J, -1, toward)
    out = []
    for v, sgn, direction in ((vu, 1.0, -1), (vs, -1.0, +1)):
        f = (lambda t, z: field_fn(t, z)) if sgn > 0 else (lambda t, z: -field_fn(t, z))
        sec = Section((1.0, 0.0), float(antisaddle[0]), direction, True)
        try:
            tr = integrate(f, saddle + seed * scale * v, (0.0, t_max), tol=tol, sections=[sec],
                           blowup=bound * scale, record=keep, method=method)
        except (Blowup, StepFailure):
            out.append((math.inf, None))
            continue
        if tr.termination != "event" or tr.final[1] <= antisaddle[1]:
            out.append((math.inf, tr))
            continue
        out.append((float(tr.final[1]), tr))
    (yu, tu), (ys, ts) = out
    if math.isinf(yu) and math.isinf(ys):
        m = math.nan
    elif math.isinf(yu):
        m = math.inf
    elif math.isinf(ys):
        m = -math.inf
    else:
        m = yu - ys
    return _Loop(m, tu, ts)


def _xy_loop(p: NormalFormParams, mu_hat: float, keep: bool = False, seed: float = 1e-6) -> _Loop:
    eqs = find_equilibria(p, mu_hat)
    if len(eqs) < 2 or not eqs[0].det < 0:
        raise NoSaddle("no saddle and antisaddle pair", "two equilibria")
    s, a = eqs[0], eqs[1]
    ps, pa = np.array([s.X, s.Y]), np.array([a.X, a.Y])
    return saddle_loop_mismatch(xy_field(p, mu_hat), ps, pa, jacobian_xy(p, mu_hat, s.X, s.Y),
                                keep=keep, seed=seed)


def _solve_sign(f: Callable[[float], float], a: float, b: float, xtol: float) -> float:
    lo, hi = bisect_sign(f, a, b, xtol=xtol)
    fl, fh = f(lo), f(hi)
    if np.isfinite(fl) and np.isfinite(fh) and np.sign(fl) != np.sign(fh):
        try:
            return find_root(f, (lo, hi), tol=math.inf)
        except NumericalFailure:
            pass
    return 0.5 * (lo + hi)


def _expand_bracket(f: Callable[[float], float], start: float, lo_limit: float,
                    hi_limit: float, factor: float = 1.3, n: int = 60):
    """Walk upward from ``start`` until f changes sign."""
    a, fa = start, f(start)
    b = start
    for _ in range(n):
        b = lo_limit + (b - lo_limit) * factor if b > lo_limit else b + 1e-3
        if b > hi_limit:
            break
        fb = f(b)
        if np.isnan(fb):
            continue
        if np.sign(fb) != np.sign(fa):
            return a, b
        a, fa = b, fb
    raise NoBracket(f"no sign change above {start:.6g}")


def homoclinic_mu_hat(p: NormalFormParams, gamma: float, guess: Optional[float] = None,
                      xtol: float = 1e-12) -> ConnectionResult:
    """mu_hat of the saddle-homoclinic of the (X, Y) system at this gamma."""
    q = replace(p, gamma=gamma)
    if gamma <= 0 or q.tau <= 0 or gamma >= q.delta / q.tau:
        raise NoSaddle("homoclinic branch lives in 0 < gamma < delta/tau", "0 < gamma < delta/tau")
    m_ah = mu_hat_ah(q, gamma)

    def mis(m):
        try:
            return _xy_loop(q, m).mismatch
        except NoSaddle:
            return math.nan

    # near BT the loop sits within O((gamma_bt - gamma)^2) of the Hopf value
    start = m_ah * (1 + 1e-7) if guess is None else guess
    try:
        a, b = _expand_bracket(mis, start, m_ah, 1e6 * max(1.0, m_ah), factor=1.5)
    except NoBracket:
        if guess is None:
            raise
        a, b = _expand_bracket(mis, m_ah * (1 + 1e-7), m_ah, 1e6 * max(1.0, m_ah), factor=1.5)
    m = _solve_sign(mis, a, b, xtol * max(1.0, abs(a)))
    loop = _xy_loop(q, m, keep=True)
    h = 1e-6 * max(1.0, abs(m))
    trans = (mis(m + h) - mis(m - h)) / (2 * h)
    return ConnectionResult(ConnectionKind.HOMOCLINIC_DESING, m, abs(loop.mismatch), loop.orbit_u,
                            trans, {"gamma": gamma, "mu_hat_ah": m_ah})


def homoclinic_branch(p: NormalFormParams, gammas: Sequence[float]) -> List[ConnectionResult]:
    """Solve along a gamma grid ordered away from the BT point; stops at the
    first gamma where no loop is found."""
    out: List[ConnectionResult] = []
    for g in gammas:
        try:
            out.append(homoclinic_mu_hat(p, g))
        except (NoBracket, NoConvergence, NoSignChange):
            break
    return out


def _hat_loop(q: NormalFormParams, eps_hat: float, keep: bool = False) -> _Loop:
    k = q.k
    m = eps_hat ** (-k / (1.0 + k))
    eqs = find_equilibria(q, m)
    if len(eqs) < 2 or not eqs[0].det < 0:
        raise NoSaddle("no saddle and antisaddle pair", "two equilibria")
    s, a = eqs[0], eqs[1]
    ps, pa = np.array([s.X, s.Y]) / m, np.array([a.X, a.Y]) / m
    f = hat_field(q, eps_hat)
    # the saddle sits in the slow layer Y ~ eps_hat: eigenvalues of very
    # different size, so an implicit solver is needed
    J = numeric_jacobian(f, ps, h=1e-8)
    lam_u = float(np.max(np.linalg.eigvals(J).real))
    t_max = max(1e6, 60.0 / lam_u) if lam_u > 0 else 1e6
    return saddle_loop_mismatch(f, ps, pa, J, keep=keep, t_max=t_max, method="LSODA")


def homoclinic_inner(p: NormalFormParams, eps_hat: float, half_width: float = 0.05,
                     xtol: float = 1e-12) -> ConnectionResult:
    """gamma of the saddle-homoclinic of the mu-rescaled system at fixed eps_hat."""
    lin = linear_return(p)
    g0 = lin.gamma_hom0
    if eps_hat == 0:
        return ConnectionResult(ConnectionKind.HOMOCLINIC_INNER, g0, 0.0, None,
                                meta={"eps_hat": 0.0})

    def mis(g):
        try:
            return _hat_loop(replace(p, gamma=g), eps_hat).mismatch
        except NoSaddle:
            return math.nan

    grid = np.linspace(max(g0 - half_width, 1e-6), g0 + half_width, 11)
    vals = [mis(g) for g in grid]
    # a jump to +-inf (a branch that never reaches the section) is not a root;
    # only brackets with finite values on both ends count
    br = None
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and np.sign(a) != np.sign(b):
            br = (grid[i], grid[i + 1])
            break
    if br is None:
        raise NoBracket("no finite sign change of the inner homoclinic mismatch")
    g = _solve_sign(mis, br[0], br[1], xtol)
    loop = _hat_loop(replace(p, gamma=g), eps_hat, keep=True)
    h = 1e-6
    trans = (mis(g + h) - mis(g - h)) / (2 * h)
    return ConnectionResult(ConnectionKind.HOMOCLINIC_INNER, g, abs(loop.mismatch), loop.orbit_u,
                            trans, {"eps_hat": eps_hat, "gamma_hom0": g0})


# ---------------------------------------------------------------------------
# BN3 heteroclinic between q_a and q_w

def rho1_node(p: NormalFormParams, mu_hat: float) -> float:
    """rho1 of the boundary node q_n: mu_hat = beta gamma rho^(-k^2) + delta rho^k."""
    k, b, g, d = p.k, p.beta, p.gamma, p.delta
    h = lambda r: b * g * r ** (-k * k) + d * r ** k - mu_hat
    lo, hi = 1e-12, 1.0
    while h(hi) < 0:
        hi *= 2
    return find_root(h, (lo, hi), tol=math.inf, xtol=1e-16)


@dataclass
class HetSeeds:
    rho_seed: float = 1e-2
    eps2_seed: float = 1e-3
    section: float = 0.5          # rho1 = section


def _j_crossing(p: NormalFormParams, mu_hat: float, s: HetSeeds, tol: float = 1e-12):
    k = p.k
    r0 = s.rho_seed
    x0 = -p.beta - p.gamma / k * r0 ** (k * (1 + k))
    # crossing the rho1-nullcline means the orbit turns back toward q_n
    turn = Section((1.0, 0.0), -p.beta, -1, True)
    tr = integrate(x1rho1_field(p, mu_hat), [x0, r0], (0.0, 1e5), tol=tol,
                   sections=[Section((0.0, 1.0), s.section, +1, True), turn], blowup=1e8)
    if tr.termination != "event" or tr.events[-1].index != 0:
        return None, tr
    return float(tr.final[0]), tr


def _s_crossing(p: NormalFormParams, mu_hat: float, s: HetSeeds, tol: float = 1e-12):
    k = p.k
    xw = (p.tau - math.sqrt(p.disc)) / 2
    e0 = s.eps2_seed
    m0 = mu_hat * e0 ** (k / (1.0 + k))
    x0 = xw - 2.0 / (p.tau + math.sqrt(p.disc)) * m0
    f = rho1_reduced_field(p)
    back = lambda t, z: -f(t, z)
    target = s.section ** (-(1 + k))
    turn = Event(lambda t, z: z[0] + p.beta * z[1] ** k, -1, True)
    try:
        tr = integrate(back, [x0, e0, m0], (0.0, 1e5), tol=tol,
                       sections=[Section((0.0, 1.0, 0.0), target, +1, True), turn], blowup=1e8)
    except (Blowup, StepFailure):
        return None, None
    if tr.termination != "event" or tr.events[-1].index != 0:
        return None, tr
    return float(tr.final[0]) * s.section ** (k * (1 + k)), tr


def het_separation(p: NormalFormParams, mu_hat: float, seeds: HetSeeds = HetSeeds()) -> float:
    """x1 of J minus x1 of S on the section rho1 = c.

    A manifold that does not reach the section (it ends on the boundary node
    below it) is assigned the nullcline value x1 = -beta.
    """
    xj, _ = _j_crossing(p, mu_hat, seeds)
    if xj is None:
        xj = -p.beta
    xs, _ = _s_crossing(p, mu_hat, seeds)
    if xs is None:
        xs = -p.beta
    return xj - xs


def heteroclinic_mu_hat(p: NormalFormParams, bracket: Tuple[float, float] = (-5.0, 5.0),
                        seeds: HetSeeds = HetSeeds(), probes: int = 20,
                        xtol: float = 1e-13) -> ConnectionResult:
    if not (p.tau > 0 and p.delta > 0 and p.disc > 0 and p.gamma < 0):
        raise OutOfDomain("heteroclinic needs the BN3 region", "tau>0, delta>0, disc>0, gamma<0")
    sep = lambda m: het_separation(p, m, seeds)
    a, b = bracket
    fa, fb = sep(a), sep(b)
    widen = 0
    while not (np.sign(fa) * np.sign(fb) < 0) and widen < 6:
        a, b = a - (b - a) / 2, b + (b - a) / 2
        fa, fb = sep(a), sep(b)
        widen += 1
    if not np.sign(fa) * np.sign(fb) < 0:
        raise NoSignChange(f"separation has one sign on [{a:.6g}, {b:.6g}]")
    m = _solve_sign(sep, a, b, xtol)
    res = abs(sep(m))
    # monotonicity of the separation near the root (Melnikov sign)
    w = 0.25 * min(m - a, b - m, 1.0)
    grid = np.linspace(m - w, m + w, probes)
    vals = np.array([sep(g) for g in grid])
    d = np.diff(vals)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise NonMonotone("separation is not monotone near the heteroclinic", values=vals)
    h = 1e-6
    trans = (sep(m + h) - sep(m - h)) / (2 * h)
    _, orbit = _j_crossing(p, m, seeds)
    rn = rho1_node(p, m)
    node_res = abs(p.beta * p.gamma * rn ** (-p.k ** 2) + p.delta * rn ** p.k - m)
    return ConnectionResult(ConnectionKind.HETEROCLINIC_BN3, m, res, orbit, trans,
                            {"bracket_lo": a, "bracket_hi": b, "monotone_probes": float(probes),
                             "rho1_node": rn, "node_residual": node_res,
                             "seed_sensitivity": _seed_sensitivity(p, m, seeds, xtol)})


def _seed_sensitivity(p, m, seeds, xtol):
    """Change in the root when both seed distances are halved."""
    s2 = HetSeeds(seeds.rho_seed / 2, seeds.eps2_seed / 2, seeds.section)
    sep = lambda mm: het_separation(p, mm, s2)
    try:
        m2 = _solve_sign(sep, m - 0.05, m + 0.05, xtol)
    except NumericalFailure:
        return math.nan
    return abs(m2 - m)


# ---------------------------------------------------------------------------
# singular PWS cycles and the BN3 explosion

def singular_cycle(p: NormalFormParams, s: float, n_slide: int = 200,
                   tol: float = 1e-12) -> np.ndarray:
    """Closed polyline: backward X+ orbit of (-s, 0) into the origin, then the
    sliding segment from (-s, 0) back to the origin."""
    if s <= 0:
        raise OutOfDomain("s must be positive", "s > 0")
    q = replace(p, mu=0.0)
    f = plus_field(q, mu=0.0)
    back = lambda t, z: -f(t, z)
    stop = Event(lambda t, z: float(np.hypot(z[0], z[1])) - 1e-9 * s, -1, True)
    try:
        tr = integrate(back, [-s, 0.0], (0.0, 1e3), tol=tol, sections=[stop],
                       blowup=1e3 * (1 + s), max_step=0.02)
    except Blowup as e:
        raise NoReturn("backward X+ orbit leaves instead of returning to the origin") from e
    if tr.termination != "event" or np.any(tr.y[1:, 1] < 0):
        raise NoReturn("backward X+ orbit does not return to the origin")
    arc = tr.y[::-1]                            # origin -> (-s, 0)
    slide = np.column_stack([np.linspace(-s, 0.0, n_slide), np.zeros(n_slide)])
    return np.vstack([arc, slide[1:]])


def densify(path: np.ndarray, spacing: float) -> np.ndarray:
    """Insert points along each segment so vertices are at most ``spacing`` apart."""
    path = np.asarray(path, dtype=float)
    seg = np.diff(path, axis=0)
    n = np.maximum(1, np.ceil(np.linalg.norm(seg, axis=1) / spacing).astype(int))
    parts = [path[i] + np.outer(np.arange(n[i]) / n[i], seg[i]) for i in range(len(seg))]
    return np.vstack(parts + [path[-1:]])


def hausdorff(a: np.ndarray, b: np.ndarray, spacing: Optional[float] = None) -> float:
    """Hausdorff distance between two polylines, densified to ``spacing``
    (default: 1e-3 of the larger diameter) so sparse solver output does not
    inflate the result."""
    if spacing is None:
        spacing = 1e-3 * max(np.ptp(a, axis=0).max(), np.ptp(b, axis=0).max(), 1e-12)
    a, b = densify(a, spacing), densify(b, spacing)
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def growth_exponent(p: NormalFormParams) -> float:
    """lambda = 2 sqrt(disc) / (tau - sqrt(disc))."""
    r = math.sqrt(p.disc)
    return 2 * r / (p.tau - r)


@dataclass
class LapResult:
    landing: float                      # -min x after the excursion; 0 none, inf escape
    orbit: Optional[Trajectory] = None


class ExplosionLap:
    """One excursion of the regularized system started on the sliding
    critical manifold at x = x0 < 0."""

    def __init__(self, p: NormalFormParams, eps: float, x0: float = -0.05,
                 escape: float = 5.0, t_max: float = 200.0, tol: float = 1e-9,
                 method: str = "Radau"):
        if p.reg.eval is None or p.reg.inverse is None:
            raise OutOfDomain("explosion sweep needs an invertible switching function",
                              "concrete phi")
        self.p, self.eps, self.x0 = p, eps, x0
        self.y0 = eps * float(p.reg.inverse(1.0 / (1.0 - x0)))
        self.escape, self.t_max, self.tol, self.method = escape, t_max, tol, method
        self._cache: Dict[tuple, float] = {}

    def field(self, mu: float):
        return full_field(self.p, mu=mu, eps=self.eps)

    def run(self, mu: float, keep: bool = False, start=None) -> LapResult:
        """Slide to the right, pass the maximum of x, stop at the next minimum.

        The landing value is minus that minimum; an orbit that settles on an
        equilibrium before turning back gives 0 and one that leaves the
        ball of radius ``escape`` gives inf.
        """
        f = self.field(mu)
        esc = Event(lambda t, z: float(np.hypot(z[0], z[1])) - self.escape, +1, True)
        rest = Event(lambda t, z: float(np.hypot(*f(t, z))) - 1e-10, -1, True)
        z0 = [self.x0, self.y0] if start is None else start
        legs = []
        t0 = 0.0
        try:
            for direction in (-1, +1):
                turn = Event(lambda t, z: float(f(t, z)[0]), direction, True)
                leg = integrate(f, z0, (t0, t0 + self.t_max), tol=self.tol,
                                sections=[turn, esc, rest], method=self.method, record=keep)
                legs.append(leg)
                if leg.termination != "event" or leg.events[-1].index == 2:
                    return LapResult(0.0, leg)
                if leg.events[-1].index == 1:
                    return LapResult(math.inf, leg)
                z0, t0 = leg.final, leg.t[-1]
        except (Blowup, StepFailure):
            return LapResult(math.inf, None)
        t1, t2 = legs
        if keep:
            orbit = Trajectory(np.concatenate([t1.t, t2.t[1:]]),
                               np.vstack([t1.y, t2.y[1:]]), t1.events + t2.events, "event")
        else:
            orbit = Trajectory(np.array([t2.t[-1]]), t2.y[-1:], [], "event")
        return LapResult(float(-t2.final[0]), orbit)

    def landing(self, mu: float, laps: int = 8, rtol: float = 1e-9) -> float:
        """Landing value of the attracting cycle reached by repeated laps."""
        key = (mu, laps, rtol)
        if key in self._cache:
            return self._cache[key]
        self._cache[key] = val = self._landing(mu, laps, rtol)
        return val

    def _landing(self, mu, laps, rtol):
        res = self.run(mu)
        for _ in range(laps - 1):
            if res.landing == 0 or not math.isfinite(res.landing):
                return res.landing
            nxt = self.run(mu, start=res.orbit.final)
            if abs(nxt.landing - res.landing) <= rtol * max(1.0, res.landing):
                return nxt.landing
            res = nxt
        return res.landing


def explosion_mu(lap: ExplosionLap, s: float, mu_bracket: Tuple[float, float],
                 n_scan: int = 13, xtol: float = 1e-14) -> float:
    """mu at which the attracting cycle lands at x = -s.

    A coarse scan locates the increasing branch to the right of the smallest
    landing value; bisection on the sign of landing - s refines it.
    """
    grid = np.linspace(mu_bracket[0], mu_bracket[1], n_scan)
    vals = np.array([lap.landing(m) for m in grid])
    finite = np.where(np.isfinite(vals) & (vals > 0))[0]
    if finite.size == 0:
        raise NoBracket("no finite cycles in the scanned mu window")
    i0 = finite[np.argmin(vals[finite])]
    if vals[i0] >= s:
        raise NoBracket(f"smallest cycle in the window already exceeds s={s:g}")
    j = next((j for j in range(i0 + 1, n_scan) if vals[j] >= s), None)
    if j is None:
        raise NoBracket(f"no cycle reaches s={s:g} in the window")
    g = lambda mu: lap.landing(mu) - s
    lo, hi = bisect_sign(g, grid[j - 1], grid[j], xtol=xtol)
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def _cycle_from(lap: ExplosionLap, mu: float, s: float) -> CycleRecord:
    f = lap.field(mu)
    res = lap.run(mu)
    for _ in range(8):
        if not math.isfinite(res.landing) or res.landing == 0:
            raise NoConvergence("no excursion at the located mu")
        nxt = lap.run(mu, start=res.orbit.final)
        done = abs(nxt.landing - res.landing) <= 1e-9 * max(1.0, res.landing)
        res = nxt
        if done:
            break
    # one full period starting from a landing point
    land_pt = res.orbit.final
    second = lap.run(mu, keep=True, start=land_pt)
    if not math.isfinite(second.landing) or second.landing == 0:
        raise NoConvergence("second excursion failed")
    orb = second.orbit
    t0 = orb.t[0]
    period = float(orb.t[-1] - t0)
    logm = liouville_multiplier(f, orb.t, orb.y)
    amp = float(np.max(np.abs(orb.y[:, 0])))
    hd = hausdorff(orb.y, singular_cycle(lap.p, second.landing))
    return CycleRecord(s=s, mu=mu, amplitude=amp, period=period,
                       floquet=math.exp(logm) if logm > -700 else 0.0,
                       hausdorff=hd, eps=lap.eps, log_floquet=logm,
                       point=np.array(land_pt), orbit=orb.y)


def bn3_family(p: NormalFormParams, eps: float, s_grid: Sequence[float],
               mu_hat_het: Optional[float] = None, window: float = 0.3,
               x0: float = -0.05, strict: bool = False) -> List[CycleRecord]:
    """Explosion sweep: for each s, the mu at which the regularized system has
    a cycle reaching x = -s, plus its period, multiplier and distance to the
    singular cycle. Failed grid points are returned with nan entries."""
    if not (p.tau > 0 and p.delta > 0 and p.disc > 0 and p.gamma < 0):
        raise OutOfDomain("explosion sweep needs the BN3 region", "BN3")
    k = p.k
    if mu_hat_het is None:
        mu_hat_het = heteroclinic_mu_hat(replace(p, theta1=Theta(), theta2=Theta())).critical_value
    scale = eps ** (k / (1.0 + k))
    lap = ExplosionLap(p, eps, x0=x0, escape=max(5.0, 3 * max(s_grid)))
    lo_m, hi_m = (mu_hat_het - window) * scale, (mu_hat_het + window) * scale
    out: List[CycleRecord] = []
    for s in s_grid:
        try:
            mu = explosion_mu(lap, s, (lo_m, hi_m))
            rec = _cycle_from(lap, mu, s)
        except NumericalFailure:
            if strict:
                raise
            rec = CycleRecord(s=s, mu=math.nan, amplitude=math.nan, period=math.nan,
                              floquet=math.nan, eps=eps)
        out.append(rec)
    return out
