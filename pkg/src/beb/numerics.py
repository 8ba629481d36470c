"""Integration with section events, root finding, return maps, limit cycles
and pseudo-arclength continuation.

Stepping is delegated to scipy's Runge-Kutta and implicit solvers; event
detection and localization on hyperplane sections is done here so that a
trajectory starting on a section never reports that section at t0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as _si
from scipy import optimize as _so

from .errors import (Blowup, NoConvergence, NoReturn, NoSignChange,
                     StallAtStep, StepFailure)

Field = Callable[[float, np.ndarray], np.ndarray]

_SOLVERS = {"DOP853": _si.DOP853, "RK45": _si.RK45, "Radau": _si.Radau,
            "BDF": _si.BDF, "LSODA": _si.LSODA}


@dataclass(frozen=True)
class Section:
    """Hyperplane {z : normal . z = offset} with a unit normal."""
    normal: Tuple[float, ...]
    offset: float = 0.0
    direction: int = 0          # +1 only upward crossings, -1 only downward, 0 both
    terminal: bool = True

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        nn = float(np.linalg.norm(n))
        if nn == 0:
            raise ValueError("section normal must be nonzero")
        object.__setattr__(self, "normal", tuple(n / nn))
        object.__setattr__(self, "offset", float(self.offset) / nn)

    def __call__(self, t, z) -> float:
        return float(np.dot(self.normal, z[:len(self.normal)])) - self.offset


@dataclass(frozen=True)
class Event:
    """General scalar event function g(t, z) = 0."""
    fn: Callable[[float, np.ndarray], float]
    direction: int = 0
    terminal: bool = True

    def __call__(self, t, z) -> float:
        return float(self.fn(t, z))


@dataclass
class EventRecord:
    t: float
    index: int
    state: np.ndarray


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray                       # shape (len(t), dim)
    events: List[EventRecord] = field(default_factory=list)
    termination: str = "end"            # end | event | box

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def events_of(self, index: int) -> List[EventRecord]:
        return [e for e in self.events if e.index == index]


def _crossed(g0, g1, direction):
    if g0 == 0.0:
        return False
    if direction >= 0 and g0 < 0.0 <= g1:
        return True
    if direction <= 0 and g0 > 0.0 >= g1:
        return True
    return False


def integrate(field: Field, y0, t_span: Tuple[float, float], tol: float = 1e-10,
              sections: Sequence = (), method: str = "DOP853", atol: Optional[float] = None,
              max_step: float = math.inf, blowup: float = 1e12,
              first_step: Optional[float] = None, max_steps: int = 2_000_000,
              record: bool = True) -> Trajectory:
    """Integrate ``field`` from ``y0`` over ``t_span`` (forward or backward).

    ``sections`` holds Section or Event objects. Terminal events stop the
    integration at the located crossing. Raises Blowup when the state norm
    exceeds ``blowup`` and StepFailure when the solver gives up.
    """
    y0 = np.array(y0, dtype=float)
    t0, t1 = float(t_span[0]), float(t_span[1])
    atol = tol * 1e-2 if atol is None else atol
    fun = lambda t, z: np.asarray(field(t, z), dtype=float)
    kw = dict(rtol=tol, atol=atol, max_step=max_step)
    if first_step is not None:
        kw["first_step"] = first_step
    solver = _SOLVERS[method](fun, t0, y0, t1, **kw)
    ts, ys = [t0], [y0.copy()]
    events: List[EventRecord] = []
    # a start on a section (up to rounding) is not a crossing
    g_tol = 1e-13 * (1.0 + float(np.max(np.abs(y0)))) if y0.size else 0.0
    g_old = [0.0 if abs(g) <= g_tol else g for g in (ev(t0, y0) for ev in sections)]
    steps = 0
    while solver.status == "running":
        solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepFailure(f"step size underflow near t={solver.t:.6g}", t=solver.t)
        if steps > max_steps:
            raise StepFailure(f"more than {max_steps} steps", t=solver.t)
        t_new, y_new = solver.t, solver.y
        if not np.all(np.isfinite(y_new)) or np.linalg.norm(y_new) > blowup:
            raise Blowup(f"state norm exceeded {blowup:g} at t={t_new:.6g}", t=t_new)
        hit = None
        if sections:
            g_new = [ev(t_new, y_new) for ev in sections]
            dense = None
            found = []
            for i, ev in enumerate(sections):
                if _crossed(g_old[i], g_new[i], ev.direction):
                    if dense is None:
                        dense = solver.dense_output()
                    if g_new[i] == 0.0:
                        te = t_new
                    else:
                        lo, hi = sorted((solver.t_old, t_new))
                        te = _so.brentq(lambda s: ev(s, dense(s)), lo, hi,
                                        xtol=1e-15 * max(1.0, abs(t_new)), rtol=1e-15)
                    found.append((te, i))
            # process in time order up to the first terminal one
            found.sort(key=lambda p: p[0] if t1 >= t0 else -p[0])
            for te, i in found:
                st = dense(te) if te != t_new else y_new.copy()
                events.append(EventRecord(te, i, np.array(st)))
                if sections[i].terminal:
                    hit = (te, st)
                    break
            g_old = g_new
        if record or hit is not None:
            if hit is not None:
                ts.append(hit[0])
                ys.append(np.array(hit[1]))
                return Trajectory(np.array(ts), np.array(ys), events, "event")
            ts.append(t_new)
            ys.append(y_new.copy())
    if not record:
        ts.append(solver.t)
        ys.append(solver.y.copy())
    return Trajectory(np.array(ts), np.array(ys), events, "end")


def find_root(f: Callable[[float], float], bracket: Tuple[float, float],
              tol: float = 1e-12, xtol: Optional[float] = None) -> float:
    """Safeguarded bracketed root (Brent's method on top of bisection)."""
    a, b = bracket
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"f({a:.6g})={fa:.3g} and f({b:.6g})={fb:.3g} have the same sign")
    xtol = 1e-15 * max(1.0, abs(a), abs(b)) if xtol is None else xtol
    r = _so.brentq(f, a, b, xtol=xtol, rtol=1e-15, maxiter=500)
    if abs(f(r)) > tol:
        raise NoConvergence(f"|f(root)|={abs(f(r)):.3g} exceeds {tol:g}", root=r)
    return r


def bisect_sign(f: Callable[[float], float], a: float, b: float,
                xtol: float = 1e-13, maxiter: int = 200) -> Tuple[float, float]:
    """Bisection using only the sign of ``f`` (allows +-inf values).

    Returns the final bracket.
    """
    sa, sb = np.sign(f(a)), np.sign(f(b))
    if sa == 0:
        return a, a
    if sb == 0:
        return b, b
    if sa == sb:
        raise NoSignChange(f"no sign change on [{a:.6g}, {b:.6g}]")
    for _ in range(maxiter):
        if abs(b - a) <= xtol:
            break
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        sm = np.sign(f(m))
        if sm == 0:
            return m, m
        if sm == sa:
            a = m
        else:
            b = m
    return a, b


def poincare_return(field: Field, section: Section, y0, t_max: float = 1e3,
                    tol: float = 1e-11, method: str = "DOP853", extra: Sequence = (),
                    **kw) -> Tuple[np.ndarray, float, Trajectory]:
    """First return of ``y0`` (assumed on ``section``) to the section."""
    sec = Section(section.normal, section.offset * 1.0, section.direction, True) \
        if isinstance(section, Section) else section
    tr = integrate(field, y0, (0.0, t_max), tol=tol, sections=[sec, *extra],
                   method=method, **kw)
    ret = tr.events_of(0)
    if not ret:
        raise NoReturn(f"no return to section within t={t_max:g}")
    return ret[0].state, ret[0].t, tr


@dataclass
class CycleRecord:
    s: float                 # family parameter (nan when not applicable)
    mu: float                # bifurcation parameter value
    amplitude: float         # max x over the cycle unless stated otherwise
    period: float
    floquet: float           # nontrivial multiplier
    hausdorff: float = float("nan")
    eps: float = float("nan")
    log_floquet: float = float("nan")
    point: Optional[np.ndarray] = None      # a point on the cycle
    orbit: Optional[np.ndarray] = None      # sampled orbit, shape (n, 2)


def liouville_multiplier(field: Field, orbit_t: np.ndarray, orbit_y: np.ndarray,
                         h: float = 1e-7) -> float:
    """log of the nontrivial Floquet multiplier of a planar cycle: integral of div."""
    def div(t, z):
        z = np.asarray(z, dtype=float)
        d = 0.0
        for i in range(2):
            e = np.zeros_like(z)
            e[i] = h * max(1.0, abs(z[i]))
            d += (field(t, z + e)[i] - field(t, z - e)[i]) / (2 * e[i])
        return d
    vals = np.array([div(t, z) for t, z in zip(orbit_t, orbit_y)])
    return float(_si.trapezoid(vals, orbit_t))


def find_limit_cycle(field: Field, section: Section, guess, tol: float = 1e-9,
                     t_max: float = 1e3, method: str = "DOP853", int_tol: float = 1e-11,
                     max_iter: int = 40, fd_scale: float = 1.0, mu: float = float("nan")) -> CycleRecord:
    """Periodic orbit of a planar field through a line section.

    Newton iteration on P(sigma) - sigma with a finite-difference derivative,
    where sigma is the coordinate along the section line. The Floquet
    multiplier is P'(sigma*) by central differences with step 1e-6*scale.
    """
    n = np.asarray(section.normal, dtype=float)
    tang = np.array([-n[1], n[0]])
    base = np.asarray(guess, dtype=float)
    base = base - (np.dot(n, base) - section.offset) * n   # project onto the line

    def P(sig):
        st, T, _ = poincare_return(field, section, base + sig * tang, t_max=t_max,
                                   tol=int_tol, method=method)
        return float(np.dot(st - base, tang)), T

    sig = 0.0
    h = 1e-6 * fd_scale
    for _ in range(max_iter):
        p0, _ = P(sig)
        r = p0 - sig
        if abs(r) < tol:
            break
        dp = (P(sig + h)[0] - P(sig - h)[0]) / (2 * h)
        if abs(1.0 - dp) < 1e-14:
            raise NoConvergence("return map derivative equals one")
        step = -r / (dp - 1.0)
        # damp huge steps
        lim = max(abs(sig), fd_scale) * 0.5
        if abs(step) > lim:
            step = math.copysign(lim, step)
        sig += step
    else:
        raise NoConvergence(f"cycle residual {abs(r):.3g} after {max_iter} iterations")
    floquet = (P(sig + h)[0] - P(sig - h)[0]) / (2 * h)
    point = base + sig * tang
    cyc = integrate(field, point, (0.0, t_max), tol=int_tol, method=method,
                    sections=[Section(section.normal, section.offset, section.direction, True)])
    T = cyc.t[-1]
    return CycleRecord(s=float("nan"), mu=mu, amplitude=float(np.max(cyc.y[:, 0])),
                       period=T, floquet=floquet,
                       log_floquet=liouville_multiplier(field, cyc.t, cyc.y),
                       point=point, orbit=cyc.y)


@dataclass
class BranchPoint:
    u: np.ndarray
    lam: float
    residual: float


def param_continue(residual: Callable[[np.ndarray, float], np.ndarray], u0, lam0: float,
                   lam_range: Tuple[float, float], h0: float = 1e-2, h_min: float = 1e-8,
                   h_max: float = 0.1, newton_tol: float = 1e-10, max_points: int = 500,
                   direction: int = +1, fd: float = 1e-7,
                   u_bounds: Optional[Tuple[float, float]] = None) -> List[BranchPoint]:
    """Pseudo-arclength continuation of residual(u, lam) = 0 with a secant predictor.

    Stops when lam leaves ``lam_range`` or u leaves ``u_bounds``; raises
    StallAtStep (carrying the partial branch) when the step falls below h_min.
    """
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    n = u0.size

    def R(z):
        return np.atleast_1d(residual(z[:n], z[n]))

    def jac(z):
        f0 = R(z)
        J = np.empty((n, n + 1))
        for j in range(n + 1):
            dz = np.zeros(n + 1)
            dz[j] = fd * max(1.0, abs(z[j]))
            J[:, j] = (R(z + dz) - R(z - dz)) / (2 * dz[j])
        return f0, J

    def newton(zp, tvec):
        z = zp.copy()
        for it in range(12):
            f0, J = jac(z)
            A = np.vstack([J, tvec])
            b = -np.concatenate([f0, [np.dot(tvec, z - zp)]])
            try:
                dz = np.linalg.solve(A, b)
            except np.linalg.LinAlgError:
                return None, it
            z = z + dz
            if np.linalg.norm(dz) < newton_tol * max(1.0, np.linalg.norm(z)):
                if np.linalg.norm(R(z)) < max(newton_tol * 100, 1e-8):
                    return z, it
        return None, 12

    # correct the seed at fixed lam
    z = np.concatenate([u0, [lam0]])
    zc, _ = newton(z, np.concatenate([np.zeros(n), [1.0]]))
    if zc is None:
        raise NoConvergence("seed does not converge")
    pts = [BranchPoint(zc[:n].copy(), zc[n], float(np.linalg.norm(R(zc))))]
    # initial tangent from the Jacobian null vector
    _, J = jac(zc)
    _, _, vt = np.linalg.svd(J)
    tvec = vt[-1]
    if np.sign(tvec[n]) != np.sign(direction) and tvec[n] != 0:
        tvec = -tvec
    h = h0
    prev = None
    while len(pts) < max_points:
        zcur = np.concatenate([pts[-1].u, [pts[-1].lam]])
        if prev is not None:
            sec = zcur - prev
            tvec = sec / np.linalg.norm(sec)
        zp = zcur + h * tvec
        znew, iters = newton(zp, tvec)
        if znew is None:
            h *= 0.5
            if h < h_min:
                raise StallAtStep(f"continuation step below {h_min:g} at lam={zcur[n]:.6g}",
                                  branch=pts)
            continue
        prev = zcur
        pts.append(BranchPoint(znew[:n].copy(), znew[n], float(np.linalg.norm(R(znew)))))
        lo, hi = lam_range
        if not (lo <= znew[n] <= hi):
            break
        if u_bounds is not None and not np.all((u_bounds[0] <= znew[:n]) & (znew[:n] <= u_bounds[1])):
            break
        if iters <= 3:
            h = min(h * 1.5, h_max)
    return pts


def first_lyapunov(field: Field, x0, h2: float = 1e-4, h3: float = 1e-3) -> Tuple[float, float]:
    """First Lyapunov coefficient of a planar field at a Hopf point.

    Uses the invariant formula with eigenvectors normalized by <q,q> = <p,q> = 1
    and second/third derivatives from central differences. Returns (l1, omega).
    """
    x0 = np.asarray(x0, dtype=float)
    F = lambda z: np.asarray(field(0.0, z), dtype=float)
    J = np.column_stack([(F(x0 + 1e-6 * e) - F(x0 - 1e-6 * e)) / 2e-6 for e in np.eye(2)])
    ev, V = np.linalg.eig(J)
    i = int(np.argmax(ev.imag))
    omega = float(ev[i].imag)
    if omega <= 0:
        raise NoConvergence("no complex pair at the Hopf point")
    q = V[:, i] / np.sqrt(np.vdot(V[:, i], V[:, i]).real)
    evt, W = np.linalg.eig(J.T)
    pv = W[:, int(np.argmin(evt.imag))]
    pv = pv / np.conj(np.vdot(pv, q))

    def d2(u):
        return (F(x0 + h2 * u) - 2 * F(x0) + F(x0 - h2 * u)) / h2 ** 2

    def d3(u):
        return (F(x0 + 2 * h3 * u) - 2 * F(x0 + h3 * u) + 2 * F(x0 - h3 * u)
                - F(x0 - 2 * h3 * u)) / (2 * h3 ** 3)

    def B_real(u, v):
        return (d2(u + v) - d2(u - v)) / 4

    def B(u, v):
        a, b, c, d = u.real, u.imag, v.real, v.imag
        return B_real(a, c) - B_real(b, d) + 1j * (B_real(a, d) + B_real(b, c))

    a, b = q.real, q.imag
    Cp, Cm = d3(a + b), d3(a - b)
    caab = (Cp - Cm - 2 * d3(b)) / 6
    cabb = (Cp + Cm - 2 * d3(a)) / 6
    cqqqb = d3(a) + cabb + 1j * (caab + d3(b))
    qb = np.conj(q)
    g21 = (np.vdot(pv, cqqqb)
           - 2 * np.vdot(pv, B(q, np.linalg.solve(J, B(q, qb))))
           + np.vdot(pv, B(qb, np.linalg.solve(2j * omega * np.eye(2) - J, B(q, q)))))
    return float(g21.real / (2 * omega)), omega
