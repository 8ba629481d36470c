"""Desingularized systems on the blow-up sphere and their bifurcations.

Three equivalent planar systems are provided. With (k, beta) the tail data,

  (x1, rho1):  x1' = rho1^(k(1+k)) ((tau-gamma) beta + mu_hat rho1^(k^2) + tau x1
                     - delta rho1^(k(1+k))) + k x1 (beta + x1)
               rho1' = rho1 (beta + x1) / k
  (X, Y):      X' = (mu_hat + tau X - delta Y) Y^k - (gamma - tau) beta
               Y' = X Y^k + beta
  hat system:  the (X, Y) system rescaled by mu_hat (for mu_hat -> +inf)

linked by x1 = Y^k X, rho1 = Y^(1/k). The regime parameter is
mu_hat = mu / eps^(k/(1+k)).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize as so

from .errors import DomainError, NoBracket, NoConvergence, OutOfDomain
from .model import NormalFormParams
from .numerics import (CycleRecord, Section, find_limit_cycle, find_root, first_lyapunov,
                       poincare_return)


class Coords(str, enum.Enum):
    XY = "XY"
    X1RHO1 = "X1RHO1"
    HATXY = "HATXY"


class CurveKind(str, enum.Enum):
    SN = "SN"
    AH = "AH"
    HOM_LOCAL = "HOM_LOCAL"
    HOM_NUMERIC = "HOM_NUMERIC"
    BT = "BT"
    HET = "HET"


@dataclass(frozen=True)
class DesingState:
    coords: Coords
    u: float
    v: float


@dataclass
class Equilibrium:
    X: float
    Y: float
    trace: float
    det: float
    eigen_kind: str
    residual: float

    def x1rho1(self, k: int) -> Tuple[float, float]:
        return xy_to_x1rho1(self.X, self.Y, k)


@dataclass
class BifurcationCurvePoint:
    kind: CurveKind
    gamma: float
    mu_hat: float
    meta: Dict[str, float] = field(default_factory=dict)
    residual: float = float("nan")


# ---------------------------------------------------------------------------
# vector fields

def xy_field(p: NormalFormParams, mu_hat: float):
    tau, delta, gamma, k, beta = p.tau, p.delta, p.gamma, p.k, p.beta

    def f(t, z):
        X, Y = z[0], z[1]
        Yk = Y ** k
        return np.array([(mu_hat + tau * X - delta * Y) * Yk - (gamma - tau) * beta,
                         X * Yk + beta])
    return f


def x1rho1_field(p: NormalFormParams, mu_hat: float):
    tau, delta, gamma, k, beta = p.tau, p.delta, p.gamma, p.k, p.beta
    a = k * (1 + k)

    def f(t, z):
        x, r = z[0], z[1]
        ra = r ** a
        return np.array([ra * ((tau - gamma) * beta + mu_hat * r ** (k * k) + tau * x - delta * ra)
                         + k * x * (beta + x),
                         r * (beta + x) / k])
    return f


def hat_field(p: NormalFormParams, eps_hat: float):
    """(X, Y) system rescaled by mu_hat; eps_hat = mu_hat^(-(1+k)/k)."""
    tau, delta, gamma, k, beta = p.tau, p.delta, p.gamma, p.k, p.beta
    ek = eps_hat ** k

    def f(t, z):
        X, Y = z[0], z[1]
        Yk = Y ** k
        return np.array([(1.0 + tau * X - delta * Y) * Yk - (gamma - tau) * beta * ek,
                         X * Yk + beta * ek])
    return f


def desing_field(p: NormalFormParams, mu_hat: float, state: DesingState) -> np.ndarray:
    c = Coords(state.coords)
    z = np.array([state.u, state.v])
    if c is Coords.XY:
        if state.v <= 0:
            raise DomainError("Y must be positive", "Y > 0")
        return xy_field(p, mu_hat)(0.0, z)
    if c is Coords.X1RHO1:
        if state.v < 0:
            raise DomainError("rho1 must be nonnegative", "rho1 >= 0")
        return x1rho1_field(p, mu_hat)(0.0, z)
    if state.v <= 0:
        raise DomainError("Y must be positive", "Y > 0")
    if mu_hat <= 0:
        raise DomainError("the hat system needs mu_hat > 0", "mu_hat > 0")
    return hat_field(p, mu_hat ** (-(1 + p.k) / p.k))(0.0, z)


def xy_to_x1rho1(X: float, Y: float, k: int) -> Tuple[float, float]:
    return Y ** k * X, Y ** (1.0 / k)


def x1rho1_to_xy(x1: float, rho1: float, k: int) -> Tuple[float, float]:
    Y = rho1 ** k
    return x1 / Y ** k, Y


def pushforward_xy(p: NormalFormParams, mu_hat: float, X: float, Y: float) -> np.ndarray:
    """The (X, Y) field mapped into (x1, rho1) coordinates by the linking map."""
    k = p.k
    v = xy_field(p, mu_hat)(0.0, np.array([X, Y]))
    D = np.array([[Y ** k, k * Y ** (k - 1) * X],
                  [0.0, Y ** (1.0 / k - 1) / k]])
    return D @ v


# ---------------------------------------------------------------------------
# equilibria

def _h(p, mu_hat, Y):
    return mu_hat * Y ** p.k - p.delta * Y ** (1 + p.k) - p.gamma * p.beta


def trace_det(p: NormalFormParams, mu_hat: float, Y: float) -> Tuple[float, float]:
    """Trace and determinant of the (x1, rho1) Jacobian at the equilibrium with this Y."""
    k = p.k
    rho = Y ** (1.0 / k)
    tr = -k * p.beta + p.tau * rho ** (k * (1 + k))
    det = -rho ** (k * (1 + 2 * k)) * (k * mu_hat - p.delta * (1 + k) * rho ** k)
    return tr, det


def eigen_kind(tr: float, det: float, tol: float = 1e-12) -> str:
    if abs(det) <= tol or (det > 0 and abs(tr) <= tol):
        return "nonhyperbolic"
    if det < 0:
        return "saddle"
    disc = tr * tr - 4 * det
    stab = "stable" if tr < 0 else "unstable"
    return f"{stab}_{'node' if disc >= 0 else 'focus'}"


def find_equilibria(p: NormalFormParams, mu_hat: float) -> List[Equilibrium]:
    """Equilibria of the (X, Y) system with Y > 0, sorted by Y."""
    k, delta, gb = p.k, p.delta, p.gamma * p.beta
    h = lambda Y: _h(p, mu_hat, Y)
    scale = max(1.0, abs(mu_hat), abs(delta), abs(gb))
    # h'(Y) = Y^(k-1) (k mu_hat - (1+k) delta Y): unimodal on (0, inf)
    yc = k * mu_hat / ((1 + k) * delta)
    ymax = 2.0 * (abs(yc) + (abs(gb) / abs(delta)) ** (1.0 / (1 + k)) + abs(mu_hat) / abs(delta)) + 1.0
    while np.sign(h(ymax)) != -np.sign(delta):
        ymax *= 2
    pieces = [(0.0, yc), (yc, ymax)] if yc > 0 else [(0.0, ymax)]
    roots: List[float] = []
    if yc > 0 and abs(h(yc)) <= 1e-13 * scale:
        roots.append(yc)
    else:
        for a, b in pieces:
            ha, hb = h(a), h(b)
            if ha == 0.0 and a == 0.0:
                continue
            if np.sign(ha) != np.sign(hb):
                roots.append(so.brentq(h, a, b, xtol=1e-16, rtol=1e-15, maxiter=500))
    out = []
    for Y in sorted(roots):
        if not Y ** k > 0:
            continue                # underflow at gamma ~ 0: no usable equilibrium
        X = -p.beta / Y ** k
        tr, det = trace_det(p, mu_hat, Y)
        res = float(np.linalg.norm(xy_field(p, mu_hat)(0.0, np.array([X, Y]))))
        out.append(Equilibrium(X, Y, tr, det, eigen_kind(tr, det), res))
    return out


def jacobian_xy(p: NormalFormParams, mu_hat: float, X: float, Y: float) -> np.ndarray:
    tau, delta, k = p.tau, p.delta, p.k
    Yk = Y ** k
    dYk = k * Y ** (k - 1)
    return np.array([[tau * Yk, -delta * Yk + (mu_hat + tau * X - delta * Y) * dYk],
                     [Yk, X * dYk]])


def numeric_jacobian(f, z, h: float = 1e-6) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    cols = []
    for e in np.eye(len(z)):
        hh = h * max(1.0, np.linalg.norm(z))
        cols.append((f(0.0, z + hh * e) - f(0.0, z - hh * e)) / (2 * hh))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# closed-form bifurcation data

def _kbt(p: NormalFormParams) -> float:
    return p.k * p.beta / p.tau


def mu_hat_sn(p: NormalFormParams, gamma: float) -> float:
    k, d, b = p.k, p.delta, p.beta
    if not gamma / d > 0:
        raise OutOfDomain("saddle-node requires gamma/delta > 0", "gamma/delta > 0")
    return (1 + k) * d / k * (k * b * gamma / d) ** (1.0 / (1 + k))


def mu_hat_ah(p: NormalFormParams, gamma: float) -> float:
    k, d, t = p.k, p.delta, p.tau
    if t <= 0 or gamma > d / t:
        raise OutOfDomain("Hopf requires tau > 0 and gamma <= delta/tau", "gamma <= delta/tau")
    return (k * d + t * gamma) / k * _kbt(p) ** (1.0 / (1 + k))


def bt_point(p: NormalFormParams) -> Tuple[float, float]:
    """(mu_hat, gamma) of the Bogdanov-Takens point."""
    if p.tau <= 0 or p.delta <= 0:
        raise OutOfDomain("Bogdanov-Takens point requires tau > 0, delta > 0", "tau > 0")
    k = p.k
    return (1 + k) * p.delta / k * _kbt(p) ** (1.0 / (1 + k)), p.delta / p.tau


def mu_hat_hom_local(p: NormalFormParams, gamma: float, window: float = 0.1) -> float:
    """Linear expansion of the homoclinic curve about the BT point."""
    mu_bt, g_bt = bt_point(p)
    if abs(gamma - g_bt) > window * abs(g_bt):
        raise OutOfDomain("local homoclinic expansion used outside its window",
                          "|gamma - gamma_bt| <= 0.1 |gamma_bt|")
    k, t, d = p.k, p.tau, p.delta
    return _kbt(p) ** (1.0 / (1 + k)) * ((1 + k) * d / k + t / k * (gamma - d / t))


def hom_slope(p: NormalFormParams) -> float:
    """d mu_hat_hom / d gamma at the BT point."""
    return p.tau / p.k * _kbt(p) ** (1.0 / (1 + p.k))


def l1_closed(p: NormalFormParams, gamma: float) -> float:
    k, b, t, d = p.k, p.beta, p.tau, p.delta
    return (-b * k ** 3 * (1 + k) / (16 * (d - gamma * t)) * _kbt(p) ** (-2.0 / (k * (1 + k)))
            * ((2 + k) * d - gamma * t))


def l1_numeric(p: NormalFormParams, gamma: float) -> float:
    """Lyapunov coefficient of the (x1, rho1) system at the Hopf point."""
    q = _with_gamma(p, gamma)
    mh = mu_hat_ah(q, gamma)
    rho = _kbt(q) ** (1.0 / (q.k * (1 + q.k)))
    return first_lyapunov(x1rho1_field(q, mh), [-q.beta, rho])[0]


def bt_coefficients(p: NormalFormParams) -> Tuple[float, float]:
    """(a20 + b11, b20) nondegeneracy coefficients at the BT point."""
    k, b, t, d = p.k, p.beta, p.tau, p.delta
    f = _kbt(p) ** (-1.0 / (k * k + k))
    return -b * b * d * k ** 3 * (k + 1) * f / (2 * t * t), b * k * k * (k + 1) * f


def _with_gamma(p: NormalFormParams, gamma: float) -> NormalFormParams:
    from dataclasses import replace
    return replace(p, gamma=gamma)


def analytic_bifurcation(p: NormalFormParams, gamma: float, kind) -> BifurcationCurvePoint:
    kind = CurveKind(kind)
    if kind is CurveKind.SN:
        return BifurcationCurvePoint(kind, gamma, mu_hat_sn(p, gamma))
    if kind is CurveKind.AH:
        mh = mu_hat_ah(p, gamma)
        if p.delta <= 0:
            raise OutOfDomain("Hopf with l1 formula requires delta > 0", "delta > 0")
        l1 = l1_closed(p, gamma)
        if not l1 < 0:
            raise AssertionError("l1 must be negative in the Hopf domain")
        return BifurcationCurvePoint(kind, gamma, mh, {"l1": l1})
    if kind is CurveKind.BT:
        mh, gb = bt_point(p)
        a, b = bt_coefficients(p)
        q = _with_gamma(p, gb)
        eqs = find_equilibria(q, mh)
        ev = np.linalg.eigvals(jacobian_xy(q, mh, eqs[0].X, eqs[0].Y)) if eqs else [np.nan, np.nan]
        return BifurcationCurvePoint(kind, gb, mh, {"a20_plus_b11": a, "b20": b,
                                                     "eig_abs_max": float(np.max(np.abs(ev)))})
    if kind is CurveKind.HOM_LOCAL:
        return BifurcationCurvePoint(kind, gamma, mu_hat_hom_local(p, gamma))
    raise OutOfDomain(f"no closed form for {kind.value}", "kind")


def lift_to_eps(mu_hat: float, eps: float, k: int) -> float:
    if eps < 0:
        raise DomainError("eps must be nonnegative", "eps >= 0")
    return mu_hat * eps ** (k / (1.0 + k))


def mu_hat_from_mu(mu: float, eps: float, k: int) -> float:
    return mu / eps ** (k / (1.0 + k))


# ---------------------------------------------------------------------------
# numerical detection (independent of the closed forms)

def numeric_sn(p: NormalFormParams, gamma: float, mu_lo: float = -50.0,
               mu_hi: float = 50.0) -> Tuple[float, Equilibrium, float]:
    """Fold of equilibria: Newton on {h = 0, dh/dY = 0} in (Y, mu_hat).

    The initial guess comes from bisection on the number of equilibria.
    Returns (mu_hat, equilibrium, det of the numerical XY Jacobian).
    """
    q = _with_gamma(p, gamma)
    count = lambda m: len(find_equilibria(q, m))
    grid = np.linspace(mu_lo, mu_hi, 401)
    counts = [count(m) for m in grid]
    idx = [i for i in range(len(grid) - 1) if (counts[i] == 0) != (counts[i + 1] == 0)]
    if not idx:
        raise NoBracket("no change in the number of equilibria")
    a, b = grid[idx[0]], grid[idx[0] + 1]
    for _ in range(60):
        m = 0.5 * (a + b)
        if (count(m) == 0) == (counts[idx[0]] == 0):
            a = m
        else:
            b = m
    k, d, gb = q.k, q.delta, q.gamma * q.beta
    m0 = 0.5 * (a + b)
    y0 = k * m0 / ((1 + k) * d)

    def F(v):
        Y, m = v
        return [m * Y ** k - d * Y ** (1 + k) - gb,
                k * m * Y ** (k - 1) - (1 + k) * d * Y ** k]
    sol, info, ier, msg = so.fsolve(F, [y0, m0], xtol=1e-15, full_output=True)
    if ier != 1 and np.max(np.abs(F(sol))) > 1e-12:
        raise NoConvergence(f"double-root Newton failed: {msg}")
    Y, m = sol
    X = -q.beta / Y ** k
    tr, det = trace_det(q, m, Y)
    eq = Equilibrium(X, Y, tr, det, eigen_kind(tr, det),
                     float(np.linalg.norm(xy_field(q, m)(0.0, np.array([X, Y])))))
    Jn = numeric_jacobian(xy_field(q, m), [X, Y])
    return float(m), eq, float(np.linalg.det(Jn))


def _antisaddle(q: NormalFormParams, m: float) -> Optional[Equilibrium]:
    for e in find_equilibria(q, m):
        if e.det > 0:
            return e
    return None


def numeric_ah(p: NormalFormParams, gamma: float, mu_lo: float = -50.0,
               mu_hi: float = 50.0) -> Tuple[float, Equilibrium, float, float]:
    """Trace of the numerical XY Jacobian at the non-saddle equilibrium
    crossing zero. Returns (mu_hat, equilibrium, trace, det)."""
    q = _with_gamma(p, gamma)

    def tr(m):
        e = _antisaddle(q, m)
        if e is None:
            return float("nan")
        return float(np.trace(numeric_jacobian(xy_field(q, m), [e.X, e.Y])))

    grid = np.linspace(mu_lo, mu_hi, 801)
    vals = [tr(m) for m in grid]
    br = None
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        if np.isfinite(vals[i + 1]) and not np.isfinite(vals[i]):
            # the antisaddle is born inside this cell; move a to its birth point
            for _ in range(60):
                mid = 0.5 * (a + b)
                if np.isfinite(tr(mid)):
                    b = mid
                else:
                    a = mid
            a, b = b, grid[i + 1]
            if a == b or np.sign(tr(a)) == np.sign(vals[i + 1]):
                continue
            br = (a, b)
            break
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and np.sign(vals[i]) != np.sign(vals[i + 1]):
            br = (a, b)
            break
    if br is None:
        raise NoBracket("trace does not change sign on the scanned range")
    # exact-trace root of the analytic Jacobian for precision, then numerical check
    trj = lambda m: float(np.trace(jacobian_xy(q, m, _antisaddle(q, m).X, _antisaddle(q, m).Y)))
    m = find_root(trj, br, tol=1e-10)
    e = _antisaddle(q, m)
    Jn = numeric_jacobian(xy_field(q, m), [e.X, e.Y])
    return m, e, float(np.trace(Jn)), float(np.linalg.det(Jn))


def hopf_cycle(p: NormalFormParams, gamma: float, offset: float = 0.01,
               settle: int = 400) -> CycleRecord:
    """Limit cycle of the (x1, rho1) system at mu_hat = mu_hat_ah + offset.

    Forward returns to the section x1 = -beta relax onto the attracting
    cycle; Newton on the return map then polishes it.
    """
    q = _with_gamma(p, gamma)
    m = mu_hat_ah(q, gamma) + offset
    eq = _antisaddle(q, m)
    if eq is None:
        raise OutOfDomain("no antisaddle past the Hopf point", "gamma < delta/tau")
    x1, r = eq.x1rho1(q.k)
    f = x1rho1_field(q, m)
    sec = Section((1.0, 0.0), x1, +1)
    z = np.array([x1, r * (1 + 1e-3)])
    for _ in range(settle):
        z2, _, _ = poincare_return(f, sec, z, t_max=1e3, tol=1e-10)
        if abs(z2[1] - z[1]) < 1e-10:
            z = z2
            break
        z = z2
    if abs(z[1] - r) < 1e-6 * r:
        raise NoConvergence("orbit fell back onto the equilibrium")
    return find_limit_cycle(f, sec, z, tol=1e-11, fd_scale=abs(z[1] - r), mu=m)
