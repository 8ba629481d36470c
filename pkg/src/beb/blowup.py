"""Directional charts of the blow-up of (x, y, eps, mu) = 0.

With A = 2k(1+k), B = k(1+k), E = 2(1+k)^2, F = (2k+1)(1+k):

  EPS1 chart (x1, rho1, nu1, mu1):
      x = nu1^A rho1^B x1,  y = nu1^A rho1^A,  eps = nu1^E rho1^F,  mu = nu1^A mu1
  RHO1 chart (x2, eps2, nu2, mu2):
      x = nu2^A x2,  y = nu2^A,  eps = nu2^E eps2,  mu = nu2^A mu2

The chart fields are the pullbacks of the fast-time field eps*X divided by
nu1^E rho1^((1+k)^2) and nu2^E eps2 respectively. The regime parameter
mu_hat = mu / eps^(k/(1+k)) is a first integral in both charts.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ChartBoundary, DomainError
from .model import NormalFormParams, full_field


class Chart(str, enum.Enum):
    EPS1 = "EPS1"
    RHO1 = "RHO1"


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    c: Tuple[float, float, float, float]

    def __post_init__(self):
        c = tuple(self.c)
        object.__setattr__(self, "c", c)
        if Chart(self.chart) is Chart.EPS1:
            if c[1] < 0 or c[2] < 0:
                raise DomainError("EPS1 needs rho1 >= 0 and nu1 >= 0", "rho1, nu1 >= 0")
        elif c[1] < 0 or c[2] < 0:
            raise DomainError("RHO1 needs eps2 >= 0 and nu2 >= 0", "eps2, nu2 >= 0")


def _exps(k: int):
    return 2 * k * (1 + k), k * (1 + k), 2 * (1 + k) ** 2, (2 * k + 1) * (1 + k)


def _embed(chart: Chart, c, k: int):
    A, B, E, F = _exps(k)
    a, b, n, m = c
    if chart is Chart.EPS1:
        na = n ** A
        return (na * b ** B * a, na * b ** A, n ** E * b ** F, na * m)
    na = n ** A
    return (na * a, na, n ** E * b, na * m)


def chart_embed(pt: ChartPoint, k: int) -> Tuple[float, float, float, float]:
    return tuple(float(v) for v in _embed(Chart(pt.chart), pt.c, k))


def chart_from_full(chart: Chart, x: float, y: float, eps: float, mu: float, k: int) -> ChartPoint:
    """Inverse of chart_embed for y > 0, eps > 0."""
    if y <= 0 or eps <= 0:
        raise ChartBoundary("inverse chart map needs y > 0 and eps > 0", "y, eps > 0")
    A, B, E, F = _exps(k)
    if Chart(chart) is Chart.RHO1:
        n = y ** (1.0 / A)
        na = n ** A
        return ChartPoint(Chart.RHO1, (x / na, eps / n ** E, n, mu / na))
    nr = y ** (1.0 / A)
    r = (nr ** E / eps) ** (1.0 / (1 + k))
    n = nr / r
    na = n ** A
    return ChartPoint(Chart.EPS1, (x / (na * r ** B), r, n, mu / na))


def chart_transition(pt: ChartPoint, target: Chart, k: int) -> ChartPoint:
    src, target = Chart(pt.chart), Chart(target)
    if src is target:
        return pt
    B = k * (1 + k)
    if src is Chart.EPS1:
        x1, r, n, m = pt.c
        if r <= 0:
            raise ChartBoundary("EPS1 -> RHO1 needs rho1 > 0", "rho1 > 0")
        return ChartPoint(Chart.RHO1, (x1 * r ** (-B), r ** (-(1 + k)), n * r, m * r ** (-2 * B)))
    x2, e, n, m = pt.c
    if e <= 0:
        raise ChartBoundary("RHO1 -> EPS1 needs eps2 > 0", "eps2 > 0")
    r = e ** (-1.0 / (1 + k))
    return ChartPoint(Chart.EPS1, (x2 * r ** B, r, n / r, m * r ** (2 * B)))


def mu_hat_of(pt: ChartPoint, k: int) -> float:
    if Chart(pt.chart) is Chart.EPS1:
        r, m = pt.c[1], pt.c[3]
        if r <= 0:
            raise ChartBoundary("mu_hat undefined at rho1 = 0", "rho1 > 0")
        return m * r ** (-k * (2 * k + 1))
    e, m = pt.c[1], pt.c[3]
    if e <= 0:
        raise ChartBoundary("mu_hat undefined at eps2 = 0", "eps2 > 0")
    return m * e ** (-k / (1.0 + k))


def _check_tail(p: NormalFormParams, nu: float):
    if nu > 0 and p.reg.eval is None:
        raise DomainError("direct (k, beta) mode only supports nu = 0", "nu = 0")


def eps1_field(p: NormalFormParams):
    k, tau, delta, gamma = p.k, p.tau, p.delta, p.gamma
    A, B, _, _ = _exps(k)
    phip, th1, th2 = p.reg.phi_plus, p.theta1, p.theta2
    c_nu = -(2 * k + 1) / (2.0 * k * (1 + k))

    def f(t, z):
        x1, r, n, m = z
        _check_tail(p, n)
        rB = r ** B
        na = n ** A
        u = n ** (2 * (1 + k)) * r ** (1 + k)
        ph = float(phip(u))
        w = na * rB * ph
        t1 = th1.scaled(rB * x1, r ** A, m, 1.0, na) if th1 else 0.0
        t2 = th2.scaled(x1, rB, m, rB, na) if th2 else 0.0
        g = (x1 + t2) * (1.0 - w) + ph
        fx = (m + tau * rB * x1 - delta * r ** A + t1) * (1.0 - w) - rB * ph * (gamma - tau)
        return np.array([fx + k * x1 * g, r * g / k, c_nu * n * g, (2 * k + 1) * m * g])
    return f


def rho1_field(p: NormalFormParams):
    k, tau, delta, gamma = p.k, p.tau, p.delta, p.gamma
    A, _, _, _ = _exps(k)
    phip, th1, th2 = p.reg.phi_plus, p.theta1, p.theta2
    c_nu = 1.0 / (2.0 * k * (1 + k))
    c_e = -(1.0 + k) / k

    def f(t, z):
        x2, e, n, m = z
        _check_tail(p, n)
        na = n ** A
        u = n ** (2 * (1 + k)) * e
        ph = float(phip(u))
        ek = e ** k
        w = na * ek * ph
        t1 = th1.scaled(x2, 1.0, m, 1.0, na) if th1 else 0.0
        t2 = th2.scaled(x2, 1.0, m, 1.0, na) if th2 else 0.0
        g = (x2 + t2) * (1.0 - w) + ek * ph
        fx = (m + tau * x2 - delta + t1) * (1.0 - w) - ek * ph * (gamma - tau)
        return np.array([fx - x2 * g, c_e * e * g, c_nu * n * g, -m * g])
    return f


def chart_vector_field(p: NormalFormParams, chart: Chart):
    return eps1_field(p) if Chart(chart) is Chart.EPS1 else rho1_field(p)


def chart_field(p: NormalFormParams, pt: ChartPoint) -> np.ndarray:
    return chart_vector_field(p, pt.chart)(0.0, np.asarray(pt.c, dtype=float))


def desingularization_factor(pt: ChartPoint, k: int) -> float:
    _, _, E, _ = _exps(k)
    if Chart(pt.chart) is Chart.EPS1:
        return pt.c[2] ** E * pt.c[1] ** ((1 + k) ** 2)
    return pt.c[2] ** E * pt.c[1]


def pullback_field(p: NormalFormParams, pt: ChartPoint) -> np.ndarray:
    """eps*X expressed in chart coordinates and divided by the chart factor.

    Independent of the chart formulas: uses the complex-step Jacobian of the
    embedding and the regularized field itself.
    """
    k = p.k
    chart = Chart(pt.chart)
    c = np.asarray(pt.c, dtype=float)
    h = 1e-30
    J = np.empty((4, 4))
    for j in range(4):
        cc = c.astype(complex)
        cc[j] += 1j * h
        J[:, j] = np.imag(np.array(_embed(chart, cc, k))) / h
    x, y, eps, mu = _embed(chart, c, k)
    X = full_field(p, mu=mu, eps=eps)(0.0, np.array([x, y]))
    rhs = np.array([eps * X[0], eps * X[1], 0.0, 0.0])
    return np.linalg.solve(J, rhs) / desingularization_factor(pt, k)


def rho1_reduced_field(p: NormalFormParams):
    """RHO1 field on nu2 = 0 in the variables (x2, eps2, mu2)."""
    f = rho1_field(p)

    def g(t, z):
        v = f(t, np.array([z[0], z[1], 0.0, z[2]]))
        return np.array([v[0], v[1], v[3]])
    return g


def rho1_fast_equilibria(p: NormalFormParams) -> Tuple[float, float]:
    """x2 coordinates of the two equilibria on nu2 = eps2 = mu2 = 0."""
    s = np.sqrt(p.disc)
    return (p.tau - s) / 2, (p.tau + s) / 2
