"""Normal form parameters, regularization functions and the vector fields.

The regularized normal form (slow time) is

    x' = tau - gamma + phi(y/eps) * (gamma - tau + mu + tau*x - delta*y + theta1)
    y' = 1 + phi(y/eps) * (-1 + x + theta2)

with phi a monotone switching function with algebraic tails
1 - phi(s) ~ beta_plus * s**-k_plus as s -> +inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import (BadThetaOrder, DegenerateDelta, DegenerateTau,
                     DomainError, ParameterError, TailMismatch)

# monomial name -> exponents of (x, y, mu)
MONOMIALS: Dict[str, Tuple[int, int, int]] = {
    "x2": (2, 0, 0), "xy": (1, 1, 0), "y2": (0, 2, 0),
    "xmu": (1, 0, 1), "ymu": (0, 1, 1), "mu2": (0, 0, 2),
}
THETA1_ALLOWED = frozenset(MONOMIALS)
THETA2_ALLOWED = frozenset(MONOMIALS) - {"mu2"}

ZERO_TOL = 1e-12  # relative tolerance for "this quantity is zero"


# ---------------------------------------------------------------------------
# regularization functions

@dataclass(frozen=True)
class Regularization:
    id: str                                   # arctan | algebraic_sigmoid | user | direct
    eval: Optional[Callable[[float], float]]  # phi(s); None in direct mode
    k_plus: int
    k_minus: int
    beta_plus: float
    beta_minus: float
    phi_plus: Callable[[float], float]        # 1 - phi(s) = s^-k phi_plus(1/s), s > 0
    phi_minus: Callable[[float], float]       # phi(-s) = s^-k phi_minus(1/s), s > 0
    inverse: Optional[Callable[[float], float]] = None

    def __call__(self, s):
        if self.eval is None:
            raise DomainError("direct (k, beta) mode has no switching function",
                              constraint="concrete phi required")
        return self.eval(s)

    @property
    def k(self) -> int:
        return self.k_plus

    @property
    def beta(self) -> float:
        return self.beta_plus


def _arctan_tail(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u > 1e-4, np.arctan(u) / np.where(u > 0, u, 1.0),
                       1.0 - u * u / 3.0)
    return out / math.pi if out.ndim else float(out) / math.pi


def _algebraic_tail(u):
    u = np.asarray(u, dtype=float)
    r = np.sqrt(1.0 + u * u)
    out = 1.0 / (2.0 * r * (1.0 + r))
    return out if out.ndim else float(out)


def _arctan_phi(s):
    if np.ndim(s) == 0:
        return 0.5 + math.atan(s) / math.pi
    return 0.5 + np.arctan(s) / np.pi


def _algebraic_phi(s):
    if np.ndim(s) == 0:
        return 0.5 * (1.0 + s / math.sqrt(s * s + 1.0))
    s = np.asarray(s, dtype=float)
    return 0.5 * (1.0 + s / np.sqrt(s * s + 1.0))


ARCTAN = Regularization(
    id="arctan", eval=_arctan_phi, k_plus=1, k_minus=1,
    beta_plus=1.0 / math.pi, beta_minus=1.0 / math.pi,
    phi_plus=_arctan_tail, phi_minus=_arctan_tail,
    inverse=lambda p: math.tan(math.pi * (p - 0.5)),
)

ALGEBRAIC_SIGMOID = Regularization(
    id="algebraic_sigmoid", eval=_algebraic_phi, k_plus=2, k_minus=2,
    beta_plus=0.25, beta_minus=0.25,
    phi_plus=_algebraic_tail, phi_minus=_algebraic_tail,
    inverse=lambda p: (2 * p - 1) / math.sqrt(1 - (2 * p - 1) ** 2),
)

BUILTIN = {"arctan": ARCTAN, "algebraic_sigmoid": ALGEBRAIC_SIGMOID}


def direct_tail(k: int = 1, beta: float = 0.5) -> Regularization:
    """Tail data (k, beta) without a switching function.

    Only the desingularized systems on the blow-up sphere can be evaluated;
    there the switching function enters solely through (k, beta).
    """
    _check_tail_decl(k, beta)
    const = lambda u: beta + 0.0 * np.asarray(u, dtype=float)
    return Regularization(id="direct", eval=None, k_plus=k, k_minus=k,
                          beta_plus=beta, beta_minus=beta,
                          phi_plus=const, phi_minus=const)


def _check_tail_decl(k, beta):
    if int(k) != k or k < 1:
        raise ParameterError(f"tail exponent must be a positive integer, got {k}", "k >= 1")
    if not beta > 0:
        raise ParameterError(f"tail coefficient must be positive, got {beta}", "beta > 0")


def _fitted_tail(phi, k, beta, side, u_switch=1e-3):
    """Tail factor built from phi itself, with a linear fit near u = 0."""
    if side > 0:
        raw = lambda u: (1.0 - phi(1.0 / u)) / u ** k
    else:
        raw = lambda u: phi(-1.0 / u) / u ** k
    us = np.linspace(u_switch, 10 * u_switch, 8)
    slope = float(np.polyfit(us, [raw(u) - beta for u in us], 1)[0])

    def tail(u):
        if np.ndim(u):
            return np.array([tail(v) for v in np.ravel(u)]).reshape(np.shape(u))
        return raw(u) if u > u_switch else beta + slope * u
    return tail


def user_regularization(phi: Callable[[float], float], k: int, beta: float,
                        k_minus: Optional[int] = None, beta_minus: Optional[float] = None,
                        phi_plus=None, phi_minus=None, check: bool = True) -> Regularization:
    k_minus = k if k_minus is None else k_minus
    beta_minus = beta if beta_minus is None else beta_minus
    _check_tail_decl(k, beta)
    _check_tail_decl(k_minus, beta_minus)
    reg = Regularization(
        id="user", eval=phi, k_plus=k, k_minus=k_minus,
        beta_plus=beta, beta_minus=beta_minus,
        phi_plus=phi_plus or _fitted_tail(phi, k, beta, +1),
        phi_minus=phi_minus or _fitted_tail(phi, k_minus, beta_minus, -1),
    )
    if check:
        verify_regularization(reg)
    return reg


def reg_eval(reg: Regularization, s: float) -> float:
    return reg(s)


def fit_tail(reg: Regularization, side: int = +1, lo: float = 1e3, hi: float = 1e6,
             n: int = 16) -> Tuple[float, float]:
    """Least-squares fit of log(1 - phi(s)) = log(beta) - k log(s) on [lo, hi]."""
    s = np.geomspace(lo, hi, n)
    if side > 0:
        vals = np.array([1.0 - reg(v) for v in s])
    else:
        vals = np.array([reg(-v) for v in s])
    if np.any(vals <= 0):
        raise TailMismatch("switching function saturates before the tail window",
                           constraint="algebraic tail")
    slope, icpt = np.polyfit(np.log(s), np.log(vals), 1)
    return -slope, math.exp(icpt)


def verify_regularization(reg: Regularization, rel: float = 0.01) -> None:
    """Sampled checks of monotonicity, limits and the declared tails."""
    if reg.eval is None:
        return
    s = np.concatenate([-np.geomspace(1e6, 1e-3, 200), [0.0], np.geomspace(1e-3, 1e6, 200)])
    vals = np.array([reg(v) for v in s])
    # near saturation floating point can make consecutive values equal
    if np.any(np.diff(vals) < 0) or not np.all((vals[1:-1] > 0) & (vals[1:-1] < 1)):
        raise ParameterError("switching function is not monotone in (0, 1)", "monotone")
    if abs(1 - reg(1e6)) > 1e-3 or abs(reg(-1e6)) > 1e-3:
        raise ParameterError("switching function has wrong limits", "limits")
    for side, k, beta in ((+1, reg.k_plus, reg.beta_plus), (-1, reg.k_minus, reg.beta_minus)):
        for sv in (1e3, 1e4, 1e5):
            tail = sv ** k * ((1 - reg(sv)) if side > 0 else reg(-sv))
            if abs(tail - beta) > rel * beta:
                raise TailMismatch(
                    f"s^k tail at s={sv:g} is {tail:.6g}, declared beta={beta:.6g}",
                    constraint="tail coefficient")
        kf, _ = fit_tail(reg, side)
        if abs(kf - k) > 0.05:
            raise TailMismatch(f"fitted tail exponent {kf:.4f} differs from declared {k}",
                               constraint="tail exponent")


def reg_tail_params(reg: Regularization, verify: bool = True) -> Tuple[int, float]:
    if verify:
        verify_regularization(reg)
    return reg.k_plus, reg.beta_plus


def regularization_by_name(name: str, k: Optional[int] = None,
                           beta: Optional[float] = None) -> Regularization:
    if name == "direct":
        return direct_tail(1 if k is None else k, 0.5 if beta is None else beta)
    if name not in BUILTIN:
        raise ParameterError(f"unknown regularization {name!r}", "reg")
    reg = BUILTIN[name]
    if (k is not None and k != reg.k_plus) or (beta is not None and abs(beta - reg.beta_plus) > 0.01 * reg.beta_plus):
        raise TailMismatch(f"{name} has (k, beta) = ({reg.k_plus}, {reg.beta_plus:.7g})",
                           constraint="tail coefficient")
    return reg


# ---------------------------------------------------------------------------
# higher-order terms

@dataclass(frozen=True)
class Theta:
    """Quadratic polynomial in (x, y, mu) given by monomial coefficients."""
    coeffs: Tuple[Tuple[str, float], ...] = ()

    @classmethod
    def from_mapping(cls, m: Optional[Mapping[str, float]]) -> "Theta":
        if not m:
            return cls()
        return cls(tuple(sorted((str(k), float(v)) for k, v in m.items() if v != 0.0)))

    def as_dict(self) -> Dict[str, float]:
        return dict(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __call__(self, x, y, mu):
        out = 0.0
        for name, c in self.coeffs:
            a, b, e = MONOMIALS[name]
            out = out + c * x ** a * y ** b * mu ** e
        return out

    def grad(self, x, y, mu):
        """Partial derivatives with respect to x and y."""
        gx = gy = 0.0
        for name, c in self.coeffs:
            a, b, e = MONOMIALS[name]
            if a:
                gx += c * a * x ** (a - 1) * y ** b * mu ** e
            if b:
                gy += c * b * x ** a * y ** (b - 1) * mu ** e
        return gx, gy

    def scaled(self, u, v, w, q, z):
        """theta(z*q*u, z*q*v, z*w) / (z*q), exact for quadratic monomials."""
        out = 0.0
        for name, c in self.coeffs:
            a, b, e = MONOMIALS[name]
            out += c * z * q ** (a + b - 1) * u ** a * v ** b * w ** e
        return out


# ---------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class NormalFormParams:
    tau: float
    delta: float
    gamma: float
    mu: float = 0.0
    eps: float = 0.0
    theta1: Theta = field(default_factory=Theta)
    theta2: Theta = field(default_factory=Theta)
    reg: Regularization = field(default_factory=direct_tail)

    @property
    def disc(self) -> float:
        """tau^2 - 4 delta."""
        return self.tau ** 2 - 4.0 * self.delta

    @property
    def k(self) -> int:
        return self.reg.k_plus

    @property
    def beta(self) -> float:
        return self.reg.beta_plus

    def with_(self, **kw) -> "NormalFormParams":
        return validate_params(replace(self, **kw))


def validate_params(raw) -> NormalFormParams:
    """Build a checked parameter record from a record, mapping or tuple."""
    if isinstance(raw, NormalFormParams):
        p = raw
    elif isinstance(raw, Mapping):
        d = dict(raw)
        reg = d.pop("reg", None)
        if isinstance(reg, str):
            reg = regularization_by_name(reg, d.pop("k", None), d.pop("beta", None))
        elif reg is None:
            k, beta = d.pop("k", 1), d.pop("beta", 0.5)
            reg = direct_tail(k, beta)
        p = NormalFormParams(
            tau=float(d.pop("tau")), delta=float(d.pop("delta")), gamma=float(d.pop("gamma")),
            mu=float(d.pop("mu", 0.0)), eps=float(d.pop("eps", 0.0)),
            theta1=Theta.from_mapping(d.pop("theta1", None)),
            theta2=Theta.from_mapping(d.pop("theta2", None)), reg=reg)
        if d:
            raise ParameterError(f"unknown parameter keys {sorted(d)}", "known keys")
    else:
        p = NormalFormParams(*[float(v) for v in raw])
    if not all(map(math.isfinite, (p.tau, p.delta, p.gamma, p.mu, p.eps))):
        raise ParameterError("parameters must be finite", "finite")
    scale = max(1.0, abs(p.tau), abs(p.delta))
    if abs(p.tau) < ZERO_TOL * scale:
        raise DegenerateTau("tau must be nonzero", "tau != 0")
    if abs(p.delta) < ZERO_TOL * scale:
        raise DegenerateDelta("delta must be nonzero", "delta != 0")
    if abs(p.disc) < ZERO_TOL * max(scale, p.tau ** 2):
        raise DegenerateDelta("delta must differ from tau^2/4", "delta != tau^2/4")
    if p.eps < 0:
        raise ParameterError("eps must be nonnegative", "eps >= 0")
    for name, th, allowed in (("theta1", p.theta1, THETA1_ALLOWED), ("theta2", p.theta2, THETA2_ALLOWED)):
        bad = [m for m, _ in th.coeffs if m not in allowed]
        if bad:
            raise BadThetaOrder(f"{name} has monomials {bad} outside {sorted(allowed)}",
                                f"{name} order")
    return p


# ---------------------------------------------------------------------------
# vector fields (slow time)

def plus_field(p: NormalFormParams, mu: Optional[float] = None):
    """X+ = (mu + tau x - delta y + theta1, x + theta2)."""
    mu = p.mu if mu is None else mu
    tau, delta, th1, th2 = p.tau, p.delta, p.theta1, p.theta2

    def f(t, z):
        x, y = z[0], z[1]
        return np.array([mu + tau * x - delta * y + (th1(x, y, mu) if th1 else 0.0),
                         x + (th2(x, y, mu) if th2 else 0.0)])
    return f


def minus_field(p: NormalFormParams):
    """X- = (tau - gamma, 1)."""
    v = np.array([p.tau - p.gamma, 1.0])
    return lambda t, z: v.copy()


def full_field(p: NormalFormParams, mu: Optional[float] = None, eps: Optional[float] = None):
    """Regularized field X(x, y, mu, eps); requires a concrete switching function."""
    mu = p.mu if mu is None else mu
    eps = p.eps if eps is None else eps
    if eps <= 0:
        raise DomainError("the regularized field needs eps > 0", "eps > 0")
    if p.reg.eval is None:
        raise DomainError("direct (k, beta) mode has no switching function",
                          "concrete phi required")
    tau, delta, gamma, th1, th2 = p.tau, p.delta, p.gamma, p.theta1, p.theta2
    phi = p.reg.eval
    tg = tau - gamma

    def f(t, z):
        x, y = z[0], z[1]
        ph = phi(y / eps)
        return np.array([
            tg + ph * (-tg + mu + tau * x - delta * y + (th1(x, y, mu) if th1 else 0.0)),
            1.0 + ph * (-1.0 + x + (th2(x, y, mu) if th2 else 0.0)),
        ])
    return f


# ---------------------------------------------------------------------------
# key=value parameter files

def params_to_text(p: NormalFormParams) -> str:
    lines = [f"tau={p.tau!r}", f"delta={p.delta!r}", f"gamma={p.gamma!r}",
             f"mu={p.mu!r}", f"eps={p.eps!r}", f"reg={p.reg.id}"]
    if p.reg.id == "direct":
        lines += [f"k={p.reg.k_plus}", f"beta={p.reg.beta_plus!r}"]
    elif p.reg.id == "user":
        raise ParameterError("user regularizations cannot be serialized", "reg")
    for name, th in (("theta1", p.theta1), ("theta2", p.theta2)):
        lines += [f"{name}.{m}={c!r}" for m, c in th.coeffs]
    return "\n".join(lines) + "\n"


PARAM_KEYS = {"tau", "delta", "gamma", "mu", "eps", "reg", "k", "beta"}


def parse_key_values(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected key=value", "syntax")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ParameterError(f"line {lineno}: duplicate key {key!r}", "syntax")
        out[key] = val
    return out


def params_from_text(text: str) -> NormalFormParams:
    kv = parse_key_values(text)
    d: Dict[str, object] = {}
    th: Dict[str, Dict[str, float]] = {"theta1": {}, "theta2": {}}
    try:
        for key, val in kv.items():
            if key in PARAM_KEYS:
                d[key] = val if key == "reg" else (int(val) if key == "k" else float(val))
            elif key.split(".", 1)[0] in th and "." in key:
                which, mono = key.split(".", 1)
                if mono not in MONOMIALS:
                    raise BadThetaOrder(f"unknown monomial {mono!r}", f"{which} order")
                th[which][mono] = float(val)
            else:
                raise ParameterError(f"unknown key {key!r}", "known keys")
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(str(exc), "numeric value") from exc
    for req in ("tau", "delta", "gamma"):
        if req not in d:
            raise ParameterError(f"missing key {req!r}", "required keys")
    d.setdefault("reg", "direct")
    d["theta1"], d["theta2"] = th["theta1"], th["theta2"]
    return validate_params(d)
