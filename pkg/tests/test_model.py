import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beb.errors import (BadThetaOrder, DegenerateDelta, DegenerateTau, DomainError,
                        ParameterError, TailMismatch)
from beb.model import (ALGEBRAIC_SIGMOID, ARCTAN, NormalFormParams, Theta, direct_tail,
                       fit_tail, full_field, params_from_text, params_to_text,
                       regularization_by_name, user_regularization, validate_params,
                       verify_regularization)


@pytest.mark.parametrize("reg,k,beta", [(ARCTAN, 1, 1 / math.pi), (ALGEBRAIC_SIGMOID, 2, 0.25)])
def test_builtin_tails_match_declared(reg, k, beta):
    verify_regularization(reg)
    kf, bf = fit_tail(reg, +1)
    assert kf == pytest.approx(k, abs=1e-3)
    assert bf == pytest.approx(beta, rel=1e-3)
    kf, bf = fit_tail(reg, -1)
    assert kf == pytest.approx(k, abs=1e-3)


@pytest.mark.parametrize("reg", [ARCTAN, ALGEBRAIC_SIGMOID])
@given(s=st.floats(0.5, 1e4))
def test_tail_factor_reproduces_switch(reg, s):
    # 1 - phi(s) = s^-k phi_plus(1/s)
    assert 1 - reg(s) == pytest.approx(s ** -reg.k * reg.phi_plus(1 / s), rel=1e-9)
    assert reg(-s) == pytest.approx(s ** -reg.k * reg.phi_minus(1 / s), rel=1e-9)


@pytest.mark.parametrize("reg", [ARCTAN, ALGEBRAIC_SIGMOID])
@given(p=st.floats(0.01, 0.99))
def test_inverse_switch(reg, p):
    assert reg(reg.inverse(p)) == pytest.approx(p, abs=1e-12)


def test_direct_mode_has_no_switch():
    with pytest.raises(DomainError):
        direct_tail(1, 0.5)(0.3)


def test_user_regularization_tail_checked():
    reg = user_regularization(lambda s: 0.5 + math.atan(s) / math.pi, 1, 1 / math.pi)
    assert reg.k == 1
    with pytest.raises(TailMismatch):
        user_regularization(lambda s: 0.5 + math.atan(s) / math.pi, 1, 0.5)
    with pytest.raises(TailMismatch):
        user_regularization(lambda s: 0.5 + math.atan(s) / math.pi, 2, 1 / math.pi)


def test_named_regularization_rejects_wrong_tail():
    assert regularization_by_name("arctan") is ARCTAN
    with pytest.raises(TailMismatch):
        regularization_by_name("arctan", k=2)
    with pytest.raises(ParameterError):
        regularization_by_name("logistic")


@pytest.mark.parametrize("raw,exc", [
    ((0.0, 1.0, 1.0), DegenerateTau),
    ((1.0, 0.0, 1.0), DegenerateDelta),
    ((2.0, 1.0, 1.0), DegenerateDelta),     # disc = 0
    ((1.0, 1.0, float("nan")), ParameterError),
])
def test_degenerate_parameters_rejected(raw, exc):
    with pytest.raises(exc):
        validate_params(raw)


def test_theta_order_enforced():
    with pytest.raises(BadThetaOrder):
        params_from_text("tau=1\ndelta=1\ngamma=1\ntheta1.x=1\n")


def test_unknown_key_rejected():
    with pytest.raises(ParameterError):
        params_from_text("tau=1\ndelta=1\ngamma=1\nfoo=2\n")


@given(tau=st.floats(-3, 3).filter(lambda t: abs(t) > 0.1),
       delta=st.floats(-3, 3).filter(lambda d: abs(d) > 0.1),
       gamma=st.floats(-3, 3), mu=st.floats(-1, 1), eps=st.floats(0, 1))
def test_text_round_trip(tau, delta, gamma, mu, eps):
    if abs(tau * tau - 4 * delta) < 1e-3:
        return
    p = validate_params(NormalFormParams(tau, delta, gamma, mu, eps, reg=ARCTAN))
    q = params_from_text(params_to_text(p))
    assert (q.tau, q.delta, q.gamma, q.mu, q.eps, q.reg.id) == (tau, delta, gamma, mu, eps, "arctan")


def test_full_field_reduces_to_sides_far_from_switch():
    p = NormalFormParams(1.0, 1.0, -0.5, mu=0.1, eps=1e-6, reg=ARCTAN)
    f = full_field(p)
    # far above: X+ = (mu + tau x - delta y, x); far below: X- = (tau - gamma, 1)
    up = f(0.0, np.array([0.3, 0.5]))
    down = f(0.0, np.array([0.3, -0.5]))
    assert up == pytest.approx([0.1 + 0.3 - 0.5, 0.3], abs=1e-5)
    assert down == pytest.approx([1.5, 1.0], abs=1e-5)


def test_theta_scaled_is_exact_quadratic_rescaling():
    th = Theta.from_mapping({"x2": 1.3, "xy": -0.7, "y2": 0.2, "xmu": 0.4, "ymu": -1.1, "mu2": 0.9})
    u, v, w, q, z = 0.3, -0.8, 1.7, 0.6, 0.45
    assert th.scaled(u, v, w, q, z) == pytest.approx(th(z * q * u, z * q * v, z * w) / (z * q))
