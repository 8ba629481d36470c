import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from beb.desing import (bt_coefficients, bt_point, find_equilibria, hom_slope, jacobian_xy,
                        l1_closed, l1_numeric, lift_to_eps, mu_hat_ah, mu_hat_from_mu,
                        mu_hat_hom_local, mu_hat_sn, numeric_ah, numeric_jacobian, numeric_sn,
                        pushforward_xy, x1rho1_field, x1rho1_to_xy, xy_field, xy_to_x1rho1)
from beb.errors import OutOfDomain
from beb.model import NormalFormParams, direct_tail

P0 = NormalFormParams(1.0, 1.0, 0.5)


def test_bt_point_reference_values():
    mu, g = bt_point(P0)
    assert g == 1.0
    assert mu == pytest.approx(math.sqrt(2), abs=1e-14)
    assert hom_slope(P0) == pytest.approx(math.sqrt(0.5), abs=1e-14)


def test_sn_curve_matches_symbolic_double_root():
    # h(Y) = mu Y^k - delta Y^(1+k) - gamma beta has a double root on the SN curve
    Y, mu, g = sp.symbols("Y mu g", positive=True)
    for k in (1, 2, 3):
        h = mu * Y ** k - Y ** (1 + k) - g * sp.Rational(1, 2)
        sol = sp.solve([h, sp.diff(h, Y)], [Y, mu], dict=True)
        expr = [s[mu] for s in sol if s[mu].is_positive is not False][0]
        q = NormalFormParams(1.0, 1.0, 0.3, reg=direct_tail(k, 0.5))
        assert float(expr.subs(g, 0.3)) == pytest.approx(mu_hat_sn(q, 0.3), rel=1e-12)


@pytest.mark.parametrize("gamma", np.linspace(0.1, 0.95, 4))
def test_numeric_sn_and_ah_match_closed_forms(gamma):
    assert numeric_sn(P0, gamma)[0] == pytest.approx(mu_hat_sn(P0, gamma), abs=1e-9)
    m, e, tr, det = numeric_ah(P0, gamma)
    assert m == pytest.approx(mu_hat_ah(P0, gamma), abs=1e-9)
    assert abs(tr) < 1e-6 and det > 0


def test_domain_errors():
    with pytest.raises(OutOfDomain):
        mu_hat_sn(P0, -0.5)
    with pytest.raises(OutOfDomain):
        mu_hat_ah(P0, 1.5)
    with pytest.raises(OutOfDomain):
        mu_hat_hom_local(P0, 0.5)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bt_tangency(k):
    p = NormalFormParams(1.3, 0.8, 0.2, reg=direct_tail(k, 0.4))
    m, g = bt_point(p)
    assert mu_hat_sn(p, g) == pytest.approx(m, abs=1e-12)
    assert mu_hat_ah(p, g) == pytest.approx(m, abs=1e-12)
    assert mu_hat_hom_local(p, g) == pytest.approx(m, abs=1e-12)
    h = 1e-6
    s_sn = (mu_hat_sn(p, g) - mu_hat_sn(p, g - h)) / h
    s_ah = (mu_hat_ah(p, g) - mu_hat_ah(p, g - h)) / h
    assert s_sn == pytest.approx(s_ah, abs=1e-5)
    assert s_ah == pytest.approx(hom_slope(p), abs=1e-8)


@given(tau=st.floats(0.3, 3), delta=st.floats(0.3, 3), frac=st.floats(-2, 0.95),
       k=st.integers(1, 3))
def test_first_lyapunov_closed_form_negative(tau, delta, frac, k):
    if abs(tau * tau - 4 * delta) < 1e-3:
        return
    p = NormalFormParams(tau, delta, 0.1, reg=direct_tail(k, 0.5))
    g = frac * delta / tau
    assert l1_closed(p, g) < 0


@pytest.mark.parametrize("k,gamma", [(1, 0.5), (1, -1.0), (2, 0.3)])
def test_first_lyapunov_numeric_sign(k, gamma):
    p = NormalFormParams(1.0, 1.0, gamma, reg=direct_tail(k, 0.5))
    ln = l1_numeric(p, gamma)
    lc = l1_closed(p, gamma)
    assert ln < 0 and lc < 0


def test_bt_nondegeneracy_coefficients_nonzero():
    a, b = bt_coefficients(P0)
    assert a != 0 and b != 0


@given(X=st.floats(-5, 5), Y=st.floats(0.05, 5), k=st.integers(1, 3))
def test_linking_map_round_trip(X, Y, k):
    x1, r = xy_to_x1rho1(X, Y, k)
    X2, Y2 = x1rho1_to_xy(x1, r, k)
    assert X2 == pytest.approx(X, rel=1e-10, abs=1e-12)
    assert Y2 == pytest.approx(Y, rel=1e-12)


@given(X=st.floats(-2, 2), Y=st.floats(0.2, 2), mu=st.floats(-2, 2), k=st.integers(1, 3))
def test_linking_map_carries_orbits(X, Y, mu, k):
    # the two desingularized fields differ only by a positive time rescaling
    p = NormalFormParams(1.0, 1.0, 0.4, reg=direct_tail(k, 0.5))
    a = pushforward_xy(p, mu, X, Y)
    b = x1rho1_field(p, mu)(0.0, np.array(xy_to_x1rho1(X, Y, k)))
    cross = a[0] * b[1] - a[1] * b[0]
    assert abs(cross) <= 1e-9 * (1 + np.linalg.norm(a) * np.linalg.norm(b))
    assert np.dot(a, b) >= -1e-12


@given(mu=st.floats(-3, 3), gamma=st.floats(-2, 2))
def test_equilibria_residual_and_jacobian(mu, gamma):
    if abs(gamma) < 0.05:
        return              # gamma = 0 is excluded by the nondegeneracy conditions
    p = NormalFormParams(1.0, 1.0, gamma)
    for e in find_equilibria(p, mu):
        assert e.Y > 0 and e.residual < 1e-9
        J = jacobian_xy(p, mu, e.X, e.Y)
        Jn = numeric_jacobian(xy_field(p, mu), [e.X, e.Y], h=1e-7)
        assert np.allclose(J, Jn, atol=1e-5 * max(1, np.abs(J).max()))


@given(mu=st.floats(-1, 1), eps=st.floats(1e-8, 1), k=st.integers(1, 3))
def test_scaled_parameter_round_trip(mu, eps, k):
    assert lift_to_eps(mu_hat_from_mu(mu, eps, k), eps, k) == pytest.approx(mu, rel=1e-12, abs=1e-300)
