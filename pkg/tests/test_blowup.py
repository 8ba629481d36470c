import numpy as np
import pytest
from hypothesis import given, strategies as st

from beb.blowup import (Chart, ChartPoint, chart_embed, chart_field, chart_from_full,
                        chart_transition, chart_vector_field, mu_hat_of, pullback_field,
                        rho1_fast_equilibria, rho1_reduced_field)
from beb.desing import x1rho1_field
from beb.errors import ChartBoundary, DomainError
from beb.model import ALGEBRAIC_SIGMOID, ARCTAN, NormalFormParams, Theta, direct_tail
from beb.numerics import integrate

TH1 = Theta.from_mapping({"x2": 0.3, "xy": -0.2, "mu2": 0.1, "ymu": 0.25})
TH2 = Theta.from_mapping({"y2": -0.15, "xmu": 0.2, "x2": 0.1})


def rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))


@given(x=st.floats(-2, 2), y=st.floats(1e-3, 2), eps=st.floats(1e-4, 1),
       mu=st.floats(-1, 1), k=st.integers(1, 3),
       chart=st.sampled_from([Chart.EPS1, Chart.RHO1]))
def test_chart_round_trip(x, y, eps, mu, k, chart):
    pt = chart_from_full(chart, x, y, eps, mu, k)
    back = chart_embed(pt, k)
    assert np.allclose(back, (x, y, eps, mu), rtol=1e-9, atol=1e-12)


@given(x1=st.floats(-2, 2), r=st.floats(0.1, 3), n=st.floats(0, 1), m=st.floats(-1, 1),
       k=st.integers(1, 3))
def test_transition_preserves_embedding_and_mu_hat(x1, r, n, m, k):
    a = ChartPoint(Chart.EPS1, (x1, r, n, m))
    b = chart_transition(a, Chart.RHO1, k)
    assert np.allclose(chart_embed(a, k), chart_embed(b, k), rtol=1e-9, atol=1e-300)
    assert mu_hat_of(a, k) == pytest.approx(mu_hat_of(b, k), rel=1e-9, abs=1e-12)
    c = chart_transition(b, Chart.EPS1, k)
    assert np.allclose(c.c, a.c, rtol=1e-9, atol=1e-12)


def test_chart_boundaries():
    with pytest.raises(ChartBoundary):
        chart_transition(ChartPoint(Chart.EPS1, (0.1, 0.0, 0.5, 0.0)), Chart.RHO1, 1)
    with pytest.raises(ChartBoundary):
        mu_hat_of(ChartPoint(Chart.RHO1, (0.1, 0.0, 0.5, 0.0)), 1)
    with pytest.raises(DomainError):
        ChartPoint(Chart.EPS1, (0.1, -1.0, 0.5, 0.0))


def test_direct_mode_restricted_to_sphere():
    p = NormalFormParams(2.0, 0.5, -1.0, reg=direct_tail(1, 0.5))
    chart_field(p, ChartPoint(Chart.EPS1, (-0.2, 0.5, 0.0, 0.1)))
    with pytest.raises(DomainError):
        chart_field(p, ChartPoint(Chart.EPS1, (-0.2, 0.5, 0.3, 0.1)))


@pytest.mark.parametrize("reg", [ARCTAN, ALGEBRAIC_SIGMOID])
@pytest.mark.parametrize("chart", [Chart.EPS1, Chart.RHO1])
@given(x=st.floats(-1.5, 1.5), r=st.floats(0.5, 2), n=st.floats(0.5, 1), m=st.floats(-1, 1))
def test_chart_field_is_pullback_of_regularized_field(reg, chart, x, r, n, m):
    p = NormalFormParams(2.0, 0.5, -1.0, reg=reg, theta1=TH1, theta2=TH2)
    pt = ChartPoint(chart, (x, r, n, m))
    assert rel_err(chart_field(p, pt), pullback_field(p, pt)) <= 1e-8


@pytest.mark.parametrize("k", [1, 2])
@given(x1=st.floats(-1, 1), r=st.floats(0.05, 2), mh=st.floats(-2, 2))
def test_sphere_restriction_is_desingularized_system(k, x1, r, mh):
    p = NormalFormParams(2.0, 0.5, -1.0, reg=direct_tail(k, 0.5))
    m = mh * r ** (k * (2 * k + 1))
    a = chart_vector_field(p, Chart.EPS1)(0.0, np.array([x1, r, 0.0, m]))
    b = x1rho1_field(p, mh)(0.0, np.array([x1, r]))
    assert np.allclose(a[:2], b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("chart,z0", [(Chart.EPS1, [-0.4, 0.8, 0.6, 0.2]),
                                      (Chart.RHO1, [0.3, 0.7, 0.6, -0.1])])
def test_mu_hat_conserved_along_chart_flow(chart, z0):
    p = NormalFormParams(2.0, 0.5, -1.0, reg=ARCTAN)
    tr = integrate(chart_vector_field(p, chart), z0, (0.0, 2.0), tol=1e-13)
    mh = np.array([mu_hat_of(ChartPoint(chart, tuple(z)), 1) for z in tr.y])
    drift = np.abs(mh - mh[0]).max() / tr.t[-1]
    assert drift <= 1e-8


def test_fast_equilibria_on_reduced_field():
    p = NormalFormParams(2.0, 0.5, -1.0)
    f = rho1_reduced_field(p)
    for q in rho1_fast_equilibria(p):
        assert np.allclose(f(0.0, np.array([q, 0.0, 0.0])), 0.0, atol=1e-14)
