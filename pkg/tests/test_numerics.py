import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beb.errors import Blowup, NoReturn, NoSignChange, StallAtStep
from beb.numerics import (Event, Section, bisect_sign, find_limit_cycle, find_root,
                          first_lyapunov, integrate, liouville_multiplier, param_continue,
                          poincare_return)


def oscillator(t, z):
    return np.array([z[1], -z[0]])


def hopf_normal_form(a):
    def f(t, z):
        x, y = z
        r2 = x * x + y * y
        return np.array([a * x - y - x * r2, x + a * y - y * r2])
    return f


def test_integrate_matches_exact_solution():
    tr = integrate(oscillator, [1.0, 0.0], (0.0, 10.0), tol=1e-12)
    assert tr.final == pytest.approx([math.cos(10), -math.sin(10)], abs=1e-10)


def test_backward_integration():
    tr = integrate(oscillator, [1.0, 0.0], (0.0, -3.0), tol=1e-12)
    assert tr.final == pytest.approx([math.cos(3), math.sin(3)], abs=1e-10)


@given(c=st.floats(-0.9, 0.9))
def test_section_crossing_located(c):
    # x = cos t crosses x = c downward first at t = arccos(c)
    tr = integrate(oscillator, [1.0, 0.0], (0.0, 10.0), tol=1e-12,
                   sections=[Section((1.0, 0.0), c, direction=-1)])
    assert tr.termination == "event"
    assert tr.t[-1] == pytest.approx(math.acos(c), abs=1e-10)
    assert tr.final[0] == pytest.approx(c, abs=1e-12)


def test_nonterminal_events_are_recorded():
    ev = Event(lambda t, z: z[1], direction=0, terminal=False)
    tr = integrate(oscillator, [1.0, 0.0], (0.0, 10.0), tol=1e-12, sections=[ev])
    times = [e.t for e in tr.events_of(0)]
    assert times == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-9)


def test_blowup_detected():
    with pytest.raises(Blowup):
        integrate(lambda t, z: np.array([z[0] ** 2]), [1.0], (0.0, 2.0), blowup=1e6)


def test_root_finders():
    assert find_root(math.cos, (0.0, 3.0)) == pytest.approx(math.pi / 2, abs=1e-14)
    with pytest.raises(NoSignChange):
        find_root(lambda x: x * x + 1, (-1.0, 1.0))
    f = lambda x: math.inf if x > 0.3 else -1.0
    a, b = bisect_sign(f, 0.0, 1.0, xtol=1e-12)
    assert a <= 0.3 <= b and b - a <= 1e-12


def test_poincare_return_of_center():
    pt, T, _ = poincare_return(oscillator, Section((0.0, 1.0), 0.0, direction=-1), [0.5, 0.0],
                               t_max=20.0, tol=1e-12)
    assert T == pytest.approx(2 * math.pi, abs=1e-9)
    assert pt == pytest.approx([0.5, 0.0], abs=1e-10)
    with pytest.raises(NoReturn):
        poincare_return(lambda t, z: np.array([1.0, 0.0]), Section((0.0, 1.0), 0.0), [0.0, 0.0],
                        t_max=5.0)


@given(a=st.floats(0.05, 1.0))
def test_limit_cycle_of_hopf_normal_form(a):
    f = hopf_normal_form(a)
    cyc = find_limit_cycle(f, Section((0.0, 1.0), 0.0, direction=+1), [0.5, 0.0], tol=1e-11)
    r = math.sqrt(a)
    assert cyc.point[0] == pytest.approx(r, abs=1e-8)
    assert cyc.period == pytest.approx(2 * math.pi, abs=1e-8)
    # radial multiplier exp(-2 a T)
    # finite-difference multiplier: absolute accuracy limited by the integration tolerance
    assert cyc.floquet == pytest.approx(math.exp(-4 * math.pi * a), rel=1e-3, abs=1e-5)
    assert cyc.log_floquet == pytest.approx(-4 * math.pi * a, rel=1e-4)


def test_liouville_on_constant_divergence():
    f = lambda t, z: np.array([-0.5 * z[0], -0.25 * z[1]])
    ts = np.linspace(0, 2, 201)
    ys = np.zeros((201, 2)) + 1.0
    assert liouville_multiplier(f, ts, ys) == pytest.approx(-1.5, abs=1e-9)


def test_first_lyapunov_of_normal_form():
    # eigenvectors normalized to <q, q> = 1 double the cubic coefficient of z' = iz - z|z|^2
    l1, om = first_lyapunov(hopf_normal_form(0.0), [0.0, 0.0])
    assert om == pytest.approx(1.0, abs=1e-8)
    assert l1 == pytest.approx(-2.0, rel=1e-4)
    # reflection plus time reversal keeps the rotation sense and makes it subcritical
    l1, _ = first_lyapunov(lambda t, z: -hopf_normal_form(0.0)(t, z[::-1])[::-1], [0.0, 0.0])
    assert l1 == pytest.approx(2.0, rel=1e-4)


def test_continuation_passes_fold():
    res = lambda u, lam: np.array([u[0] ** 2 + lam ** 2 - 1.0])
    pts = param_continue(res, [-1.0], 0.0, (-0.5, 2.0), h0=0.05, h_max=0.1)
    us = np.array([p.u[0] for p in pts])
    assert us.min() < -0.9 and us.max() > 0.5      # went around the fold at lam = 1
    assert max(p.residual for p in pts) < 1e-8


def test_continuation_stall_reports_partial_branch():
    res = lambda u, lam: np.array([u[0] - (math.nan if lam > 0.2 else lam)])
    with pytest.raises(StallAtStep) as info:
        param_continue(res, [0.0], 0.0, (-1.0, 1.0), h0=0.05, h_min=1e-4)
    assert info.value.info["branch"]
