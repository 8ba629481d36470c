import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beb.errors import ParameterError
from beb.pws import PwsState, Side
from beb.stickslip import (BF3_PARAMS, BN3_PARAMS, StickSlipParams, amplitude_ratios,
                           equilibrium, friction, friction_slope, hopf_points,
                           pws_plus_equilibrium, regularized_field, stickslip_experiment,
                           stickslip_field)


def test_static_friction_at_zero_velocity():
    for p in (BF3_PARAMS, BN3_PARAMS):
        assert friction(p, 0.0) == p.mu_s == 1.0


def test_slope_at_zero_and_regime():
    assert BN3_PARAMS.slope0 == pytest.approx(-2.90)
    assert BN3_PARAMS.regime == "BN3"
    assert BF3_PARAMS.slope0 == pytest.approx(-1.15)
    assert BF3_PARAMS.regime == "BF3"
    assert friction_slope(BF3_PARAMS, 0.0) == pytest.approx(BF3_PARAMS.slope0)


@pytest.mark.parametrize("kw", [dict(mu_s=0.4), dict(rho=-1.0), dict(c=3.0), dict(eps=0.0)])
def test_invalid_parameters(kw):
    with pytest.raises(ParameterError):
        StickSlipParams(**kw)


def test_beb_point_at_zero_belt_speed():
    assert pws_plus_equilibrium(BN3_PARAMS, 0.0) == (-1.0, 0.0)
    assert pws_plus_equilibrium(BF3_PARAMS, 0.0) == (-1.0, 0.0)


@given(x=st.floats(-1.0, 0.9), alpha=st.floats(0.0, 0.3))
def test_filippov_field_tangent_to_switching_line(x, alpha):
    p = BN3_PARAMS
    zp = stickslip_field(p, PwsState(x, 0.0, Side.PLUS), alpha)
    zm = stickslip_field(p, PwsState(x, 0.0, Side.MINUS), alpha)
    if zp[1] * zm[1] >= 0 or not (zp[1] < 0 < zm[1]):
        return          # not a sliding point
    v = stickslip_field(p, PwsState(x, 0.0, Side.SLIDING), alpha)
    assert abs(v[1]) < 1e-12


@given(x=st.floats(-2, 2), y=st.floats(-1, 1), alpha=st.floats(0, 0.3))
def test_regularized_field_fast_path_matches_generic(x, y, alpha):
    p = BF3_PARAMS
    a = regularized_field(p, alpha)(0.0, np.array([x, y]))
    b = stickslip_field(p, (x, y), alpha)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@given(alpha=st.floats(0.0, 0.4))
def test_equilibrium_is_zero_of_regularized_field(alpha):
    for p in (BF3_PARAMS, BN3_PARAMS):
        xe, ye = equilibrium(p, alpha)
        assert np.allclose(regularized_field(p, alpha)(0.0, np.array([xe, ye])), 0.0, atol=1e-12)


def test_regularized_field_far_from_layer_is_pws():
    p = BF3_PARAMS
    z = regularized_field(p, 0.1)(0.0, np.array([0.2, 0.5]))
    assert z == pytest.approx(stickslip_field(p, PwsState(0.2, 0.5, Side.PLUS), 0.1), abs=1e-4)


@pytest.mark.parametrize("p,ref", [(BF3_PARAMS, (0.0097142, 0.213887)),
                                   (BN3_PARAMS, (0.0071067, 0.197885))])
def test_two_hopf_points(p, ref):
    h = hopf_points(p, (0.0, 0.3))
    assert len(h) == 2
    assert h == pytest.approx(list(ref), abs=2e-6)


def test_bf3_cycle_branch_starts_small():
    p = BF3_PARAMS
    res = stickslip_experiment(p, np.arange(0.0, 0.0141, 1e-3))
    amps = [pt.amplitude for pt in res["points"] if pt.cycle is not None]
    assert amps and amps[0] < 0.01
    assert all(pt.cycle.floquet < 1 for pt in res["points"] if pt.cycle is not None)
    r = amplitude_ratios(res["points"])
    assert np.all(r < 2)
