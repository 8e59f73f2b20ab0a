import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import make_pipe
from gasnet.components import (CompressorParams, HeatExchangerParams, QuadraticMap,
                               compressor_equilibrium, compressor_rhs, compressor_system,
                               dynamic_compressor, heat_exchanger, heat_exchanger_equilibrium,
                               heat_exchanger_rhs, single_pipe)
from gasnet.errors import InvalidParams, MapDomain, NonPhysicalState
from gasnet.sim import TimeGrid, simulate_nonlinear
from gasnet.verify import steady_state_residual


@pytest.fixture
def comp(gas):
    return CompressorParams(2.0, 0.05, 3.0, 1.4, gas, QuadraticMap())


def test_quadratic_map_domain(comp):
    mp = comp.map
    assert mp.contains(30.0, 2000.0)
    assert not mp.contains(-1.0, 2000.0)
    with pytest.raises(MapDomain):
        mp.check(200.0, 2000.0)
    q, w, h = 30.0, 2000.0, 1e-4
    assert mp.dq(q, w) == pytest.approx((mp(q + h, w) - mp(q - h, w)) / (2 * h), rel=1e-7)
    assert mp.domega(q, w) == pytest.approx((mp(q, w + h) - mp(q, w - h)) / (2 * h), rel=1e-7)


def test_compressor_equilibrium_is_steady(comp):
    x, u = compressor_equilibrium(comp, 30.0, 2000.0, 1e5, 300.0)
    xdot, _ = compressor_rhs(x, u, comp)
    np.testing.assert_allclose(xdot, [0.0, 0.0], atol=1e-9)
    assert steady_state_residual(compressor_system(comp), x, u) < 1e-9


def test_compressor_unit_pressure_ratio_keeps_temperature(comp):
    q, w = 30.0, 2000.0
    p1 = comp.map(q, w)
    _, y = compressor_rhs([p1, q], [p1, q, 290.0, w], comp)
    assert y[2] == pytest.approx(290.0, rel=1e-14)


def test_compressor_params_validation(gas):
    with pytest.raises(InvalidParams):
        CompressorParams(2.0, 0.05, 3.0, 1.0, gas, QuadraticMap())
    with pytest.raises(InvalidParams):
        CompressorParams(-2.0, 0.05, 3.0, 1.4, gas, QuadraticMap())


def test_compressor_rejects_nonphysical_state(comp):
    with pytest.raises(NonPhysicalState):
        compressor_rhs([-1.0, 30.0], [1e5, 30.0, 300.0, 2000.0], comp)


def test_compressor_speed_step_settles_on_map_balance(comp):
    x0, u0 = compressor_equilibrium(comp, 30.0, 2000.0, 1e5, 300.0)
    u1 = u0.copy()
    u1[3] = 2100.0
    tr = simulate_nonlinear(compressor_system(comp), lambda t: u1, x0, TimeGrid(0.0, 4.0, 0.001))
    # the throughput is fixed by the outlet flow; the plenum follows the map
    expected_p = comp.map(30.0, 2100.0)
    assert tr["compressor.p_r"][-1] == pytest.approx(expected_p, rel=1e-6)
    assert tr["compressor.q_l"][-1] == pytest.approx(30.0, rel=1e-6)


def test_dynamic_compressor_ports(comp):
    m = dynamic_compressor(comp, 30.0, 2000.0, 1e5, 300.0)
    assert {p.key: p.kind for p in m.ports} == {"compressor.l": "p", "compressor.r": "q"}
    assert np.all(np.linalg.eigvals(m.A).real < 0)


@pytest.fixture
def hx(gas):
    return HeatExchangerParams(make_pipe(gas, q=20.0, D=0.3, X=500.0), k_rad=50.0, D_o=0.32,
                               T_amb=280.0, nominal_T_left=350.0)


def test_heat_exchanger_full_equilibrium(gas):
    h = HeatExchangerParams(make_pipe(gas, q=0.0), k_rad=20.0, D_o=0.45, T_amb=300.0,
                            nominal_T_left=300.0)
    np.testing.assert_allclose(heat_exchanger_rhs([5e6, 0.0, 300.0], [5e6, 0.0, 300.0], h),
                               [0.0, 0.0, 0.0], atol=1e-12)


def test_heat_exchanger_equilibrium_residual(hx):
    x, u = heat_exchanger_equilibrium(hx, 5e6, 20.0)
    assert np.all(np.abs(heat_exchanger_rhs(x, u, hx)) < 1e-8 * np.abs(x))
    assert 280.0 < x[2] < 350.0


def test_heat_exchanger_temperature_by_independent_root(hx):
    x, u = heat_exchanger_equilibrium(hx, 5e6, 20.0)
    T_r = brentq(lambda T: heat_exchanger_rhs([x[0], x[1], T], u, hx)[2], 281.0, 349.0, xtol=1e-12)
    assert x[2] == pytest.approx(T_r, rel=1e-10)


def test_isothermal_heat_exchanger_matches_pipe(gas):
    pipe = make_pipe(gas, q=15.0, D=0.4, X=800.0, h=12.0)
    T0 = gas.T_0
    h = HeatExchangerParams(pipe, k_rad=0.0, D_o=0.45, T_amb=T0, nominal_T_left=T0)
    x, u = heat_exchanger_equilibrium(h, pipe.nominal_p_left, pipe.nominal_q)
    assert x[0] == pytest.approx(pipe.nominal_p_right, rel=1e-12)
    # without heat transfer only expansion and lift work cool the gas, slightly
    assert x[2] < T0 and x[2] == pytest.approx(T0, rel=1e-3)
    lin_hx = heat_exchanger(h, pipe.nominal_p_left, pipe.nominal_q)
    lin_pipe = single_pipe(pipe)
    # the flow equation of the exchanger at T = T0 is the pipe's flow equation
    np.testing.assert_allclose(lin_hx.A[1, :2], lin_pipe.A[1], rtol=1e-9)
    np.testing.assert_allclose(lin_hx.B[1, :2], lin_pipe.B[1], rtol=1e-9)
    assert steady_state_residual(lin_pipe) < 1e-8 * pipe.nominal_p_left


def test_heat_exchanger_validation(gas):
    with pytest.raises(InvalidParams):
        HeatExchangerParams(make_pipe(gas, D=0.5), 10.0, 0.4, 280.0, 300.0)
    with pytest.raises(InvalidParams):
        HeatExchangerParams(make_pipe(gas), -1.0, 0.5, 280.0, 300.0)
