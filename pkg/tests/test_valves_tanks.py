import numpy as np
import pytest

from gasnet.components import (OrificeParams, TankParams, dynamic_valve, entrance_tank,
                               isothermal_tank, nonisothermal_tank, nonisothermal_tank_rhs,
                               orifice_flow, orifice_linearization, static_compressor,
                               static_gain, static_valve)
from gasnet.errors import DegenerateOperatingPoint, InvalidParams, InvalidPressureRatio
from gasnet.sim import TimeGrid, simulate_linear
from gasnet.verify import check_mass_conservation


@pytest.fixture
def orifice(gas):
    return OrificeParams(0.8, 0.05, 0.1, gas, 2e-3, 0.5)


def test_static_valve_and_compressor_gains():
    u = np.array([1e5, 2.0])
    np.testing.assert_allclose(static_valve(0.8).D @ u, [0.8e5, 2.0])
    np.testing.assert_allclose(static_compressor(4.0).D @ u, [4e5, 2.0])
    for m in (static_valve(0.3), static_compressor(2.5)):
        assert check_mass_conservation(m).passed


def test_static_gain_bounds():
    static_valve(1 - 1e-9)
    for k in (1.0, 0.0, -0.2):
        with pytest.raises(InvalidParams):
            static_valve(k)
    for k in (1.0, 0.5):
        with pytest.raises(InvalidParams):
            static_compressor(k)
    assert static_gain(2.0, "g").D[0, 0] == 2.0


def test_orifice_flow_independent_evaluation(orifice):
    A_o = np.pi * 0.025**2
    p_l, p_r, mu, RTz = 5e6, 4e6, 1.4, 135000.0
    C = 0.8 / np.sqrt(1 - 0.5**4)
    r = p_r / p_l
    expected = C * p_l * A_o * np.sqrt(2 / RTz * mu / (mu - 1) * (r ** (2 / mu) - r ** ((mu + 1) / mu)))
    assert orifice_flow(A_o, p_l, p_r, orifice) == pytest.approx(expected, rel=1e-10)
    assert orifice_flow(A_o, p_l, p_l, orifice) == 0.0


def test_orifice_rejects_reverse_flow(orifice):
    with pytest.raises(InvalidPressureRatio):
        orifice_flow(1e-3, 4e6, 5e6, orifice)
    with pytest.raises(InvalidPressureRatio):
        orifice_flow(1e-3, -1.0, -2.0, orifice)


def test_orifice_linearization_degenerate_near_unit_ratio(orifice):
    orifice_linearization(1e-3, 5e6, 4.9e6, orifice)
    with pytest.raises(DegenerateOperatingPoint):
        orifice_linearization(1e-3, 5e6, 5e6 * (1 - 1e-15), orifice)


def test_orifice_signs(orifice):
    _, zeta, xi = orifice_linearization(1e-3, 5e6, 4e6, orifice)
    assert zeta > 0 and xi < 0


def test_orifice_params_validation(gas):
    with pytest.raises(InvalidParams):
        OrificeParams(0.8, 0.1, 0.05, gas, 2e-3, 0.5)
    with pytest.raises(InvalidParams):
        OrificeParams(1.2, 0.05, 0.1, gas, 2e-3, 0.5)
    with pytest.raises(InvalidParams):
        OrificeParams(0.8, 0.05, 0.1, gas, 2e-3, 0.0)


def test_dynamic_valve_step_converges_to_K(orifice):
    m = dynamic_valve(orifice, 1e-3, 5e6, 4e6)
    tr = simulate_linear(m, lambda t: np.array([1.0, 0, 0]), None, TimeGrid(0.0, 10.0, 0.01))
    assert tr["valve.A_o"][-1] == pytest.approx(orifice.K, rel=1e-8)
    i = np.searchsorted(tr.times, orifice.tau)
    assert tr["valve.A_o"][i] == pytest.approx(orifice.K * (1 - np.exp(-1)), rel=1e-9)


def test_dynamic_valve_output_without_pressure_deviation(orifice):
    m = dynamic_valve(orifice, 1e-3, 5e6, 4e6)
    gain_A, _, _ = orifice_linearization(1e-3, 5e6, 4e6, orifice)
    x = np.array([2e-4])
    np.testing.assert_allclose(m.output(x, np.zeros(3)), gain_A * x)


def test_isothermal_tank_input_matrix(gas):
    m = isothermal_tank(TankParams(10.0, gas))
    np.testing.assert_allclose(m.B, [[13500.0, -13500.0]])
    assert np.all(m.A == 0)
    assert m.derivative([0.0], [3.0, 3.0])[0] == 0.0
    r = check_mass_conservation(m)
    assert r.passed and r.mode == "structural"


def test_nonisothermal_tank_thermal_equilibrium(gas):
    t = TankParams(10.0, gas, nominal_p=5e6, nominal_T=300.0)
    np.testing.assert_allclose(nonisothermal_tank_rhs([5e6, 300.0], [12.0, 300.0, 12.0], t),
                               [0.0, 0.0], atol=1e-9)
    np.testing.assert_array_equal(nonisothermal_tank_rhs([5e6, 300.0], [0.0, 350.0, 0.0], t),
                                  [0.0, 0.0])


def test_nonisothermal_tank_hot_inflow_heats(gas):
    t = TankParams(10.0, gas, nominal_p=5e6, nominal_T=300.0)
    pdot, Tdot = nonisothermal_tank_rhs([5e6, 300.0], [12.0, 350.0, 12.0], t)
    assert pdot > 0 and Tdot > 0


def test_nonisothermal_tank_linear_model(gas):
    m = nonisothermal_tank(TankParams(10.0, gas, n_inlets=2, n_outlets=1), 20.0)
    assert [lab.key for lab in m.input_labels] == ["tank.q_l1", "tank.T_l1", "tank.q_l2",
                                                   "tank.T_l2", "tank.q_r1"]
    assert m.nominal["tank.q_l1"] == 10.0


def test_entrance_tank_coefficients(gas, orifice):
    t = TankParams(4.0, gas, n_inlets=1, n_outlets=2, nominal_p=4.9e6)
    m = entrance_tank(t, orifice, [5e6], None, "T1")
    _, zeta, xi = orifice_linearization(orifice.A_o_max, 5e6, 4.9e6, orifice)
    a = gas.RTz / 4.0
    np.testing.assert_allclose(m.A, [[a * xi]], rtol=1e-14)
    np.testing.assert_allclose(m.B, [[a * zeta, -a, -a]], rtol=1e-14)
