import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_pipe
from gasnet.components import TankParams, isothermal_tank, single_pipe, static_valve
from gasnet.errors import InvalidParams, SingularAtDC, SingularResolvent
from gasnet.model import (FLOW, PRESSURE, GasProperties, LabeledLinearModel, SignalLabel,
                          condition_estimate, dc_gain, frequency_response, is_singular,
                          make_labels, permute_states, select, validate_dimensions)


def test_labels_and_keys():
    labs = make_labels("pipe", [("p_r", PRESSURE), ("q_l", FLOW)], "state")
    assert [lab.key for lab in labs] == ["pipe.p_r", "pipe.q_l"]
    assert labs[0] == SignalLabel("pipe", "p_r", PRESSURE, "state")


def test_validate_dimensions_accepts_constructors(gas):
    assert validate_dimensions(single_pipe(make_pipe(gas))) == []
    v = static_valve(0.8)
    assert v.n_states == 0 and v.D.shape == (2, 2)
    assert validate_dimensions(v) == []


def test_validate_dimensions_names_state_labels():
    m = LabeledLinearModel(np.eye(2), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((1, 1)),
                           make_labels("m", [("a", PRESSURE), ("b", FLOW), ("c", FLOW)], "state"),
                           make_labels("m", [("u", PRESSURE)], "input"),
                           make_labels("m", [("y", PRESSURE)], "output"))
    problems = validate_dimensions(m)
    assert any("state_labels" in p for p in problems)


def test_matrices_are_read_only(gas):
    m = single_pipe(make_pipe(gas))
    with pytest.raises(ValueError):
        m.A[0, 0] = 1.0


def test_dc_gain_worked_example(gas):
    # A = 0.1 m2 pipe from the worked scalar evaluation
    p = type(make_pipe(gas))(A=0.1, X=1000.0, D=0.5, lam=0.01, h=0.0, gas=gas,
                             nominal_p_left=5e6, nominal_q=10.0)
    T = dc_gain(single_pipe(p))
    np.testing.assert_allclose(T, [[1.00054, -540.0], [0.0, 1.0]], rtol=1e-12, atol=1e-12)


def test_dc_gain_of_integrator_is_singular(gas):
    with pytest.raises(SingularAtDC):
        dc_gain(isothermal_tank(TankParams(10.0, gas)))


def test_frequency_response_at_zero_equals_dc_gain(gas):
    m = single_pipe(make_pipe(gas, q=25.0, h=30.0))
    np.testing.assert_allclose(frequency_response(m, 0.0), dc_gain(m), rtol=1e-12)


def test_frequency_response_of_static_model_is_d():
    v = static_valve(0.8)
    for s in (0.0, 1j, 10 + 3j):
        np.testing.assert_array_equal(frequency_response(v, s), v.D)


def test_frequency_response_singular_resolvent(gas):
    with pytest.raises(SingularResolvent):
        frequency_response(isothermal_tank(TankParams(10.0, gas)), 0.0)


def test_singularity_helpers():
    assert is_singular(np.zeros((2, 2)))
    assert not is_singular(np.eye(3))
    # equilibration removes pure scaling; only genuine near-dependence counts
    assert condition_estimate(np.diag([1.0, 1e-12])) == pytest.approx(1.0, rel=0.1)
    assert condition_estimate([[1.0, 1.0], [1.0, 1.0 + 1e-8]]) > 1e8
    assert condition_estimate(np.zeros((0, 0))) == 1.0


def test_select_and_permute(gas):
    m = single_pipe(make_pipe(gas))
    s = select(m, inputs=["pipe.q_r"], outputs=["pipe.p_r"])
    assert s.D.shape == (1, 1)
    np.testing.assert_allclose(dc_gain(s), dc_gain(m)[:1, 1:])
    pm = permute_states(m, [1, 0])
    assert [lab.key for lab in pm.state_labels] == ["pipe.q_l", "pipe.p_r"]
    for w in (0.0, 0.1, 3.0):
        np.testing.assert_allclose(frequency_response(pm, 1j * w), frequency_response(m, 1j * w),
                                   rtol=1e-12)


def test_gas_properties_validation():
    gas = GasProperties(500.0, 300.0, 0.9, 1750.0, 1250.0)
    assert gas.mu == pytest.approx(1.4)
    assert gas.RTz == pytest.approx(135000.0)
    with pytest.raises(InvalidParams):
        GasProperties(500.0, 300.0, 0.9, 1750.0, 1250.0, mu=1.3)
    with pytest.raises(InvalidParams):
        GasProperties(500.0, -1.0, 0.9, 1750.0, 1250.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(50.0, 5e4), st.floats(-80.0, 80.0))
def test_pipe_dc_gain_conserves_mass(D, X, q):
    gas = GasProperties(500.0, 300.0, 0.9, 1750.0, 1250.0)
    m = single_pipe(make_pipe(gas, q=q, D=D, X=X))
    T = dc_gain(m)
    assert abs(T[1, 0]) < 1e-12 and abs(T[1, 1] - 1) < 1e-12
