import numpy as np
import pytest

from conftest import make_pipe, random_pipe
from gasnet.components import (PipeParams, branch, internal_flow_weights, joint, joint_pair,
                               pipe_coefficients, single_pipe, star_junction)
from gasnet.errors import DegenerateJunction, InvalidParams
from gasnet.model import dc_gain, frequency_response, permute_states
from gasnet.sim import TimeGrid, simulate_linear
from gasnet.verify import check_mass_conservation, max_relative_deviation


@pytest.fixture
def example_pipe(gas):
    return PipeParams(A=0.1, X=1000.0, D=0.5, lam=0.01, h=0.0, gas=gas,
                      nominal_p_left=5e6, nominal_q=10.0)


def test_pipe_coefficients_worked_example(example_pipe):
    c = pipe_coefficients(example_pipe)
    # independent scalar evaluation: RTz = 135000, A/X = 1e-4
    RTz, A, X, D, lam, p, q = 135000.0, 0.1, 1000.0, 0.5, 0.01, 5e6, 10.0
    assert c.alpha == pytest.approx(-RTz / (A * X), rel=1e-14)
    assert c.alpha == pytest.approx(-1350.0, rel=1e-14)
    assert c.beta_pr == pytest.approx(-1e-4, rel=1e-14)
    assert c.beta_pl == pytest.approx(A / X + lam * RTz * q * q / (2 * D * A * p * p), rel=1e-14)
    assert c.beta_pl == pytest.approx(1.00054e-4, rel=1e-12)
    assert c.gamma == pytest.approx(-0.054, rel=1e-12)


def test_pipe_box_pattern(example_pipe):
    m = single_pipe(example_pipe)
    np.testing.assert_allclose(m.A, [[0, 1350.0], [-1e-4, -0.054]], rtol=1e-12)
    np.testing.assert_allclose(m.B, [[0, -1350.0], [1.00054e-4, 0]], rtol=1e-12)
    np.testing.assert_array_equal(m.C, np.eye(2))
    np.testing.assert_array_equal(m.D, np.zeros((2, 2)))


def test_zero_flow_and_frictionless_limits(gas):
    p = make_pipe(gas, q=0.0, h=25.0)
    c = pipe_coefficients(p)
    assert c.gamma == 0.0
    assert c.beta_pl == pytest.approx(p.A / p.X - p.A * gas.g * p.h / (gas.RTz * p.X), rel=1e-14)
    c = pipe_coefficients(make_pipe(gas, q=15.0, lam=0.0))
    assert c.beta_pl == pytest.approx(-c.beta_pr, rel=1e-14)


def test_pipe_rejects_bad_geometry(gas):
    with pytest.raises(InvalidParams):
        make_pipe(gas, D=-1.0)
    with pytest.raises(InvalidParams):
        make_pipe(gas, lam=-0.01)


def test_pipe_zero_input_stays_zero(gas):
    m = single_pipe(make_pipe(gas))
    tr = simulate_linear(m, None, None, TimeGrid(0.0, 10.0, 0.1))
    assert all(np.all(v == 0) for v in tr.signals.values())


def test_pipe_step_settles_to_dc_gain(gas):
    m = single_pipe(make_pipe(gas, q=20.0, X=500.0))
    slowest = 1 / np.min(np.abs(np.linalg.eigvals(m.A).real))
    dt = 0.05
    n = int(np.ceil(10 * slowest / dt))
    tr = simulate_linear(m, lambda t: np.array([1e3, 0.0]), None, TimeGrid(0.0, n * dt, dt))
    target = dc_gain(m) @ np.array([1e3, 0.0])
    final = np.array([tr["pipe.p_r"][-1], tr["pipe.q_l"][-1]])
    np.testing.assert_allclose(final[0], target[0], rtol=1e-3)
    assert abs(final[1] - target[1]) < 1e-3 * abs(target[0]) * abs(m.B[1, 0])


def test_flow_weights_hand_examples():
    W = internal_flow_weights([1.0, 1.0])
    np.testing.assert_allclose(W[0], [0.5, 0.5, -0.5])
    W = internal_flow_weights([1.0, 1.0, 1.0])
    for k in range(3):
        row = np.full(4, -1 / 3)
        row[0] = 1 / 3
        row[k + 1] = 2 / 3
        np.testing.assert_allclose(W[k], row, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_flow_weights_sum_to_merged_flow(n, rng):
    W = internal_flow_weights(rng.uniform(-50, -1, size=n))
    expected = np.zeros(n + 1)
    expected[0] = 1.0
    np.testing.assert_allclose(W.sum(axis=0), expected, atol=1e-12)


def test_flow_weights_reject_degenerate():
    with pytest.raises(DegenerateJunction):
        internal_flow_weights([1.0, 0.0])
    with pytest.raises(DegenerateJunction):
        internal_flow_weights([1.0, -1.0])
    with pytest.raises(InvalidParams):
        internal_flow_weights([1.0])


def test_branch_symmetric_under_leg_swap(gas):
    trunk = make_pipe(gas, q=20.0)
    leg = make_pipe(gas, q=10.0, p_left=trunk.nominal_p_right)
    m = branch(trunk, [leg, leg])
    keys = [lab.key for lab in m.state_labels]
    order = [keys.index(k) for k in ("branch.p_r0", "branch.p_r2", "branch.p_r1",
                                       "branch.q_l0", "branch.q_l2", "branch.q_l1")]
    pm = permute_states(m, order)
    ii = [m.input_index(k) for k in ("branch.p_l0", "branch.q_r2", "branch.q_r1")]
    oo = [m.output_index(k) for k in ("branch.p_r2", "branch.p_r1", "branch.q_l0")]
    np.testing.assert_allclose(pm.A, m.A, atol=1e-15)
    np.testing.assert_allclose(pm.B[:, ii], m.B, atol=1e-15)
    np.testing.assert_allclose(pm.C[oo], m.C, atol=1e-15)


def test_branch_steady_state_flow_balance(gas, rng):
    trunk = random_pipe(rng, gas, q=30.0)
    legs = [random_pipe(rng, gas, q=q) for q in (10.0, 20.0)]
    m = branch(trunk, legs)
    u = np.array([0.0, 3.0, 4.0])
    x = -np.linalg.solve(m.A, m.B @ u)
    q_l0 = x[[lab.key for lab in m.state_labels].index("branch.q_l0")]
    assert q_l0 == pytest.approx(7.0, rel=1e-10)


@pytest.mark.parametrize("m_legs", [2, 3])
def test_branch_conserves_mass(gas, rng, m_legs):
    legs = [random_pipe(rng, gas, q=q) for q in rng.uniform(1, 10, m_legs)]
    assert check_mass_conservation(branch(random_pipe(rng, gas, q=30.0), legs)).passed


def test_joint_equals_pair_box(gas, rng):
    ins = [random_pipe(rng, gas, q=q) for q in (3.0, 6.0)]
    out = random_pipe(rng, gas, q=9.0)
    a = permute_states(joint(ins, out), [0, 2, 1, 3, 4])
    b = joint_pair(ins, out)
    assert [lab.key for lab in a.state_labels] == [lab.key for lab in b.state_labels]
    for M1, M2 in ((a.A, b.A), (a.B, b.B), (a.C, b.C), (a.D, b.D)):
        np.testing.assert_allclose(M1, M2, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_joint_conserves_mass(gas, rng, n):
    ins = [random_pipe(rng, gas, q=q) for q in rng.uniform(1, 10, n)]
    m = joint(ins, random_pipe(rng, gas, q=40.0))
    assert m.n_states == n + 3
    assert check_mass_conservation(m).passed


def test_joint_fails_entrywise_reading(gas, rng):
    ins = [random_pipe(rng, gas, q=q) for q in (5.0, 5.0)]
    m = joint(ins, random_pipe(rng, gas, q=10.0))
    # a rise in one inlet pressure pushes flow back out through the other inlet
    assert not check_mass_conservation(m, entrywise=True).passed


@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_star_conserves_mass(gas, rng, n, m):
    ins = [random_pipe(rng, gas, q=q) for q in rng.uniform(1, 10, n)]
    outs = [random_pipe(rng, gas, q=q) for q in rng.uniform(1, 10, m)]
    assert check_mass_conservation(star_junction(ins, outs)).passed


def test_star_three_pipe_reductions_agree_with_branch(gas, rng):
    trunk = random_pipe(rng, gas, q=20.0)
    legs = [random_pipe(rng, gas, q=q) for q in (5.0, 7.0, 8.0)]
    a, b = star_junction([trunk], legs), branch(trunk, legs)
    for w in np.logspace(-3, 1, 8):
        assert max_relative_deviation(frequency_response(a, 1j * w),
                                      frequency_response(b, 1j * w)) < 1e-9


def test_junction_rejects_mixed_gases(gas):
    other = type(gas)(R_s=400.0, T_0=300.0, z_0=0.9, c_p=1750.0, c_v=1250.0)
    with pytest.raises(InvalidParams):
        joint([make_pipe(gas), make_pipe(other)], make_pipe(gas))
