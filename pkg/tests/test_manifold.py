import numpy as np
import pytest

from conftest import make_pipe
from gasnet.components import (OrificeParams, TankParams, manifold_parts, orifice_linearization,
                               pipe_coefficients, valve_manifold)
from gasnet.errors import InvalidParams
from gasnet.model import permute_states
from gasnet.verify import check_mass_conservation

P_INLET, P_T1, P_T2 = 5e6, 4.9e6, 4.7e6


@pytest.fixture
def parts(gas):
    orifice = OrificeParams(0.8, 0.05, 0.1, gas, 2e-3, 0.5)
    leg = make_pipe(gas, q=10.0, D=0.3, X=800.0)
    return (TankParams(3.0, gas, nominal_p=P_T1), TankParams(4.0, gas, nominal_p=P_T2),
            [leg, leg], [orifice, orifice])


def _manifold_box(t1, t2, leg, orifice):
    """Six-state manifold realization written out entry by entry (identical legs)."""
    RTz = t1.gas.RTz
    aT1, aT2 = RTz / t1.V, RTz / t2.V
    leg = type(leg)(leg.A, leg.X, leg.D, leg.lam, leg.h, leg.gas, t1.nominal_p, leg.nominal_q)
    c = pipe_coefficients(leg)
    _, zeta1, xi1 = orifice_linearization(orifice.A_o_max, P_INLET, t1.nominal_p, orifice)
    _, zeta2, xi2 = orifice_linearization(orifice.A_o_max, leg.nominal_p_right, t2.nominal_p, orifice)
    a, k, b, g = c.alpha, c.beta_pl, c.beta_pr, c.gamma
    A = np.array([
        [aT1 * xi1, 0, -aT1, 0, -aT1, 0],
        [0, a * zeta2, -a, 0, 0, a * xi2],
        [k, b, g, 0, 0, 0],
        [0, 0, 0, a * zeta2, -a, a * xi2],
        [k, 0, 0, b, g, 0],
        [0, aT2 * zeta2, 0, aT2 * zeta2, 0, 2 * aT2 * xi2],
    ])
    B = np.array([[aT1 * zeta1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, -aT2]]).T
    C = np.array([[0, 0, 0, 0, 0, 1.0], [xi1, 0, 0, 0, 0, 0]])
    D = np.array([[0, 0], [zeta1, 0]])
    return A, B, C, D


def test_manifold_matches_box(parts):
    t1, t2, legs, orifices = parts
    m = valve_manifold(t1, t2, legs, orifices, P_INLET)
    assert [lab.name for lab in m.state_labels] == ["p_T1", "p_r1", "q_l1", "p_r2", "q_l2", "p_T2"]
    assert [lab.key for lab in m.input_labels] == ["manifold.p_l", "manifold.q_r"]
    assert [lab.key for lab in m.output_labels] == ["manifold.p_r", "manifold.q_l"]
    A, B, C, D = _manifold_box(t1, t2, legs[0], orifices[0])
    for got, want in ((m.A, A), (m.B, B), (m.C, C), (m.D, D)):
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12 * np.abs(want).max())


def test_manifold_conserves_mass(parts):
    t1, t2, legs, orifices = parts
    assert check_mass_conservation(valve_manifold(t1, t2, legs, orifices, P_INLET)).passed


def test_manifold_symmetric_under_leg_swap(parts):
    t1, t2, legs, orifices = parts
    m = valve_manifold(t1, t2, legs, orifices, P_INLET)
    s = permute_states(m, [0, 3, 4, 1, 2, 5])
    for M1, M2 in ((s.A, m.A), (s.B, m.B), (s.C, m.C)):
        np.testing.assert_allclose(M1, M2, rtol=1e-14, atol=0)


def test_manifold_ports(parts):
    t1, t2, legs, orifices = parts
    m = valve_manifold(t1, t2, legs, orifices, P_INLET)
    assert {p.key: p.kind for p in m.ports} == {"manifold.l": "p", "manifold.r": "q"}


def test_manifold_parts_set_leg_inlet_to_tank_pressure(parts):
    t1, t2, legs, orifices = parts
    _, leg1, _, _ = manifold_parts(t1, t2, legs, orifices, P_INLET)
    assert leg1.nominal["leg1.p_l"] == P_T1


def test_manifold_rejects_reverse_pressures(parts):
    t1, t2, legs, orifices = parts
    with pytest.raises(InvalidParams):
        valve_manifold(t1, t2, legs, orifices, p_inlet=P_T1 - 1.0)
    with pytest.raises(InvalidParams):
        valve_manifold(t1, TankParams(4.0, t1.gas, nominal_p=P_T1), legs, orifices, P_INLET)
