"""Control valves: a static pressure gain and an orifice with a first-order actuator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateOperatingPoint, InvalidParams, InvalidPressureRatio
from ..model import (AREA, COMMAND, FLOW, INPUT, OUTPUT, PRESSURE, STATE,
                     GasProperties, LabeledLinearModel, make_labels, p_port, q_port)

#: smallest admissible value of the bracket under the orifice square root
BRACKET_FLOOR = 1e-12


def static_two_port(k: float, name: str) -> LabeledLinearModel:
    """``p_r = k p_l``, ``q_l = q_r`` without states."""
    labels = [("p_r", PRESSURE), ("q_l", FLOW)]
    return LabeledLinearModel(
        np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), [[k, 0.0], [0.0, 1.0]],
        (), make_labels(name, [("p_l", PRESSURE), ("q_r", FLOW)], INPUT),
        make_labels(name, labels, OUTPUT),
        ports=(p_port(name, "l", "p_l", "q_l"), q_port(name, "r", "q_r", "p_r")),
    )


def static_valve(k_v: float, name: str = "valve") -> LabeledLinearModel:
    """Pressure drop by the factor ``k_v`` in (0, 1); flow passes unchanged."""
    if not 0 < k_v < 1:
        raise InvalidParams(f"valve gain must lie in (0, 1), got {k_v}")
    return static_two_port(k_v, name)


def static_gain(k: float, name: str, input=("p_l", PRESSURE), output=("p_r", PRESSURE)) -> LabeledLinearModel:
    """Single-input single-output gain block without ports."""
    return LabeledLinearModel(
        np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[k]], (),
        make_labels(name, [input], INPUT), make_labels(name, [output], OUTPUT),
    )


@dataclass(frozen=True)
class OrificeParams:
    C_d: float
    D0: float
    D1: float
    gas: GasProperties
    A_o_max: float
    tau: float

    def __post_init__(self):
        if not 0 < self.D0 < self.D1:
            raise InvalidParams("orifice diameter must satisfy 0 < D0 < D1")
        if not 0 < self.C_d <= 1:
            raise InvalidParams("discharge coefficient must lie in (0, 1]")
        if not self.tau > 0:
            raise InvalidParams("actuator time constant must be positive")
        if not self.A_o_max > 0:
            raise InvalidParams("maximum orifice area must be positive")

    @property
    def K(self) -> float:
        return self.A_o_max

    @property
    def C(self) -> float:
        """Discharge coefficient corrected for the head loss."""
        return self.C_d / np.sqrt(1 - (self.D0 / self.D1) ** 4)


def _check_pressures(p_left, p_right, A_o):
    if A_o < 0:
        raise InvalidParams("orifice area must be nonnegative")
    if not (p_left > 0 and p_right > 0):
        raise InvalidPressureRatio("pressures must be positive")
    if p_right > p_left:
        raise InvalidPressureRatio(f"reverse flow is not modeled (p_right={p_right} > p_left={p_left})")


def _bracket(r, mu):
    return r ** (2 / mu) - r ** ((mu + 1) / mu)


def orifice_flow(A_o: float, p_left: float, p_right: float, o: OrificeParams) -> float:
    """Mass flow through an orifice under isentropic expansion, forward direction only."""
    _check_pressures(p_left, p_right, A_o)
    gas = o.gas
    mu = gas.mu
    r = p_right / p_left
    bracket = max(_bracket(r, mu), 0.0)
    return o.C * p_left * A_o * np.sqrt(2 / gas.RTz * mu / (mu - 1) * bracket)


def orifice_linearization(A_o: float, p_left: float, p_right: float, o: OrificeParams):
    """Return ``(gain_A, zeta, xi)``.

    ``gain_A`` is the flow per unit area, ``zeta`` and ``xi`` the partial
    derivatives of the flow with respect to ``p_left`` and ``p_right``.
    """
    _check_pressures(p_left, p_right, A_o)
    mu = o.gas.mu
    r = p_right / p_left
    bracket = _bracket(r, mu)
    if not bracket > BRACKET_FLOOR:
        raise DegenerateOperatingPoint(
            f"pressure ratio {r} is too close to 1 for a finite linearization")
    k = np.sqrt(2 / o.gas.RTz * mu / (mu - 1))
    root = np.sqrt(bracket)
    dbracket = (2 / mu) * r ** (2 / mu - 1) - ((mu + 1) / mu) * r ** (1 / mu)
    gain_A = o.C * p_left * k * root
    xi = o.C * A_o * k * dbracket / (2 * root)
    zeta = o.C * A_o * k * (root - r * dbracket / (2 * root))
    return gain_A, zeta, xi


def dynamic_valve(o: OrificeParams, nominal_A_o: float, nominal_p_left: float,
                  nominal_p_right: float, name: str = "valve") -> LabeledLinearModel:
    """Orifice valve with a first-order actuator.

    State ``A_o``, input ``(u_v, p_l, p_r)``, output ``q_v``.
    """
    gain_A, zeta, xi = orifice_linearization(nominal_A_o, nominal_p_left, nominal_p_right, o)
    A = [[-1 / o.tau]]
    B = [[o.K / o.tau, 0.0, 0.0]]
    C = [[gain_A]]
    D = [[0.0, zeta, xi]]
    q = gain_A * nominal_A_o
    nominal = {f"{name}.A_o": nominal_A_o, f"{name}.u_v": nominal_A_o / o.K,
               f"{name}.p_l": nominal_p_left, f"{name}.p_r": nominal_p_right,
               f"{name}.q_v": q}
    return LabeledLinearModel(
        A, B, C, D,
        make_labels(name, [("A_o", AREA)], STATE),
        make_labels(name, [("u_v", COMMAND), ("p_l", PRESSURE), ("p_r", PRESSURE)], INPUT),
        make_labels(name, [("q_v", FLOW)], OUTPUT),
        nominal,
        ports=(p_port(name, "l", "p_l", "q_v"), p_port(name, "r", "p_r", "q_v")),
    )


def dynamic_valve_system(o: OrificeParams, name: str = "valve"):
    """Nonlinear valve: saturated command, first-order actuator, orifice flow."""
    from .linearize import NonlinearSystem

    def rhs(x, u):
        cmd = min(max(u[0], 0.0), 1.0)
        return np.array([(o.K * cmd - x[0]) / o.tau])

    def output(x, u):
        return np.array([orifice_flow(max(x[0], 0.0), u[1], u[2], o)])

    return NonlinearSystem(
        rhs, output,
        make_labels(name, [("A_o", AREA)], STATE),
        make_labels(name, [("u_v", COMMAND), ("p_l", PRESSURE), ("p_r", PRESSURE)], INPUT),
        make_labels(name, [("q_v", FLOW)], OUTPUT),
    )
