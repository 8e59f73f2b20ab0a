"""Tank (constant-volume) models: isothermal, non-isothermal, and orifice-fed."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidParams, NonPhysicalState
from ..model import (FLOW, INPUT, OUTPUT, PRESSURE, STATE, TEMPERATURE, GasProperties,
                     LabeledLinearModel, make_labels, p_port, q_port)
from .linearize import NonlinearSystem, linearize
from .valves import OrificeParams, orifice_linearization


@dataclass(frozen=True)
class TankParams:
    V: float
    gas: GasProperties
    n_inlets: int = 1
    n_outlets: int = 1
    nominal_p: float = 1e6
    nominal_T: float = 300.0

    def __post_init__(self):
        if not self.V > 0:
            raise InvalidParams("tank volume must be positive")
        if self.n_inlets < 1 or self.n_outlets < 1:
            raise InvalidParams("a tank needs at least one inlet and one outlet")
        if not (self.nominal_p > 0 and self.nominal_T > 0):
            raise InvalidParams("nominal tank pressure and temperature must be positive")


def _flow_ports(name, n_in, n_out, pressure="p"):
    return tuple([q_port(name, f"l{j}", f"q_l{j}", pressure) for j in range(1, n_in + 1)]
                 + [q_port(name, f"r{k}", f"q_r{k}", pressure) for k in range(1, n_out + 1)])


def isothermal_tank(t: TankParams, name: str = "tank") -> LabeledLinearModel:
    """Pure integrator: ``dp/dt = R_s z_0 T_0 / V (sum q_in - sum q_out)``."""
    coeff = t.gas.RTz / t.V
    B = np.concatenate([np.full(t.n_inlets, coeff), np.full(t.n_outlets, -coeff)])[None, :]
    inputs = ([(f"q_l{j}", FLOW) for j in range(1, t.n_inlets + 1)]
              + [(f"q_r{k}", FLOW) for k in range(1, t.n_outlets + 1)])
    return LabeledLinearModel(
        [[0.0]], B, [[1.0]], np.zeros((1, B.shape[1])),
        make_labels(name, [("p", PRESSURE)], STATE), make_labels(name, inputs, INPUT),
        make_labels(name, [("p", PRESSURE)], OUTPUT),
        nominal={f"{name}.p": t.nominal_p},
        ports=_flow_ports(name, t.n_inlets, t.n_outlets),
    )


def _split_inputs(u, n_in, n_out):
    u = np.asarray(u, float)
    if u.size != 2 * n_in + n_out:
        raise InvalidParams(f"expected {2 * n_in + n_out} tank inputs, got {u.size}")
    q_in = u[0:2 * n_in:2]
    T_in = u[1:2 * n_in:2]
    q_out = u[2 * n_in:]
    return q_in, T_in, q_out


def nonisothermal_tank_rhs(x, u, t: TankParams) -> np.ndarray:
    """``(dp/dt, dT/dt)`` of a perfectly mixed adiabatic tank.

    ``u`` is ``(q_l1, T_l1, ..., q_ln, T_ln, q_r1, ..., q_rm)``.
    """
    p, T = float(x[0]), float(x[1])
    if p <= 0 or T <= 0:
        raise NonPhysicalState(f"tank state must be positive (p={p}, T={T})")
    gas = t.gas
    q_in, T_in, q_out = _split_inputs(u, t.n_inlets, t.n_outlets)
    Rz = gas.R_s * gas.z_0
    pdot = Rz * gas.mu / t.V * (np.dot(q_in, T_in) - q_out.sum() * T)
    Tdot = (gas.R_s * T * gas.z_0 / (p * t.V * gas.c_v)
            * (np.dot(q_in, gas.c_p * T_in - gas.c_v * T) - gas.R_s * T * q_out.sum()))
    return np.array([pdot, Tdot])


def nonisothermal_tank_jacobian(x, u, t: TankParams):
    p, T = float(x[0]), float(x[1])
    gas = t.gas
    n_in, n_out = t.n_inlets, t.n_outlets
    q_in, T_in, q_out = _split_inputs(u, n_in, n_out)
    Rz = gas.R_s * gas.z_0
    k1 = Rz * gas.mu / t.V
    Qout = q_out.sum()
    g = gas.R_s * T * gas.z_0 / (p * t.V * gas.c_v)
    br = np.dot(q_in, gas.c_p * T_in - gas.c_v * T) - gas.R_s * T * Qout

    A = np.array([
        [0.0, -k1 * Qout],
        [-g * br / p, g / T * br + g * (-gas.c_v * q_in.sum() - gas.R_s * Qout)],
    ])
    B = np.zeros((2, u.size if hasattr(u, "size") else len(u)))
    for j in range(n_in):
        B[0, 2 * j] = k1 * T_in[j]
        B[0, 2 * j + 1] = k1 * q_in[j]
        B[1, 2 * j] = g * (gas.c_p * T_in[j] - gas.c_v * T)
        B[1, 2 * j + 1] = g * q_in[j] * gas.c_p
    B[0, 2 * n_in:] = -k1 * T
    B[1, 2 * n_in:] = -g * gas.R_s * T
    return A, B


def nonisothermal_tank_system(t: TankParams, name: str = "tank") -> NonlinearSystem:
    n_in, n_out = t.n_inlets, t.n_outlets
    inputs = []
    for j in range(1, n_in + 1):
        inputs += [(f"q_l{j}", FLOW), (f"T_l{j}", TEMPERATURE)]
    inputs += [(f"q_r{k}", FLOW) for k in range(1, n_out + 1)]
    xs = [("p", PRESSURE), ("T", TEMPERATURE)]
    nu = len(inputs)
    return NonlinearSystem(
        lambda x, u: nonisothermal_tank_rhs(x, u, t),
        lambda x, u: np.asarray(x, float).copy(),
        make_labels(name, xs, STATE), make_labels(name, inputs, INPUT),
        make_labels(name, xs, OUTPUT),
        jacobian=lambda x, u: nonisothermal_tank_jacobian(x, np.asarray(u, float), t),
        output_jacobian=lambda x, u: (np.eye(2), np.zeros((2, nu))),
        ports=_flow_ports(name, n_in, n_out),
    )


def tank_equilibrium(t: TankParams, q: float):
    """Nominal state and input with total throughput ``q`` split evenly over the ports."""
    x = np.array([t.nominal_p, t.nominal_T])
    u = []
    for _ in range(t.n_inlets):
        u += [q / t.n_inlets, t.nominal_T]
    u += [q / t.n_outlets] * t.n_outlets
    return x, np.array(u)


def nonisothermal_tank(t: TankParams, q: float, name: str = "tank") -> LabeledLinearModel:
    """Linearized non-isothermal tank about the balanced throughput ``q``."""
    x, u = tank_equilibrium(t, q)
    return linearize(nonisothermal_tank_system(t, name), x, u)


def entrance_tank_from_coefficients(alpha: float, xis: Sequence[float], zetas: Sequence[float],
                                    n_outlets: int, name: str, nominal=None) -> LabeledLinearModel:
    """Isothermal tank whose inlets are linearized orifices.

    State ``p``, input ``(p_l1..p_ln, q_r1..q_rm)``, output ``(p, q_l1..q_ln)``
    with ``q_lj = xi_j p + zeta_j p_lj``.
    """
    n = len(xis)
    A = [[alpha * float(np.sum(xis))]]
    B = np.concatenate([alpha * np.asarray(zetas, float), np.full(n_outlets, -alpha)])[None, :]
    C = np.concatenate([[1.0], np.asarray(xis, float)])[:, None]
    D = np.zeros((n + 1, n + n_outlets))
    for j in range(n):
        D[1 + j, j] = zetas[j]
    inputs = ([(f"p_l{j}", PRESSURE) for j in range(1, n + 1)]
              + [(f"q_r{k}", FLOW) for k in range(1, n_outlets + 1)])
    outputs = [("p", PRESSURE)] + [(f"q_l{j}", FLOW) for j in range(1, n + 1)]
    ports = ([p_port(name, f"l{j}", f"p_l{j}", f"q_l{j}") for j in range(1, n + 1)]
             + [q_port(name, f"r{k}", f"q_r{k}", "p") for k in range(1, n_outlets + 1)])
    return LabeledLinearModel(
        A, B, C, D,
        make_labels(name, [("p", PRESSURE)], STATE), make_labels(name, inputs, INPUT),
        make_labels(name, outputs, OUTPUT), nominal or {}, ports,
    )


def entrance_tank(t: TankParams, orifice: OrificeParams, p_upstream: Sequence[float],
                  area: float | None = None, name: str = "tank") -> LabeledLinearModel:
    """Isothermal tank fed through ``len(p_upstream)`` identical orifices."""
    if len(p_upstream) != t.n_inlets:
        raise InvalidParams("one upstream pressure per tank inlet is required")
    area = orifice.A_o_max if area is None else area
    xis, zetas, nominal = [], [], {f"{name}.p": t.nominal_p}
    for j, pu in enumerate(p_upstream, start=1):
        gain_A, zeta, xi = orifice_linearization(area, pu, t.nominal_p, orifice)
        xis.append(xi)
        zetas.append(zeta)
        nominal[f"{name}.p_l{j}"] = pu
        nominal[f"{name}.q_l{j}"] = gain_A * area
    alpha = t.gas.RTz / t.V
    return entrance_tank_from_coefficients(alpha, xis, zetas, t.n_outlets, name, nominal)
