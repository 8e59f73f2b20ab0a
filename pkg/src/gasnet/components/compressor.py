"""Compressor models: static pressure gain, and compressor + duct + plenum dynamics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParams, MapDomain, NonPhysicalState
from ..model import (FLOW, INPUT, OUTPUT, PRESSURE, SPEED, STATE, TEMPERATURE,
                     GasProperties, LabeledLinearModel, make_labels, p_port, q_port)
from .linearize import NonlinearSystem, linearize
from .valves import static_two_port


def static_compressor(k_c: float, name: str = "compressor") -> LabeledLinearModel:
    """Pressure rise by the factor ``k_c > 1``; flow passes unchanged."""
    if not k_c > 1:
        raise InvalidParams(f"compressor gain must exceed 1, got {k_c}")
    return static_two_port(k_c, name)


class CompressorMap:
    """Static discharge-pressure map ``Phi(q, omega)``.

    Subclasses implement ``__call__``, ``dq``, ``domega`` and ``contains``.
    Instances must be stateless.
    """

    def __call__(self, q: float, omega: float) -> float:
        raise NotImplementedError

    def dq(self, q: float, omega: float) -> float:
        raise NotImplementedError

    def domega(self, q: float, omega: float) -> float:
        raise NotImplementedError

    def contains(self, q: float, omega: float) -> bool:
        return True

    def check(self, q, omega):
        if not self.contains(q, omega):
            raise MapDomain(f"(q={q}, omega={omega}) is outside the compressor map")


@dataclass(frozen=True)
class QuadraticMap(CompressorMap):
    """Sample map ``Phi = c0 omega^2 - c1 q^2``.

    The defaults (``c0 = 0.4 Pa s^2``, ``c1 = 50 Pa s^2/kg^2``) give about
    4 bar of discharge pressure at 1000 rad/s and 10 kg/s.  The domain is
    ``0 < q <= q_max``, ``0 < omega <= omega_max`` with ``Phi > 0``.
    """

    c0: float = 0.4
    c1: float = 50.0
    q_max: float = 80.0
    omega_max: float = 3000.0

    def __call__(self, q, omega):
        return self.c0 * omega**2 - self.c1 * q**2

    def dq(self, q, omega):
        return -2 * self.c1 * q

    def domega(self, q, omega):
        return 2 * self.c0 * omega

    def contains(self, q, omega):
        return (0 < q <= self.q_max and 0 < omega <= self.omega_max
                and self.c0 * omega**2 > self.c1 * q**2)


@dataclass(frozen=True)
class CompressorParams:
    V_p: float
    A_2: float
    L_2: float
    eta: float
    gas: GasProperties
    map: CompressorMap

    def __post_init__(self):
        if not (self.V_p > 0 and self.A_2 > 0 and self.L_2 > 0):
            raise InvalidParams("plenum volume, duct area and duct length must be positive")
        if not self.eta > 1:
            raise InvalidParams("isentropic coefficient must exceed 1")


def _discharge_temperature(p1, T1, phi, eta):
    return T1 * (phi / p1) ** ((eta - 1) / eta)


def compressor_rhs(x, u, c: CompressorParams):
    """Return ``((dp_3/dt, dq_2/dt), (p_3, q_2, T_3))``.

    ``x = (p_3, q_2)`` are plenum pressure and duct flow, ``u = (p_1, q_3r, T_1, omega)``.
    Duct and plenum sit at the discharge temperature ``T_3``.
    """
    p3, q2 = float(x[0]), float(x[1])
    p1, q3r, T1, omega = (float(v) for v in u)
    if p3 <= 0 or p1 <= 0 or T1 <= 0:
        raise NonPhysicalState(f"compressor pressures and temperature must be positive "
                               f"(p_3={p3}, p_1={p1}, T_1={T1})")
    c.map.check(q2, omega)
    phi = c.map(q2, omega)
    T3 = _discharge_temperature(p1, T1, phi, c.eta)
    gas = c.gas
    p3dot = gas.R_s * T3 * gas.z_0 / c.V_p * (q2 - q3r)
    q2dot = c.A_2 / c.L_2 * (phi - p3)
    return np.array([p3dot, q2dot]), np.array([p3, q2, T3])


def compressor_jacobian(x, u, c: CompressorParams):
    """Analytic ``(A, B, C, D)`` of :func:`compressor_rhs`."""
    p3, q2 = float(x[0]), float(x[1])
    p1, q3r, T1, omega = (float(v) for v in u)
    phi = c.map(q2, omega)
    phi_q, phi_w = c.map.dq(q2, omega), c.map.domega(q2, omega)
    e = (c.eta - 1) / c.eta
    T3 = _discharge_temperature(p1, T1, phi, c.eta)
    dT3_dq = e * T3 * phi_q / phi
    dT3_dw = e * T3 * phi_w / phi
    dT3_dp1 = -e * T3 / p1
    dT3_dT1 = T3 / T1
    k = c.gas.R_s * c.gas.z_0 / c.V_p
    net = q2 - q3r
    r = c.A_2 / c.L_2
    A = np.array([[0.0, k * T3 + k * net * dT3_dq],
                  [-r, r * phi_q]])
    B = np.array([[k * net * dT3_dp1, -k * T3, k * net * dT3_dT1, k * net * dT3_dw],
                  [0.0, 0.0, 0.0, r * phi_w]])
    C = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, dT3_dq]])
    D = np.array([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0],
                  [dT3_dp1, 0.0, dT3_dT1, dT3_dw]])
    return A, B, C, D


def compressor_system(c: CompressorParams, name: str = "compressor") -> NonlinearSystem:
    """Signals: state ``(p_r, q_l)`` = ``(p_3, q_2)``; input ``(p_l, q_r, T_l, omega)``;
    output ``(p_r, q_l, T_r)``."""
    xs = [("p_r", PRESSURE), ("q_l", FLOW)]
    return NonlinearSystem(
        lambda x, u: compressor_rhs(x, u, c)[0],
        lambda x, u: compressor_rhs(x, u, c)[1],
        make_labels(name, xs, STATE),
        make_labels(name, [("p_l", PRESSURE), ("q_r", FLOW), ("T_l", TEMPERATURE),
                           ("omega", SPEED)], INPUT),
        make_labels(name, xs + [("T_r", TEMPERATURE)], OUTPUT),
        jacobian=lambda x, u: compressor_jacobian(x, u, c)[:2],
        output_jacobian=lambda x, u: compressor_jacobian(x, u, c)[2:],
        ports=(p_port(name, "l", "p_l", "q_l"), q_port(name, "r", "q_r", "p_r")),
    )


def compressor_equilibrium(c: CompressorParams, q: float, omega: float, p1: float, T1: float):
    """Map-balanced point: ``p_3 = Phi(q, omega)`` and ``q_2 = q_3r = q``."""
    c.map.check(q, omega)
    return np.array([c.map(q, omega), q]), np.array([p1, q, T1, omega])


def dynamic_compressor(c: CompressorParams, q: float, omega: float, p1: float, T1: float,
                       name: str = "compressor") -> LabeledLinearModel:
    x, u = compressor_equilibrium(c, q, omega, p1, T1)
    return linearize(compressor_system(c, name), x, u)
