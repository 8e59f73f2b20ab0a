"""Heat exchanger as a single non-isothermal pipe with radial heat conduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ..errors import InvalidParams, NonPhysicalState
from ..model import (FLOW, INPUT, OUTPUT, PRESSURE, STATE, TEMPERATURE, LabeledLinearModel,
                     make_labels, p_port, q_port)
from .linearize import NonlinearSystem, linearize
from .pipes import PipeParams


@dataclass(frozen=True)
class HeatExchangerParams:
    """``pipe.X`` is the exchanger length and ``pipe.h / pipe.X`` its slope."""

    pipe: PipeParams
    k_rad: float
    D_o: float
    T_amb: float
    nominal_T_left: float
    nominal_T_right: Optional[float] = None

    def __post_init__(self):
        if self.k_rad < 0:
            raise InvalidParams("heat transfer coefficient must be nonnegative")
        if self.D_o < self.pipe.D:
            raise InvalidParams("outer diameter must be at least the inner diameter")
        temps = [self.T_amb, self.nominal_T_left]
        if self.nominal_T_right is not None:
            temps.append(self.nominal_T_right)
        if min(temps) <= 0:
            raise InvalidParams("temperatures must be positive")


def _terms(x, u, h):
    p_r, q_l, T_r = (float(v) for v in x)
    p_l, q_r, T_l = (float(v) for v in u)
    if min(p_r, p_l, T_r, T_l) <= 0:
        raise NonPhysicalState(f"heat exchanger pressures and temperatures must be positive "
                               f"(p_r={p_r}, p_l={p_l}, T_r={T_r}, T_l={T_l})")
    pipe = h.pipe
    gas = pipe.gas
    return p_r, q_l, T_r, p_l, q_r, T_l, pipe, gas, gas.R_s * gas.z_0, pipe.X


def heat_exchanger_rhs(x, u, h: HeatExchangerParams) -> np.ndarray:
    """``(dp_r/dt, dq_l/dt, dT_r/dt)`` for ``x = (p_r, q_l, T_r)``, ``u = (p_l, q_r, T_l)``."""
    p_r, q_l, T_r, p_l, q_r, T_l, pipe, gas, Rz, L = _terms(x, u, h)
    A, D, lam, cv = pipe.A, pipe.D, pipe.lam, gas.c_v
    heat = h.k_rad * np.pi * h.D_o * (h.T_amb - T_r)
    flow_diff = (q_r - q_l) / L
    work = (p_r - p_l) / L * Rz * T_r * q_r / p_r
    convect = (T_r - T_l) / L * q_r * (cv + Rz)
    friction = lam * Rz**2 * T_r**2 * q_r**2 * abs(q_r) / (2 * D * A**2 * p_r**2)
    pdot = Rz / (A * cv) * (heat - flow_diff * T_r * (cv + Rz) + work - convect + friction)
    qdot = (-A * (p_r - p_l) / L
            - lam * Rz * T_l / (2 * D * A) * q_l * abs(q_l) / p_l
            - A * gas.g / (Rz * T_l) * (pipe.h / L) * p_l)
    Tdot = Rz * T_r / (A * cv * p_r) * (heat - flow_diff * T_r * Rz + work - convect + friction)
    return np.array([pdot, qdot, Tdot])


def heat_exchanger_jacobian(x, u, h: HeatExchangerParams):
    """Analytic ``(A, B)`` of :func:`heat_exchanger_rhs`."""
    p_r, q_l, T_r, p_l, q_r, T_l, pipe, gas, Rz, L = _terms(x, u, h)
    A, D, lam, cv = pipe.A, pipe.D, pipe.lam, gas.c_v
    slope = pipe.h / L
    heat = h.k_rad * np.pi * h.D_o * (h.T_amb - T_r)
    flow_diff = (q_r - q_l) / L
    work = (p_r - p_l) / L * Rz * T_r * q_r / p_r
    convect = (T_r - T_l) / L * q_r * (cv + Rz)
    fc = lam * Rz**2 / (2 * D * A**2)
    friction = fc * T_r**2 * q_r**2 * abs(q_r) / p_r**2

    # derivatives of the terms shared by both brackets, ordered (p_r, q_l, T_r | p_l, q_r, T_l)
    d_heat = np.array([0, 0, -h.k_rad * np.pi * h.D_o, 0, 0, 0])
    d_work = np.array([Rz * T_r * q_r * p_l / (L * p_r**2), 0,
                       (p_r - p_l) / L * Rz * q_r / p_r,
                       -Rz * T_r * q_r / (L * p_r),
                       (p_r - p_l) / L * Rz * T_r / p_r, 0])
    d_convect = np.array([0, 0, q_r * (cv + Rz) / L, 0,
                          (T_r - T_l) * (cv + Rz) / L, -q_r * (cv + Rz) / L])
    d_friction = np.array([-2 * friction / p_r, 0, 2 * fc * T_r * q_r**2 * abs(q_r) / p_r**2, 0,
                           3 * fc * T_r**2 * q_r * abs(q_r) / p_r**2, 0])
    d_common = d_heat + d_work - d_convect + d_friction

    def bracket_grad(c):
        # d/dz of (-flow_diff * T_r * c)
        d = np.array([0, T_r * c / L, -flow_diff * c, 0, -T_r * c / L, 0])
        return d_common + d

    g1 = Rz / (A * cv)
    dp = g1 * bracket_grad(cv + Rz)

    br_T = heat - flow_diff * T_r * Rz + work - convect + friction
    g2 = Rz * T_r / (A * cv * p_r)
    dT = g2 * bracket_grad(Rz)
    dT[0] += -g2 / p_r * br_T
    dT[2] += g2 / T_r * br_T

    fq = lam * Rz / (2 * D * A)
    grav = A * gas.g * slope / Rz
    dq = np.array([
        -A / L,
        -fq * T_l * 2 * abs(q_l) / p_l,
        0.0,
        A / L + fq * T_l * q_l * abs(q_l) / p_l**2 - grav / T_l,
        0.0,
        -fq * q_l * abs(q_l) / p_l + grav * p_l / T_l**2,
    ])
    J = np.vstack([dp, dq, dT])
    return J[:, :3], J[:, 3:]


def heat_exchanger_system(h: HeatExchangerParams, name: str = "hx") -> NonlinearSystem:
    xs = [("p_r", PRESSURE), ("q_l", FLOW), ("T_r", TEMPERATURE)]
    return NonlinearSystem(
        lambda x, u: heat_exchanger_rhs(x, u, h),
        lambda x, u: np.asarray(x, float).copy(),
        make_labels(name, xs, STATE),
        make_labels(name, [("p_l", PRESSURE), ("q_r", FLOW), ("T_l", TEMPERATURE)], INPUT),
        make_labels(name, xs, OUTPUT),
        jacobian=lambda x, u: heat_exchanger_jacobian(x, u, h),
        output_jacobian=lambda x, u: (np.eye(3), np.zeros((3, 3))),
        ports=(p_port(name, "l", "p_l", "q_l"), q_port(name, "r", "q_r", "p_r")),
    )


def heat_exchanger_equilibrium(h: HeatExchangerParams, p_left: float, q: float,
                               T_left: float | None = None):
    """Steady ``(x, u)`` for throughput ``q``: momentum balance fixes ``p_r``,
    a scalar root search on the energy bracket fixes ``T_r``."""
    pipe = h.pipe
    gas = pipe.gas
    Rz = gas.R_s * gas.z_0
    T_l = h.nominal_T_left if T_left is None else T_left
    L = pipe.X
    drop = (L / pipe.A) * (pipe.lam * Rz * T_l * q * abs(q) / (2 * pipe.D * pipe.A * p_left)
                           + pipe.A * gas.g * (pipe.h / L) * p_left / (Rz * T_l))
    p_r = p_left - drop
    if p_r <= 0:
        raise NonPhysicalState("pressure drop exceeds the inlet pressure")
    u = np.array([p_left, q, T_l])

    def energy(T_r):
        return heat_exchanger_rhs([p_r, q, T_r], u, h)[2]

    if q == 0 and h.k_rad == 0:
        T_r = T_l
    else:
        lo, hi = 0.5 * min(T_l, h.T_amb), 2.0 * max(T_l, h.T_amb)
        while energy(lo) * energy(hi) > 0 and hi < 1e5:
            lo, hi = lo / 2, hi * 2
        T_r = brentq(energy, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return np.array([p_r, q, T_r]), u


def heat_exchanger(h: HeatExchangerParams, p_left: float, q: float, name: str = "hx") -> LabeledLinearModel:
    x, u = heat_exchanger_equilibrium(h, p_left, q)
    return linearize(heat_exchanger_system(h, name), x, u)
