"""Isothermal single-pipe model (two-point spatial discretization)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParams
from ..model import (FLOW, INPUT, OUTPUT, PRESSURE, STATE, GasProperties,
                     LabeledLinearModel, make_labels, p_port, q_port)


@dataclass(frozen=True)
class PipeParams:
    """Geometry and nominal operating point of one pipe.

    ``h`` is the elevation gain from the left end to the right end and
    ``lam`` the Darcy-Weisbach friction factor.
    """

    A: float
    X: float
    D: float
    lam: float
    h: float
    gas: GasProperties
    nominal_p_left: float
    nominal_q: float

    def __post_init__(self):
        if not (self.A > 0 and self.X > 0 and self.D > 0):
            raise InvalidParams("pipe A, X and D must be positive")
        if self.lam < 0:
            raise InvalidParams("friction factor must be nonnegative")
        if not self.nominal_p_left > 0:
            raise InvalidParams("nominal left pressure must be positive")

    @classmethod
    def from_diameter(cls, D, X, lam, gas, nominal_p_left, nominal_q, h=0.0):
        return cls(np.pi * D**2 / 4, X, D, lam, h, gas, nominal_p_left, nominal_q)

    @property
    def nominal_p_right(self) -> float:
        """Right-end pressure that makes the nonlinear pipe stationary."""
        RTz = self.gas.RTz
        q = self.nominal_q
        friction = self.lam * RTz * q * abs(q) / (2 * self.D * self.A * self.nominal_p_left)
        gravity = self.A * self.gas.g * self.h * self.nominal_p_left / (RTz * self.X)
        return self.nominal_p_left - self.X / self.A * (friction + gravity)


@dataclass(frozen=True)
class PipeCoefficients:
    alpha: float
    beta_pr: float
    beta_pl: float
    gamma: float


def pipe_coefficients(p: PipeParams) -> PipeCoefficients:
    """Linearization coefficients of the pipe about its nominal point.

    ``dp_r/dt = alpha (q_r - q_l)`` and
    ``dq_l/dt = beta_pr p_r + beta_pl p_l + gamma q_l``.
    """
    RTz = p.gas.RTz
    q, pl = p.nominal_q, p.nominal_p_left
    alpha = -RTz / (p.A * p.X)
    beta_pr = -p.A / p.X
    beta_pl = (p.A / p.X
               + p.lam * RTz / (2 * p.D * p.A) * q * abs(q) / pl**2
               - p.A * p.gas.g * p.h / (RTz * p.X))
    gamma = -p.lam * RTz / (p.D * p.A) * abs(q) / pl
    return PipeCoefficients(alpha, beta_pr, beta_pl, gamma)


def pipe_nominal(owner: str, p: PipeParams, suffix: str = "") -> dict:
    return {
        f"{owner}.p_l{suffix}": p.nominal_p_left,
        f"{owner}.p_r{suffix}": p.nominal_p_right,
        f"{owner}.q_l{suffix}": p.nominal_q,
        f"{owner}.q_r{suffix}": p.nominal_q,
    }


def single_pipe(p: PipeParams, name: str = "pipe") -> LabeledLinearModel:
    """State and output ``(p_r, q_l)``, input ``(p_l, q_r)``."""
    c = pipe_coefficients(p)
    A = [[0.0, -c.alpha],
         [c.beta_pr, c.gamma]]
    B = [[0.0, c.alpha],
         [c.beta_pl, 0.0]]
    xs = [("p_r", PRESSURE), ("q_l", FLOW)]
    return LabeledLinearModel(
        A, B, np.eye(2), np.zeros((2, 2)),
        make_labels(name, xs, STATE),
        make_labels(name, [("p_l", PRESSURE), ("q_r", FLOW)], INPUT),
        make_labels(name, xs, OUTPUT),
        nominal=pipe_nominal(name, p),
        ports=(p_port(name, "l", "p_l", "q_l"), q_port(name, "r", "q_r", "p_r")),
    )
