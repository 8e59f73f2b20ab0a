"""Nonlinear component dynamics and their linearization about a nominal point."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import NonSteadyNominal
from ..model import LabeledLinearModel
from ..verify import finite_difference_jacobian

#: relative size of the steady-state residual that triggers NonSteadyNominal
STEADY_TOL = 1e-6


@dataclass(frozen=True)
class NonlinearSystem:
    """``dx/dt = rhs(x, u)``, ``y = output(x, u)`` with labeled signals.

    ``jacobian(x, u)`` returns ``(A, B)`` and ``output_jacobian(x, u)``
    returns ``(C, D)``; either may be omitted, in which case central finite
    differences are used.
    """

    rhs: Callable
    output: Callable
    state_labels: tuple
    input_labels: tuple
    output_labels: tuple
    jacobian: Optional[Callable] = None
    output_jacobian: Optional[Callable] = None
    ports: tuple = ()

    @property
    def n_states(self):
        return len(self.state_labels)

    @property
    def n_inputs(self):
        return len(self.input_labels)


def numerical_jacobians(system: NonlinearSystem, x, u, rel_step: float = 1e-6):
    """Finite-difference ``(A, B, C, D)`` of ``system`` at ``(x, u)``."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    nx = x.size

    def f(z):
        return system.rhs(z[:nx], z[nx:])

    def g(z):
        return system.output(z[:nx], z[nx:])

    z = np.concatenate([x, u])
    J = finite_difference_jacobian(f, z, rel_step)
    K = finite_difference_jacobian(g, z, rel_step)
    return J[:, :nx], J[:, nx:], K[:, :nx], K[:, nx:]


def steady_residual(system: NonlinearSystem, x, u, A=None, B=None) -> np.ndarray:
    """Per-state residual of ``rhs`` scaled by the magnitude of its linear terms."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    f = np.asarray(system.rhs(x, u), float)
    if A is None or B is None:
        A, B, _, _ = numerical_jacobians(system, x, u)
    scale = np.abs(A) @ np.abs(x) + np.abs(B) @ np.abs(u)
    scale = np.where(scale > 0, scale, 1.0)
    return np.abs(f) / scale


def linearize(system: NonlinearSystem, x_nominal, u_nominal, rel_step: float = 1e-6,
              use_analytic: bool = True) -> LabeledLinearModel:
    """Deviation model of ``system`` about ``(x_nominal, u_nominal)``.

    Emits :class:`NonSteadyNominal` if the point is not an equilibrium; the
    model is produced either way.
    """
    x = np.asarray(x_nominal, float)
    u = np.asarray(u_nominal, float)
    fd = None
    if use_analytic and system.jacobian is not None:
        A, B = system.jacobian(x, u)
    else:
        fd = numerical_jacobians(system, x, u, rel_step)
        A, B = fd[0], fd[1]
    if use_analytic and system.output_jacobian is not None:
        C, D = system.output_jacobian(x, u)
    else:
        fd = fd or numerical_jacobians(system, x, u, rel_step)
        C, D = fd[2], fd[3]
    resid = steady_residual(system, x, u, A, B)
    if np.max(resid, initial=0.0) > STEADY_TOL:
        warnings.warn(f"nominal point is not steady (relative residual {resid.max():.3g})",
                      NonSteadyNominal, stacklevel=2)
    y = np.asarray(system.output(x, u), float)
    nominal = {}
    for labels, values in ((system.state_labels, x), (system.input_labels, u),
                           (system.output_labels, y)):
        for lab, v in zip(labels, values):
            nominal[lab.key] = float(v)
    return LabeledLinearModel(
        np.asarray(A, float), np.asarray(B, float), np.asarray(C, float), np.asarray(D, float),
        system.state_labels, system.input_labels, system.output_labels, nominal, system.ports,
    )
