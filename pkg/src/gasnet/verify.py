"""Property checks: conservation of mass, junction oracle, finite differences.

This module is imported by the linearizer, so it depends only on the model
core at import time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateJunction, EvaluationFailure, GasnetError, PartitionMismatch
from .model import (FLOW, PRESSURE, LabeledLinearModel, dc_gain, frequency_response,
                    is_singular)

DC_MODE = "dc-gain"
STRUCTURAL_MODE = "structural"


# ---------------------------------------------------------------- mass balance

@dataclass(frozen=True)
class SignalPartition:
    """Index lists of the pressure/flow inputs and outputs of a model."""

    pressure_inputs: tuple
    flow_inputs: tuple
    pressure_outputs: tuple
    flow_outputs: tuple

    @classmethod
    def from_model(cls, model: LabeledLinearModel) -> "SignalPartition":
        def idx(labels, kind):
            return tuple(i for i, lab in enumerate(labels) if lab.kind == kind)

        return cls(idx(model.input_labels, PRESSURE), idx(model.input_labels, FLOW),
                   idx(model.output_labels, PRESSURE), idx(model.output_labels, FLOW))

    def check(self, model: LabeledLinearModel):
        groups = {
            "pressure_inputs": (self.pressure_inputs, model.input_labels, PRESSURE),
            "flow_inputs": (self.flow_inputs, model.input_labels, FLOW),
            "pressure_outputs": (self.pressure_outputs, model.output_labels, PRESSURE),
            "flow_outputs": (self.flow_outputs, model.output_labels, FLOW),
        }
        for name, (ids, labels, kind) in groups.items():
            for i in ids:
                if not 0 <= i < len(labels) or labels[i].kind != kind:
                    raise PartitionMismatch(f"{name} index {i} is not a {kind} signal")
        for a, b in ((self.pressure_inputs, self.flow_inputs),
                     (self.pressure_outputs, self.flow_outputs)):
            if set(a) & set(b):
                raise PartitionMismatch("partition groups overlap")


@dataclass(frozen=True)
class MassReport:
    t_qp_norm: float
    colsum_dev: float
    passed: bool
    mode: str
    tol: float

    def as_dict(self) -> dict:
        return {"t_qp_norm": self.t_qp_norm, "colsum_dev": self.colsum_dev,
                "passed": self.passed, "mode": self.mode, "tol": self.tol}


def check_mass_conservation(model: LabeledLinearModel, partition: SignalPartition | None = None,
                            tol: float = 1e-9, entrywise: bool = False) -> MassReport:
    """Conservation of mass at steady state.

    With a nonsingular ``A`` the DC gain ``T(0)`` is formed and the net
    steady mass flow through the component is checked.  Left-end flows
    count as entering and right-end flows as leaving, so with weights
    ``s = +1`` for ``q_l*`` and ``-1`` for ``q_r*``:

    * ``s^T T_qp(0) = 0``: pressure inputs cause no net steady flow, and
    * ``s^T T_qq(0) = -s_in``: each flow input is passed through in full,
      which reads ``1^T T_qq(0) = 1^T`` when outputs enter and inputs leave.

    For a single flow output this is exactly ``T_qp(0) = 0`` entrywise.
    ``entrywise=True`` demands that reading for every flow output, which
    multi-inlet junctions do not satisfy (a pressure rise on one inlet
    pushes flow back through the others).

    With a singular ``A`` (an integrating tank) each pure-integrator row of
    ``B`` must be ``+c`` on inflows and ``-c`` on outflows, with nothing on
    pressure inputs.
    """
    partition = partition or SignalPartition.from_model(model)
    partition.check(model)
    if not partition.flow_inputs:
        raise PartitionMismatch("the model has no flow inputs; mass conservation does not apply")
    if model.n_states and is_singular(model.A):
        return _structural_check(model, partition, tol)
    if not partition.flow_outputs:
        raise PartitionMismatch("the model has no flow outputs; mass conservation does not apply")
    T = dc_gain(model)
    fo, fi, pi = list(partition.flow_outputs), list(partition.flow_inputs), list(partition.pressure_inputs)
    s_out = np.array([_flow_side(model.output_labels[i].name) for i in fo])
    s_in = np.array([_flow_side(model.input_labels[i].name) for i in fi])
    T_qp = T[np.ix_(fo, pi)]
    T_qq = T[np.ix_(fo, fi)]
    if entrywise:
        qp = float(np.max(np.abs(T_qp), initial=0.0))
    else:
        qp = float(np.max(np.abs(s_out @ T_qp), initial=0.0))
    cs = float(np.max(np.abs(s_out @ T_qq + s_in), initial=0.0))
    return MassReport(qp, cs, qp <= tol and cs <= tol, DC_MODE, tol)


def _structural_check(model, partition, tol):
    rows = [i for i in range(model.n_states) if np.all(model.A[i] == 0)]
    if not rows:
        raise PartitionMismatch("A is singular but has no pure integrator row")
    fi = list(partition.flow_inputs)
    pi = list(partition.pressure_inputs)
    sides = np.array([_flow_side(model.input_labels[i].name) for i in fi])
    qp, cs = 0.0, 0.0
    for i in rows:
        b = model.B[i]
        scale = np.max(np.abs(b[fi]), initial=0.0)
        if scale == 0:
            cs = max(cs, 1.0)
            continue
        if pi:
            qp = max(qp, float(np.max(np.abs(b[pi])) / scale))
        cs = max(cs, float(np.max(np.abs(b[fi] / scale - sides))))
    return MassReport(qp, cs, qp <= tol and cs <= tol, STRUCTURAL_MODE, tol)


def _flow_side(name: str) -> float:
    # left-end flows enter the component, right-end flows leave it
    if name.startswith("q_l"):
        return 1.0
    if name.startswith("q_r"):
        return -1.0
    raise PartitionMismatch(f"cannot tell the direction of flow input {name!r}")


# ------------------------------------------------------------ junction oracle

def brute_force_junction(alphas: Sequence[float], q_state: Sequence[float]) -> np.ndarray:
    """Right-end flows of the joining pipes by a direct dense solve.

    Unknowns are ``q_{k,r}`` for ``k = 1..n``.  The junction pressures of
    all joining pipes move together, ``alpha_k (q_{k,r} - q_{k,l}) =
    alpha_1 (q_{1,r} - q_{1,l})``, and the flows add up to ``q_{0,l}``.
    """
    alphas = np.asarray(alphas, float)
    q = np.asarray(q_state, float)
    n = alphas.size
    if n < 2 or q.size != n + 1:
        raise ValueError("need n >= 2 coefficients and n + 1 flows")
    M = np.zeros((n, n))
    rhs = np.zeros(n)
    for k in range(1, n):
        M[k - 1, 0] = alphas[0]
        M[k - 1, k] = -alphas[k]
        rhs[k - 1] = alphas[0] * q[1] - alphas[k] * q[k + 1]
    M[n - 1, :] = 1.0
    rhs[n - 1] = q[0]
    if is_singular(M):
        raise DegenerateJunction("junction constraint system is singular")
    return np.linalg.solve(M, rhs)


# ------------------------------------------------------- finite differences

def finite_difference_jacobian(f: Callable, point, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian with step ``rel_step * max(1, |x_i|)``."""
    x = np.asarray(point, float)
    try:
        f0 = np.atleast_1d(np.asarray(f(x), float))
    except GasnetError as exc:
        raise EvaluationFailure(f"evaluation at the base point failed: {exc}") from exc
    J = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        try:
            fp = np.atleast_1d(np.asarray(f(xp), float))
            fm = np.atleast_1d(np.asarray(f(xm), float))
        except (GasnetError, ValueError, ZeroDivisionError, FloatingPointError) as exc:
            raise EvaluationFailure(f"evaluation failed when perturbing coordinate {i}: {exc}",
                                    index=i) from exc
        J[:, i] = (fp - fm) / (2 * (xp[i] - x[i]))
    return J


def jacobian_mismatch(analytic, numeric, scale=None) -> float:
    """Largest relative deviation between two Jacobians.

    Each column is weighted by ``scale`` (typically the magnitudes of the
    nominal variables), and each row is compared against its own largest
    weighted entry, so that rows of very different physical size are
    judged on equal footing.
    """
    a = np.atleast_2d(np.asarray(analytic, float))
    n = np.atleast_2d(np.asarray(numeric, float))
    if scale is not None:
        w = np.maximum(np.abs(np.asarray(scale, float)), 1e-300)
        a, n = a * w, n * w
    ref = np.maximum(np.max(np.abs(a), axis=1, keepdims=True), np.max(np.abs(n), axis=1, keepdims=True))
    ref = np.where(ref > 0, ref, 1.0)
    return float(np.max(np.abs(a - n) / ref, initial=0.0))


# --------------------------------------------------------- steady residuals

def steady_state_residual(target, x=None, u=None) -> float:
    """Norm of the steady-state residual at a nominal point.

    ``target`` is a nonlinear system (anything with ``rhs``) or a callable
    ``f(x, u)``, evaluated at ``(x, u)``.  For a :class:`LabeledLinearModel`
    with absolute nominal values, ``A x + B u`` is evaluated; ``x`` and
    ``u`` then default to the model's nominal annotations.
    """
    if isinstance(target, LabeledLinearModel):
        if x is None:
            x = [target.nominal[lab.key] for lab in target.state_labels]
        if u is None:
            u = [target.nominal[lab.key] for lab in target.input_labels]
        return float(np.linalg.norm(target.derivative(x, u)))
    rhs = getattr(target, "rhs", target)
    return float(np.linalg.norm(np.asarray(rhs(np.asarray(x, float), np.asarray(u, float)), float)))


# ------------------------------------------- independent interconnection oracle

def descriptor_response(models: Sequence[LabeledLinearModel], bindings: Sequence[tuple[str, str]],
                        inputs: Sequence[str], outputs: Sequence[str], s: complex) -> np.ndarray:
    """Transfer matrix of an interconnection at ``s`` by one sparse-free dense solve.

    All component equations ``(sI - A_i) x_i = B_i w_i``, ``y_i = C_i x_i +
    D_i w_i`` and the bindings ``w = y`` / ``w = u`` are written as one
    linear system in ``(x, w, y)`` and solved for each external input.
    No closed-loop formula is used, which makes this an independent check
    of the matrix method.
    """
    xs, ws, ys = {}, {}, {}
    nx = nw = ny = 0
    for m in models:
        for lab in m.state_labels:
            xs[lab.key] = nx
            nx += 1
        for lab in m.input_labels:
            ws[lab.key] = nw
            nw += 1
        for lab in m.output_labels:
            ys[lab.key] = ny
            ny += 1
    N = nx + nw + ny
    K = np.zeros((N, N), complex)
    row = 0
    ox = ow = oy = 0
    for m in models:
        a, b = m.n_states, m.n_inputs
        c = m.n_outputs
        K[row:row + a, ox:ox + a] = s * np.eye(a) - m.A
        K[row:row + a, nx + ow:nx + ow + b] = -m.B
        row += a
        K[row:row + c, nx + nw + oy:nx + nw + oy + c] = np.eye(c)
        K[row:row + c, ox:ox + a] = -m.C
        K[row:row + c, nx + ow:nx + ow + b] = -m.D
        row += c
        ox, ow, oy = ox + a, ow + b, oy + c
    nu = len(inputs)
    R = np.zeros((N, nu), complex)
    bound = set()
    for src, dst in bindings:
        K[row, nx + ws[dst]] = 1.0
        K[row, nx + nw + ys[src]] = -1.0
        bound.add(dst)
        row += 1
    for k, key in enumerate(inputs):
        K[row, nx + ws[key]] = 1.0
        R[row, k] = 1.0
        bound.add(key)
        row += 1
    if row != N or len(bound) != nw:
        raise ValueError("every component input needs exactly one source")
    sol = np.linalg.solve(K, R)
    Z = np.zeros((len(outputs), nu), complex)
    for r, key in enumerate(outputs):
        if key in xs:
            Z[r] = sol[xs[key]]
        elif key in ys:
            Z[r] = sol[nx + nw + ys[key]]
        else:
            Z[r] = sol[nx + ws[key]]
    return Z


def max_relative_deviation(G1: np.ndarray, G2: np.ndarray) -> float:
    """Largest ``max|G1 - G2| / max|G2|`` over a stack of transfer matrices.

    A 2-D input is treated as a single matrix; for 3-D input the ratio is
    taken per leading index (one frequency at a time).
    """
    G1, G2 = np.asarray(G1), np.asarray(G2)
    if G1.ndim < 3:
        G1, G2 = G1[None], G2[None]
    worst = 0.0
    for a, b in zip(G1, G2):
        ref = np.max(np.abs(b), initial=0.0)
        dev = np.max(np.abs(a - b), initial=0.0)
        worst = max(worst, float(dev / ref) if ref > 0 else float(dev))
    return worst


def transfer_at(model: LabeledLinearModel, frequencies: Sequence[complex]) -> np.ndarray:
    return np.array([frequency_response(model, s) for s in frequencies])
