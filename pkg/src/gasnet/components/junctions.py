"""Pipe intersections: branch (1 -> m), joint (n -> 1) and star junction (n -> m).

Pressures are continuous at the junction and the flows balance.  The
flow split into the joining pipes is not a free variable: equal junction
pressures force equal pressure derivatives, which fixes every internal
right-end flow as a weighted combination of the left-end flow states.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DegenerateJunction, InvalidParams
from ..model import (FLOW, INPUT, OUTPUT, PRESSURE, STATE, LabeledLinearModel,
                     make_labels, p_port, q_port)
from .pipes import PipeParams, pipe_coefficients, pipe_nominal


def _flow_weights(alphas) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    n = alphas.size
    if np.any(alphas == 0):
        raise DegenerateJunction("pressure coefficients must be nonzero")
    # products over all coefficients but the k-th, without dividing by alpha_k
    prods = np.array([np.prod(np.delete(alphas, k)) for k in range(n)])
    S = prods.sum()
    if abs(S) <= 64 * np.finfo(float).eps * np.abs(prods).sum():
        raise DegenerateJunction("sum of coefficient products vanishes")
    W = np.empty((n, n + 1))
    for k in range(n):
        W[k, 0] = prods[k] / S
        W[k, 1:] = -prods[k] / S
        W[k, k + 1] = (S - prods[k]) / S
    return W


def internal_flow_weights(alphas: Sequence[float]) -> np.ndarray:
    """Weights expressing each joining pipe's right-end flow by the flow states.

    Row ``k`` holds the coefficients of ``q_{k+1,r}`` with respect to
    ``(q_{0,l}, q_{1,l}, ..., q_{n,l})``, where pipe 0 carries the merged flow.
    """
    if len(alphas) < 2:
        raise InvalidParams("a junction needs at least two joining pipes")
    return _flow_weights(alphas)


def _check_gas(pipes):
    gas = pipes[0].gas
    if any(p.gas != gas for p in pipes[1:]):
        raise InvalidParams("all pipes of a junction must share gas properties")


def branch(trunk: PipeParams, branches: Sequence[PipeParams], name: str = "branch") -> LabeledLinearModel:
    """Trunk pipe 0 splitting into pipes ``1..m``.

    State ``(p_r0, p_r1..p_rm, q_l0, q_l1..q_lm)``, input
    ``(p_l0, q_r1..q_rm)``, output ``(p_r1..p_rm, q_l0)``.
    """
    m = len(branches)
    if m < 2:
        raise InvalidParams("a branch needs at least two outgoing pipes")
    pipes = [trunk, *branches]
    _check_gas(pipes)
    c = [pipe_coefficients(p) for p in pipes]
    nx = 2 * (m + 1)
    qi = m + 1  # index of q_l0
    A = np.zeros((nx, nx))
    B = np.zeros((nx, m + 1))
    A[0, qi] = -c[0].alpha
    A[0, qi + 1:] = c[0].alpha
    A[qi, 0] = c[0].beta_pr
    A[qi, qi] = c[0].gamma
    B[qi, 0] = c[0].beta_pl
    for k in range(1, m + 1):
        A[k, qi + k] = -c[k].alpha
        B[k, k] = c[k].alpha
        A[qi + k, 0] = c[k].beta_pl
        A[qi + k, k] = c[k].beta_pr
        A[qi + k, qi + k] = c[k].gamma
    out = list(range(1, m + 1)) + [qi]
    C = np.eye(nx)[out]
    states = ([(f"p_r{k}", PRESSURE) for k in range(m + 1)]
              + [(f"q_l{k}", FLOW) for k in range(m + 1)])
    inputs = [("p_l0", PRESSURE)] + [(f"q_r{k}", FLOW) for k in range(1, m + 1)]
    nominal = {}
    for k, p in enumerate(pipes):
        nominal.update(pipe_nominal(name, p, str(k)))
    ports = [p_port(name, "l0", "p_l0", "q_l0")]
    ports += [q_port(name, f"r{k}", f"q_r{k}", f"p_r{k}") for k in range(1, m + 1)]
    return LabeledLinearModel(
        A, B, C, np.zeros((m + 1, m + 1)),
        make_labels(name, states, STATE), make_labels(name, inputs, INPUT),
        make_labels(name, [states[i] for i in out], OUTPUT), nominal, ports,
    )


def joint(inflows: Sequence[PipeParams], outflow: PipeParams, name: str = "joint") -> LabeledLinearModel:
    """Pipes ``1..n`` merging into pipe 0.

    State ``(p_r0, p_r1, q_l0, q_l1..q_ln)`` where ``p_r1`` is the common
    junction pressure, input ``(p_l1..p_ln, q_r0)``, output
    ``(p_r0, q_l1..q_ln)``.
    """
    n = len(inflows)
    if n < 2:
        raise InvalidParams("a joint needs at least two incoming pipes")
    pipes = [outflow, *inflows]
    _check_gas(pipes)
    c = [pipe_coefficients(p) for p in pipes]
    W = internal_flow_weights([ci.alpha for ci in c[1:]])
    nx = n + 3
    A = np.zeros((nx, nx))
    B = np.zeros((nx, n + 1))
    A[0, 2] = -c[0].alpha
    B[0, n] = c[0].alpha
    # junction pressure follows pipe 1: alpha_1 (q_{1,r} - q_{1,l})
    A[1, 2:] = c[1].alpha * W[0]
    A[1, 3] -= c[1].alpha
    A[2, 0] = c[0].beta_pr
    A[2, 1] = c[0].beta_pl
    A[2, 2] = c[0].gamma
    for k in range(1, n + 1):
        A[2 + k, 1] = c[k].beta_pr
        A[2 + k, 2 + k] = c[k].gamma
        B[2 + k, k - 1] = c[k].beta_pl
    out = [0] + list(range(3, nx))
    C = np.eye(nx)[out]
    states = ([("p_r0", PRESSURE), ("p_r1", PRESSURE)]
              + [(f"q_l{k}", FLOW) for k in range(n + 1)])
    inputs = [(f"p_l{k}", PRESSURE) for k in range(1, n + 1)] + [("q_r0", FLOW)]
    nominal = {}
    for k, p in enumerate(pipes):
        nominal.update(pipe_nominal(name, p, str(k)))
    ports = [p_port(name, f"l{k}", f"p_l{k}", f"q_l{k}") for k in range(1, n + 1)]
    ports.append(q_port(name, "r0", "q_r0", "p_r0"))
    return LabeledLinearModel(
        A, B, C, np.zeros((n + 1, n + 1)),
        make_labels(name, states, STATE), make_labels(name, inputs, INPUT),
        make_labels(name, [states[i] for i in out], OUTPUT), nominal, ports,
    )


def joint_pair(inflows: Sequence[PipeParams], outflow: PipeParams, name: str = "joint") -> LabeledLinearModel:
    """Two pipes merging into one, written out entry by entry.

    State ``(p_r0, q_l0, p_r1, q_l1, q_l2)``; inputs and outputs as in :func:`joint`.
    """
    if len(inflows) != 2:
        raise InvalidParams("joint_pair takes exactly two incoming pipes")
    _check_gas([outflow, *inflows])
    c0, c1, c2 = (pipe_coefficients(p) for p in (outflow, *inflows))
    a0, a1, a2 = c0.alpha, c1.alpha, c2.alpha
    s = a1 + a2
    if s == 0:
        raise DegenerateJunction("alpha_1 + alpha_2 vanishes")
    A = [
        [0, -a0, 0, 0, 0],
        [c0.beta_pr, c0.gamma, c0.beta_pl, 0, 0],
        [0, a1 * a2 / s, 0, a1**2 / s - a1, -a1 * a2 / s],
        [0, 0, c1.beta_pr, c1.gamma, 0],
        [0, 0, c2.beta_pr, 0, c2.gamma],
    ]
    B = [
        [0, 0, a0],
        [0, 0, 0],
        [0, 0, 0],
        [c1.beta_pl, 0, 0],
        [0, c2.beta_pl, 0],
    ]
    C = np.eye(5)[[0, 3, 4]]
    states = [("p_r0", PRESSURE), ("q_l0", FLOW), ("p_r1", PRESSURE), ("q_l1", FLOW), ("q_l2", FLOW)]
    inputs = [("p_l1", PRESSURE), ("p_l2", PRESSURE), ("q_r0", FLOW)]
    nominal = {}
    for k, p in enumerate((outflow, *inflows)):
        nominal.update(pipe_nominal(name, p, str(k)))
    ports = [p_port(name, "l1", "p_l1", "q_l1"), p_port(name, "l2", "p_l2", "q_l2"),
             q_port(name, "r0", "q_r0", "p_r0")]
    return LabeledLinearModel(
        A, B, C, np.zeros((3, 3)),
        make_labels(name, states, STATE), make_labels(name, inputs, INPUT),
        make_labels(name, [states[i] for i in (0, 3, 4)], OUTPUT), nominal, ports,
    )


def star_junction(inflows: Sequence[PipeParams], outflows: Sequence[PipeParams],
                  name: str = "star") -> LabeledLinearModel:
    """Pipes ``1..n`` meeting pipes ``n+1..n+m`` at one node.

    State ``(p_r1, p_r{n+1}..p_r{n+m}, q_l1..q_l{n+m})`` with ``p_r1`` the
    node pressure, input ``(p_l1..p_ln, q_r{n+1}..q_r{n+m})``, output
    ``(p_r{n+1}..p_r{n+m}, q_l1..q_ln)``.
    """
    n, m = len(inflows), len(outflows)
    if n < 1 or m < 1 or n + m < 3:
        raise InvalidParams("a star junction needs n, m >= 1 and n + m >= 3")
    pipes = [*inflows, *outflows]
    _check_gas(pipes)
    c = [None] + [pipe_coefficients(p) for p in pipes]  # 1-based like the pipe indices
    W = _flow_weights([c[k].alpha for k in range(1, n + 1)])
    nx = n + 2 * m + 1

    def q(i):  # state index of q_{i,l}
        return m + i

    A1 = np.zeros((nx, nx))
    # node pressure: alpha_1 (q_{1,r} - q_{1,l}), merged flow = sum of outgoing q_l
    A1[0, [q(k) for k in range(1, n + 1)]] = c[1].alpha * W[0, 1:]
    A1[0, q(1)] -= c[1].alpha
    A1[0, [q(n + j) for j in range(1, m + 1)]] = c[1].alpha * W[0, 0]

    A2 = np.zeros((nx, nx))
    B2 = np.zeros((nx, n + m))
    A3 = np.zeros((nx, nx))
    B3 = np.zeros((nx, n + m))
    A4 = np.zeros((nx, nx))
    for j in range(1, m + 1):
        A2[j, q(n + j)] = -c[n + j].alpha
        B2[j, n + j - 1] = c[n + j].alpha
    for k in range(1, n + 1):
        A3[q(k), 0] = c[k].beta_pr
        A3[q(k), q(k)] = c[k].gamma
        B3[q(k), k - 1] = c[k].beta_pl
    for j in range(1, m + 1):
        i = n + j
        A4[q(i), 0] = c[i].beta_pl
        A4[q(i), j] = c[i].beta_pr
        A4[q(i), q(i)] = c[i].gamma
    A = A1 + A2 + A3 + A4
    B = B2 + B3

    C = np.zeros((n + m, nx))
    C[:, 1:1 + n + m] = np.eye(n + m)
    states = ([("p_r1", PRESSURE)] + [(f"p_r{n + j}", PRESSURE) for j in range(1, m + 1)]
              + [(f"q_l{i}", FLOW) for i in range(1, n + m + 1)])
    inputs = ([(f"p_l{k}", PRESSURE) for k in range(1, n + 1)]
              + [(f"q_r{n + j}", FLOW) for j in range(1, m + 1)])
    nominal = {}
    for i, p in enumerate(pipes, start=1):
        nominal.update(pipe_nominal(name, p, str(i)))
    ports = [p_port(name, f"l{k}", f"p_l{k}", f"q_l{k}") for k in range(1, n + 1)]
    ports += [q_port(name, f"r{n + j}", f"q_r{n + j}", f"p_r{n + j}") for j in range(1, m + 1)]
    return LabeledLinearModel(
        A, B, C, np.zeros((n + m, n + m)),
        make_labels(name, states, STATE), make_labels(name, inputs, INPUT),
        make_labels(name, states[1:1 + n + m], OUTPUT), nominal, ports,
    )
