"""Labeled linear state-space models and the basic queries on them.

A :class:`LabeledLinearModel` is an ordinary ``(A, B, C, D)`` realization
whose rows and columns carry :class:`SignalLabel` objects, so that models
can be stacked and interconnected by signal name.  All signals are
deviations from a nominal operating point, in SI units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import lapack

from .errors import InvalidParams, SingularAtDC, SingularResolvent

PRESSURE = "pressure"
FLOW = "mass-flow"
TEMPERATURE = "temperature"
COMMAND = "command"
AREA = "area"
SPEED = "speed"
KINDS = (PRESSURE, FLOW, TEMPERATURE, COMMAND, AREA, SPEED)

INPUT = "input"
OUTPUT = "output"
STATE = "state"
DIRECTIONS = (INPUT, OUTPUT, STATE)

#: condition-number threshold above which a matrix is treated as singular
SINGULAR_COND = 1e12


@dataclass(frozen=True)
class SignalLabel:
    owner: str
    name: str
    kind: str
    direction: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown signal kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise InvalidParams(f"unknown signal direction {self.direction!r}")

    @property
    def key(self) -> str:
        return f"{self.owner}.{self.name}"

    def __str__(self):
        return self.key


def make_labels(owner: str, specs: Iterable[tuple[str, str]], direction: str):
    """Build a label tuple from ``(name, kind)`` pairs."""
    return tuple(SignalLabel(owner, name, kind, direction) for name, kind in specs)


@dataclass(frozen=True)
class Port:
    """A connection site: one pressure and one flow signal of a component.

    A p-port takes pressure in and gives flow out; a q-port takes flow in and
    gives pressure out.
    """

    owner: str
    name: str
    kind: str  # "p" or "q"
    pressure: str
    flow: str

    @property
    def key(self) -> str:
        return f"{self.owner}.{self.name}"

    @property
    def input_signal(self) -> str:
        return self.pressure if self.kind == "p" else self.flow

    @property
    def output_signal(self) -> str:
        return self.flow if self.kind == "p" else self.pressure


def p_port(owner, name, pressure, flow):
    return Port(owner, name, "p", pressure, flow)


def q_port(owner, name, flow, pressure):
    return Port(owner, name, "q", pressure, flow)


def _as_matrix(m, rows=None, cols=None):
    a = np.array(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(rows or 0, cols or 0)
    if a.size == 0 and rows is not None and cols is not None:
        a = np.zeros((rows, cols))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledLinearModel:
    """``dx/dt = A x + B u``, ``y = C x + D u`` with labeled signals.

    Static components use ``n_x = 0``.  ``nominal`` maps signal keys
    (``"owner.name"``) to absolute operating-point values.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    state_labels: tuple = ()
    input_labels: tuple = ()
    output_labels: tuple = ()
    nominal: Mapping[str, float] = field(default_factory=dict)
    ports: tuple = ()

    def __post_init__(self):
        nx, nu, ny = len(self.state_labels), len(self.input_labels), len(self.output_labels)
        object.__setattr__(self, "A", _as_matrix(self.A, nx, nx))
        object.__setattr__(self, "B", _as_matrix(self.B, nx, nu))
        object.__setattr__(self, "C", _as_matrix(self.C, ny, nx))
        object.__setattr__(self, "D", _as_matrix(self.D, ny, nu))
        object.__setattr__(self, "state_labels", tuple(self.state_labels))
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        object.__setattr__(self, "nominal", MappingProxyType(dict(self.nominal)))
        object.__setattr__(self, "ports", tuple(self.ports))

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1] if self.B.ndim == 2 else 0

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    @property
    def owners(self) -> tuple:
        seen = []
        for lab in self.state_labels + self.input_labels + self.output_labels:
            if lab.owner not in seen:
                seen.append(lab.owner)
        return tuple(seen)

    def _index(self, labels, key):
        key = key.key if isinstance(key, SignalLabel) else key
        for i, lab in enumerate(labels):
            if lab.key == key:
                return i
        raise KeyError(key)

    def input_index(self, key) -> int:
        return self._index(self.input_labels, key)

    def output_index(self, key) -> int:
        return self._index(self.output_labels, key)

    def state_index(self, key) -> int:
        return self._index(self.state_labels, key)

    def port(self, key: str) -> Port:
        for p in self.ports:
            if p.key == key:
                return p
        raise KeyError(key)

    def output(self, x, u):
        return self.C @ np.asarray(x, float) + self.D @ np.asarray(u, float)

    def derivative(self, x, u):
        return self.A @ np.asarray(x, float) + self.B @ np.asarray(u, float)


@dataclass(frozen=True)
class GasProperties:
    """Gas constants shared by every component of a network (SI units)."""

    R_s: float
    T_0: float
    z_0: float
    c_p: float
    c_v: float
    g: float = 9.81
    mu: float | None = None

    def __post_init__(self):
        for name in ("R_s", "T_0", "z_0", "c_p", "c_v", "g"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"gas property {name} must be positive")
        ratio = self.c_p / self.c_v
        if self.mu is None:
            object.__setattr__(self, "mu", ratio)
        elif abs(self.mu - ratio) > 1e-12 * ratio:
            raise InvalidParams(f"mu={self.mu} does not equal c_p/c_v={ratio}")
        if not self.mu > 1:
            raise InvalidParams("c_p/c_v must exceed 1")

    @property
    def RTz(self) -> float:
        return self.R_s * self.T_0 * self.z_0


def validate_dimensions(model: LabeledLinearModel) -> list[str]:
    """List every dimension inconsistency of ``model``; empty when well-formed."""
    problems = []
    A, B, C, D = model.A, model.B, model.C, model.D
    nx, nu, ny = len(model.state_labels), len(model.input_labels), len(model.output_labels)
    if A.shape[0] != A.shape[1]:
        problems.append(f"A is not square: {A.shape}")
    if A.shape[0] != nx:
        problems.append(f"state_labels has {nx} entries but A has {A.shape[0]} rows")
    if B.shape[0] != A.shape[0]:
        problems.append(f"B has {B.shape[0]} rows, expected {A.shape[0]}")
    if B.shape[1] != nu:
        problems.append(f"input_labels has {nu} entries but B has {B.shape[1]} columns")
    if C.shape[1] != A.shape[1]:
        problems.append(f"C has {C.shape[1]} columns, expected {A.shape[1]}")
    if C.shape[0] != ny:
        problems.append(f"output_labels has {ny} entries but C has {C.shape[0]} rows")
    if D.shape != (C.shape[0], B.shape[1]):
        problems.append(f"D has shape {D.shape}, expected {(C.shape[0], B.shape[1])}")
    if nx == 0 and D.size == 0:
        problems.append("static model (no states) must have a nonempty D")
    for name, labels in (("state_labels", model.state_labels),
                         ("input_labels", model.input_labels),
                         ("output_labels", model.output_labels)):
        keys = [(lab.owner, lab.name, lab.direction) for lab in labels]
        if len(set(keys)) != len(keys):
            problems.append(f"{name} contains duplicate labels")
    return problems


def _equilibrate(M):
    # row then column scaling by powers of two, as in LAPACK xGEEQU
    M = np.array(M, dtype=complex if np.iscomplexobj(M) else float)
    for _ in range(2):
        r = np.max(np.abs(M), axis=1)
        if np.any(r == 0):
            return None
        M = M / (2.0 ** np.round(np.log2(r)))[:, None]
        c = np.max(np.abs(M), axis=0)
        if np.any(c == 0):
            return None
        M = M / (2.0 ** np.round(np.log2(c)))[None, :]
    return M


def condition_estimate(M) -> float:
    """1-norm condition estimate of ``M`` after row/column equilibration."""
    M = np.asarray(M)
    if M.size == 0:
        return 1.0
    E = _equilibrate(M)
    if E is None:
        return np.inf
    if np.iscomplexobj(E):
        getrf, gecon = lapack.zgetrf, lapack.zgecon
    else:
        getrf, gecon = lapack.dgetrf, lapack.dgecon
    lu, _, info = getrf(E)
    if info > 0:
        return np.inf
    anorm = np.max(np.sum(np.abs(E), axis=0))
    rcond, _ = gecon(lu, anorm, norm="1")
    return np.inf if rcond == 0 else 1.0 / rcond


def is_singular(M, threshold: float = SINGULAR_COND) -> bool:
    return condition_estimate(M) > threshold


def dc_gain(model: LabeledLinearModel) -> np.ndarray:
    """Transfer matrix at ``s = 0``: ``D - C A^{-1} B``."""
    if model.n_states == 0:
        return np.array(model.D, dtype=float)
    if is_singular(model.A):
        raise SingularAtDC("A is singular to working precision; the model has an integrator")
    return model.D - model.C @ np.linalg.solve(model.A, model.B)


def frequency_response(model: LabeledLinearModel, s: complex) -> np.ndarray:
    """``C (sI - A)^{-1} B + D`` evaluated at the complex frequency ``s``."""
    if model.n_states == 0:
        return np.array(model.D, dtype=complex)
    M = s * np.eye(model.n_states) - model.A
    if is_singular(M):
        raise SingularResolvent(f"sI - A is singular at s={s}")
    return model.D + model.C @ np.linalg.solve(M, model.B.astype(complex))


def select(model: LabeledLinearModel, inputs: Sequence[str] | None = None,
           outputs: Sequence[str] | None = None) -> LabeledLinearModel:
    """Sub-model restricted to the given input and output keys (in that order)."""
    ii = [model.input_index(k) for k in inputs] if inputs is not None else range(model.n_inputs)
    oo = [model.output_index(k) for k in outputs] if outputs is not None else range(model.n_outputs)
    ii, oo = list(ii), list(oo)
    return LabeledLinearModel(
        model.A, model.B[:, ii], model.C[oo, :], model.D[np.ix_(oo, ii)],
        model.state_labels, [model.input_labels[i] for i in ii],
        [model.output_labels[o] for o in oo], model.nominal, model.ports,
    )


def permute_states(model: LabeledLinearModel, order: Sequence[int]) -> LabeledLinearModel:
    """Similarity transform by a state permutation; ``order[i]`` is the old index of new state i."""
    order = list(order)
    return LabeledLinearModel(
        model.A[np.ix_(order, order)], model.B[order, :], model.C[:, order], model.D,
        [model.state_labels[i] for i in order], model.input_labels, model.output_labels,
        model.nominal, model.ports,
    )
