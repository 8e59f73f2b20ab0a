"""Time- and frequency-domain simulation.

Linear models are advanced with the exact zero-order-hold discretization.
Nonlinear systems use fixed-step RK4, refined by step halving when a step
moves the state too far.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import InvalidParams, NonPhysicalState, SingularResolvent, StepLimit
from .model import LabeledLinearModel, frequency_response

MAX_STEPS = 10**7


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    dt: float

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise InvalidParams("time grid needs t1 > t0")
        if not self.dt > 0:
            raise InvalidParams("time step must be positive")
        n = (self.t1 - self.t0) / self.dt
        if n > MAX_STEPS:
            raise InvalidParams(f"time grid has {n:.3g} steps, more than {MAX_STEPS}")
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise InvalidParams("the time span must be a whole number of steps")

    @property
    def n_steps(self) -> int:
        return int(round((self.t1 - self.t0) / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n_steps + 1)


@dataclass
class Trajectory:
    """Sampled signals on a time grid, keyed by ``"component.signal"``."""

    times: np.ndarray
    signals: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        for k, v in self.signals.items():
            v = np.asarray(v, float)
            if v.shape != self.times.shape:
                raise ValueError(f"signal {k} has {v.shape} samples, expected {self.times.shape}")
            self.signals[k] = v

    def __getitem__(self, key: str) -> np.ndarray:
        return self.signals[key]

    @property
    def columns(self) -> list[str]:
        return ["t_s", *self.signals]

    def to_csv(self, target=None) -> str:
        """Write CSV (first column ``t_s``, 17 significant digits); return the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        data = np.column_stack([self.times, *self.signals.values()])
        for row in data:
            w.writerow(["%.17g" % v for v in row])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "Trajectory":
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
        if header[0] != "t_s":
            raise ValueError("first CSV column must be t_s")
        return cls(body[:, 0], {k: body[:, i] for i, k in enumerate(header[1:], start=1)})


def discretize(A, B, dt: float):
    """Exact zero-order-hold discretization ``(Ad, Bd)``."""
    nx, nu = B.shape
    M = np.zeros((nx + nu, nx + nu))
    M[:nx, :nx] = A
    M[:nx, nx:] = B
    E = expm(M * dt)
    return E[:nx, :nx], E[:nx, nx:]


def _input_matrix(input_fn, times, nu):
    if nu == 0:
        return np.zeros((times.size, 0))
    U = np.array([np.asarray(input_fn(t), float).reshape(-1) for t in times])
    if U.shape != (times.size, nu):
        raise ValueError(f"input function returns {U.shape[1:]} values, expected {nu}")
    return U


def _collect(times, X, U, Y, model_labels):
    states, inputs, outputs = model_labels
    sig = {}
    for labels, data in ((states, X), (outputs, Y), (inputs, U)):
        for i, lab in enumerate(labels):
            sig.setdefault(lab.key, data[:, i])
    return Trajectory(times, sig)


def simulate_linear(model: LabeledLinearModel, input_fn: Callable | None, x0=None,
                    grid: TimeGrid | None = None) -> Trajectory:
    """Exact simulation with inputs held constant over each grid interval.

    The trajectory holds the states, then outputs and inputs whose keys are
    not already present.
    """
    if grid is None:
        raise InvalidParams("a time grid is required")
    times = grid.times
    nx, nu = model.n_states, model.n_inputs
    U = _input_matrix(input_fn or (lambda t: np.zeros(nu)), times, nu)
    x = np.zeros(nx) if x0 is None else np.asarray(x0, float).reshape(nx)
    X = np.empty((times.size, nx))
    if nx:
        Ad, Bd = discretize(model.A, model.B, grid.dt)
        for k in range(times.size):
            X[k] = x
            x = Ad @ x + Bd @ U[k]
    Y = X @ model.C.T + U @ model.D.T
    return _collect(times, X, U, Y, (model.state_labels, model.input_labels, model.output_labels))


def _rk4_run(rhs, input_fn, x0, times, sub, scale):
    X = np.empty((times.size, x0.size))
    x = x0.copy()
    X[0] = x
    for k in range(times.size - 1):
        t, h = times[k], (times[k + 1] - times[k]) / sub
        for _ in range(sub):
            try:
                k1 = rhs(x, input_fn(t))
                k2 = rhs(x + h / 2 * k1, input_fn(t + h / 2))
                k3 = rhs(x + h / 2 * k2, input_fn(t + h / 2))
                k4 = rhs(x + h * k3, input_fn(t + h))
            except NonPhysicalState as exc:
                raise NonPhysicalState(str(exc), t) from exc
            dx = h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(dx)):
                return None
            if np.max(np.abs(dx)) > 0.1 * max(np.max(np.abs(x)), scale):
                return None
            x = x + dx
            t = t + h
        X[k + 1] = x
    return X


def simulate_nonlinear(system, input_fn: Callable, x0, grid: TimeGrid, method: str = "RK4",
                       state_scale: float | None = None, max_refinements: int = 4) -> Trajectory:
    """RK4 integration of ``system.rhs`` (or a bare ``rhs(x, u)``) on ``grid``.

    A step that changes the state by more than 10 % of
    ``max(|x|_inf, state_scale)`` restarts the run with half the step, up to
    ``max_refinements`` times.  Samples are reported on the original grid
    and ``meta["substeps"]`` records the substeps used per grid interval.
    """
    if method.upper() != "RK4":
        raise InvalidParams(f"unsupported method {method!r}")
    rhs = getattr(system, "rhs", system)
    f = (lambda x, u: np.asarray(rhs(x, u), float))
    x0 = np.asarray(x0, float)
    scale = state_scale if state_scale is not None else max(np.max(np.abs(x0), initial=0.0), 1.0)
    times = grid.times
    X = None
    for r in range(max_refinements + 1):
        sub = 2**r
        X = _rk4_run(f, input_fn, x0, times, sub, scale)
        if X is not None:
            break
    if X is None:
        raise StepLimit(f"step change stayed above 10% after {max_refinements} refinements")
    U = np.array([np.asarray(input_fn(t), float).reshape(-1) for t in times])
    labels = getattr(system, "state_labels", None)
    if labels is None:
        sig = {f"x{i}": X[:, i] for i in range(X.shape[1])}
        sig.update({f"u{i}": U[:, i] for i in range(U.shape[1])})
        return Trajectory(times, sig, {"substeps": sub})
    Y = np.array([np.asarray(system.output(x, u), float) for x, u in zip(X, U)]).reshape(times.size, -1)
    traj = _collect(times, X, U, Y, (system.state_labels, system.input_labels, system.output_labels))
    traj.meta["substeps"] = sub
    return traj


@dataclass
class SweepTable:
    """Complex gains ``gains[f, output, input]`` at angular frequencies ``omega`` [rad/s]."""

    omega: np.ndarray
    gains: np.ndarray
    input_keys: list
    output_keys: list
    skipped: list = field(default_factory=list)

    def gain(self, output: str, input: str) -> np.ndarray:
        return self.gains[:, self.output_keys.index(output), self.input_keys.index(input)]

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["omega_rad_s"]
        for o in self.output_keys:
            for i in self.input_keys:
                cols += [f"{o}/{i}:re", f"{o}/{i}:im"]
        w.writerow(cols)
        for k, om in enumerate(self.omega):
            row = ["%.17g" % om]
            for a in range(len(self.output_keys)):
                for b in range(len(self.input_keys)):
                    g = self.gains[k, a, b]
                    row += ["%.17g" % g.real, "%.17g" % g.imag]
            w.writerow(row)
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text


def frequency_sweep(model: LabeledLinearModel, frequencies: Sequence[float]) -> SweepTable:
    """Transfer matrix at ``s = j omega`` for each angular frequency.

    Points where ``j omega I - A`` is singular are filled with NaN and
    listed in ``skipped``.
    """
    omega = np.asarray(frequencies, float)
    gains = np.full((omega.size, model.n_outputs, model.n_inputs), np.nan + 0j)
    skipped = []
    for k, om in enumerate(omega):
        try:
            gains[k] = frequency_response(model, 1j * om)
        except SingularResolvent:
            skipped.append(float(om))
    return SweepTable(omega, gains, [lab.key for lab in model.input_labels],
                      [lab.key for lab in model.output_labels], skipped)
