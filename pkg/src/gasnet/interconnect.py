"""Interconnection of labeled component models.

Components are stacked block-diagonally into ``dx/dt = A x + B w``,
``y = C x + D w``.  Connections and external signals enter through
``w = F y + G u`` and ``z = H x + J u``, and the loop is closed in
state-space form.

Connections may be stated as port pairs (a p-port joined to a q-port,
binding both of their signals) or as raw signal bindings
``output -> input`` for blocks without ports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (AlgebraicLoop, AmbiguousSignal, ConnectionRuleError, DuplicateId,
                     UnknownSignal, UnresolvedSignal)
from .model import (INPUT, OUTPUT, STATE, LabeledLinearModel, Port, SignalLabel,
                    is_singular)

STATE_PATH = "state"
INPUT_PATH = "input"
OUTPUT_PATH = "output"


@dataclass(frozen=True)
class ConnectionSpec:
    """Internal bindings plus external sources ``u`` and sinks ``z``.

    ``pairs`` holds ``(p-port key, q-port key)`` tuples such as
    ``("pipe2.l", "pipe1.r")``.  ``bindings`` holds ``(output key, input
    key)`` tuples.  ``inputs`` lists input-signal keys fed from outside and
    ``outputs`` lists state, input or output keys exposed to the outside.
    """

    pairs: tuple = ()
    bindings: tuple = ()
    inputs: tuple = ()
    outputs: tuple = ()

    def __post_init__(self):
        for name in ("pairs", "bindings", "inputs", "outputs"):
            value = getattr(self, name)
            if name in ("pairs", "bindings"):
                value = tuple(tuple(v) for v in value)
            object.__setattr__(self, name, tuple(value))

    def signal_bindings(self, ports: dict) -> list[tuple[str, str]]:
        """All ``(output key, input key)`` bindings, port pairs expanded."""
        out = []
        for a, b in self.pairs:
            pa, pb = ports[a], ports[b]
            p, q = (pa, pb) if pa.kind == "p" else (pb, pa)
            out.append((f"{q.owner}.{q.pressure}", f"{p.owner}.{p.pressure}"))
            out.append((f"{p.owner}.{p.flow}", f"{q.owner}.{q.flow}"))
        out.extend(self.bindings)
        return out


@dataclass(frozen=True)
class ConnectionMatrices:
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    J: np.ndarray
    sink_paths: tuple = field(default=())

    @property
    def uses_outputs(self) -> bool:
        return any(kind == OUTPUT_PATH for kind, _ in self.sink_paths)


def _all_ports(models) -> dict:
    ports = {}
    for m in models:
        for p in m.ports:
            ports[p.key] = p
    return ports


def _labels(models, attr):
    return {lab.key: lab for m in models for lab in getattr(m, attr)}


def validate_ports(components: Sequence[LabeledLinearModel], spec: ConnectionSpec) -> list[str]:
    """Rule violations of ``spec`` for ``components``; empty when admissible.

    Algebraic loops are only detected when the loop is closed.
    """
    problems = []
    ports = _all_ports(components)
    inputs = _labels(components, "input_labels")
    outputs = _labels(components, "output_labels")
    states = _labels(components, "state_labels")

    used = {}
    valid_pairs = []
    for a, b in spec.pairs:
        missing = [k for k in (a, b) if k not in ports]
        if missing:
            problems.append(f"unknown port {', '.join(missing)} in connection {a} <-> {b}")
            continue
        kinds = {ports[a].kind, ports[b].kind}
        if kinds == {"p"}:
            problems.append(f"Rule I.i: {a} and {b} are both p-ports")
            continue
        if kinds == {"q"}:
            problems.append(f"Rule I.i: {a} and {b} are both q-ports")
            continue
        for k in (a, b):
            if k in used:
                problems.append(f"Rule I: port {k} appears in more than one connection")
            used[k] = (a, b)
        valid_pairs.append((a, b))

    bound_inputs = {}
    consumed_outputs = set()
    pair_spec = ConnectionSpec(pairs=valid_pairs)
    for src, dst in pair_spec.signal_bindings(ports) + list(spec.bindings):
        if src not in outputs:
            problems.append(f"binding {src} -> {dst}: {src} is not an output signal")
            continue
        if dst not in inputs:
            problems.append(f"binding {src} -> {dst}: {dst} is not an input signal")
            continue
        if outputs[src].kind != inputs[dst].kind:
            problems.append(f"Rule II: {src} ({outputs[src].kind}) cannot drive "
                            f"{dst} ({inputs[dst].kind})")
        if dst in bound_inputs:
            problems.append(f"input {dst} is driven by both {bound_inputs[dst]} and {src}")
        bound_inputs[dst] = src
        consumed_outputs.add(src)

    for key in spec.inputs:
        if key not in inputs:
            problems.append(f"external input {key} is not an input signal")
        elif key in bound_inputs:
            problems.append(f"input {key} is both connected internally and fed externally")
    for key in spec.outputs:
        if key not in inputs and key not in outputs and key not in states:
            problems.append(f"external output {key} is not a signal of the network")

    ext_in, ext_out = set(spec.inputs), set(spec.outputs)
    for key, port in ports.items():
        if key in used:
            continue
        i_key = f"{port.owner}.{port.input_signal}"
        o_key = f"{port.owner}.{port.output_signal}"
        has_in = i_key in bound_inputs or i_key in ext_in
        has_out = o_key in consumed_outputs or o_key in ext_out
        if has_in and has_out:
            continue
        if has_in or has_out:
            which, other = (i_key, o_key) if has_in else (o_key, i_key)
            problems.append(f"Rule III: port {key} has {which} connected but not {other}")
        else:
            problems.append(f"Rule IV: port {key} is not connected")
    return problems


def stack(models: Sequence[LabeledLinearModel]) -> LabeledLinearModel:
    """Block-diagonal aggregate of ``models`` in the given order."""
    seen = set()
    for m in models:
        for owner in m.owners:
            if owner in seen:
                raise DuplicateId(f"component id {owner!r} occurs more than once")
        seen.update(m.owners)
    if len(models) == 1:
        return models[0]

    def block(attr):
        mats = [getattr(m, attr) for m in models]
        return scipy.linalg.block_diag(*mats) if mats else np.zeros((0, 0))

    nominal, ports = {}, []
    for m in models:
        nominal.update(m.nominal)
        ports.extend(m.ports)
    nx = sum(m.n_states for m in models)
    nu = sum(m.n_inputs for m in models)
    ny = sum(m.n_outputs for m in models)
    A = block("A").reshape(nx, nx)
    B = block("B").reshape(nx, nu)
    C = block("C").reshape(ny, nx)
    D = block("D").reshape(ny, nu)
    return LabeledLinearModel(
        A, B, C, D,
        sum((m.state_labels for m in models), ()),
        sum((m.input_labels for m in models), ()),
        sum((m.output_labels for m in models), ()),
        nominal, ports,
    )


def _state_alias(stacked: LabeledLinearModel, j: int):
    """Index of the state that output ``j`` reproduces exactly, or None."""
    c, d = stacked.C[j], stacked.D[j]
    if np.any(d != 0):
        return None
    nz = np.flatnonzero(c)
    if nz.size == 1 and c[nz[0]] == 1.0:
        return int(nz[0])
    return None


def build_connection_matrices(spec: ConnectionSpec, stacked: LabeledLinearModel) -> ConnectionMatrices:
    """0-1 matrices ``F, G, H, J`` for ``spec`` over the stacked model.

    Sinks are taken from the states (``H``) or the external inputs
    (``J``) when possible; any other sink is exposed through the closed
    output equation and recorded as such in ``sink_paths``.
    """
    ports = {p.key: p for p in stacked.ports}
    w_index = {lab.key: i for i, lab in enumerate(stacked.input_labels)}
    y_index = {lab.key: i for i, lab in enumerate(stacked.output_labels)}
    x_index = {lab.key: i for i, lab in enumerate(stacked.state_labels)}
    u_index = {k: i for i, k in enumerate(spec.inputs)}
    nw, ny, nx, nu = stacked.n_inputs, stacked.n_outputs, stacked.n_states, len(spec.inputs)

    for a, b in spec.pairs:
        for k in (a, b):
            if k not in ports:
                raise UnknownSignal(f"unknown port {k}")

    F = np.zeros((nw, ny))
    G = np.zeros((nw, nu))
    for src, dst in spec.signal_bindings(ports):
        if src not in y_index:
            raise UnknownSignal(f"{src} is not an output signal")
        if dst not in w_index:
            raise UnknownSignal(f"{dst} is not an input signal")
        F[w_index[dst], y_index[src]] = 1.0
    for k, key in enumerate(spec.inputs):
        if key not in w_index:
            raise UnknownSignal(f"external input {key} is not an input signal")
        G[w_index[key], k] = 1.0
    sources = (F != 0).sum(axis=1) + (G != 0).sum(axis=1)
    if np.any(sources == 0):
        names = [stacked.input_labels[i].key for i in np.flatnonzero(sources == 0)]
        raise UnresolvedSignal(f"no source for input(s) {', '.join(names)}")
    if np.any(sources > 1):
        names = [stacked.input_labels[i].key for i in np.flatnonzero(sources > 1)]
        raise UnresolvedSignal(f"more than one source for input(s) {', '.join(names)}")

    H = np.zeros((len(spec.outputs), nx))
    J = np.zeros((len(spec.outputs), nu))
    paths = []
    for r, key in enumerate(spec.outputs):
        if key in x_index:
            H[r, x_index[key]] = 1.0
            paths.append((STATE_PATH, x_index[key]))
        elif key in u_index:
            J[r, u_index[key]] = 1.0
            paths.append((INPUT_PATH, u_index[key]))
        elif key in y_index:
            alias = _state_alias(stacked, y_index[key])
            if alias is not None:
                H[r, alias] = 1.0
                paths.append((STATE_PATH, alias))
            else:
                paths.append((OUTPUT_PATH, y_index[key]))
        elif key in w_index:
            # an internally driven input: equals the output that drives it
            j = int(np.flatnonzero(F[w_index[key]])[0])
            paths.append((OUTPUT_PATH, j))
        else:
            raise UnknownSignal(f"external output {key} is not a signal of the network")
    return ConnectionMatrices(F, G, H, J, tuple(paths))


def _external_labels(stacked: LabeledLinearModel, spec: ConnectionSpec):
    labels = {}
    for lab in stacked.state_labels + stacked.input_labels + stacked.output_labels:
        labels.setdefault(lab.key, lab)
    u = tuple(SignalLabel(labels[k].owner, labels[k].name, labels[k].kind, INPUT)
              for k in spec.inputs)
    z = tuple(SignalLabel(labels[k].owner, labels[k].name, labels[k].kind, OUTPUT)
              for k in spec.outputs)
    return u, z


def close_interconnection(stacked: LabeledLinearModel, m: ConnectionMatrices,
                          spec: ConnectionSpec | None = None) -> LabeledLinearModel:
    """Closed realization with input ``u`` and output ``z``.

    ``A + B F (I - D F)^{-1} C`` and friends; raises :class:`AlgebraicLoop`
    when ``I - D F`` is singular.  ``spec`` supplies the external labels
    and ports; without it generic labels ``ext.u{i}`` / ``ext.z{i}`` are used.
    """
    A, B, C, D = stacked.A, stacked.B, stacked.C, stacked.D
    F, G, H, J = m.F, m.G, m.H, m.J
    ny = C.shape[0]
    M = np.eye(ny) - D @ F
    if ny and is_singular(M):
        raise AlgebraicLoop("I - DF is singular: the static couplings form an algebraic loop")
    lu = scipy.linalg.lu_factor(M) if ny else None

    def solve(X):
        return scipy.linalg.lu_solve(lu, X) if ny else X

    MC = solve(C)
    MDG = solve(D @ G)
    Abar = A + B @ F @ MC
    Bbar = B @ (G + F @ MDG)
    Cbar, Dbar = MC, MDG

    nz = H.shape[0]
    Cz, Dz = np.array(H, float), np.array(J, float)
    for r, (kind, idx) in enumerate(m.sink_paths):
        if kind == OUTPUT_PATH:
            Cz[r], Dz[r] = Cbar[idx], Dbar[idx]

    if spec is not None:
        u_labels, z_labels = _external_labels(stacked, spec)
        used = {k for pair in spec.pairs for k in pair}
        ports = tuple(p for p in stacked.ports if p.key not in used)
    else:
        u_labels = tuple(SignalLabel("ext", f"u{i}", "pressure", INPUT) for i in range(G.shape[1]))
        z_labels = tuple(SignalLabel("ext", f"z{i}", "pressure", OUTPUT) for i in range(nz))
        ports = ()
    return LabeledLinearModel(Abar, Bbar, Cz, Dz, stacked.state_labels, u_labels, z_labels,
                              stacked.nominal, ports)


def interconnect(models: Sequence[LabeledLinearModel], spec: ConnectionSpec,
                 check: bool = True) -> LabeledLinearModel:
    """Stack, validate, build the connection matrices and close the loop."""
    if check:
        problems = validate_ports(models, spec)
        if problems:
            raise ConnectionRuleError("; ".join(problems), _rule_of(problems[0]))
    stacked = stack(models)
    return close_interconnection(stacked, build_connection_matrices(spec, stacked), spec)


def _rule_of(message: str):
    if message.startswith("Rule "):
        return message[5:].split(":", 1)[0]
    return None


def _resolve(name: str, labels: dict, what: str) -> SignalLabel:
    if name in labels:
        return labels[name]
    hits = [lab for key, lab in labels.items() if key.endswith("." + name) or lab.name == name]
    if not hits:
        raise UnknownSignal(f"no {what} signal named {name!r}")
    if len(hits) > 1:
        raise AmbiguousSignal(f"{what} name {name!r} matches {', '.join(h.key for h in hits)}")
    return hits[0]


def connect_by_name(models: Sequence[LabeledLinearModel], bindings: Sequence[tuple[str, str]],
                    inputs: Sequence[str], outputs: Sequence[str]) -> LabeledLinearModel:
    """Interconnect ``models`` from named ``(output, input)`` bindings.

    Names are ``"component.signal"`` keys; a bare signal name is accepted when
    it is unique across all models.  The bindings are compiled to a
    :class:`ConnectionSpec` and closed with the matrix method.
    """
    out_labels = _labels(models, "output_labels")
    in_labels = _labels(models, "input_labels")
    any_labels = {**_labels(models, "state_labels"), **in_labels, **out_labels}
    resolved = []
    for src, dst in bindings:
        o = _resolve(src, out_labels, "output")
        i = _resolve(dst, in_labels, "input")
        if o.kind != i.kind:
            raise ConnectionRuleError(
                f"Rule II: {o.key} ({o.kind}) cannot drive {i.key} ({i.kind})", "II")
        resolved.append((o.key, i.key))
    spec = ConnectionSpec(
        bindings=tuple(resolved),
        inputs=tuple(_resolve(n, in_labels, "input").key for n in inputs),
        outputs=tuple(_resolve(n, any_labels, "output").key for n in outputs),
    )
    return interconnect(models, spec)


def relabel(model: LabeledLinearModel, owner: str, states: Sequence[str], inputs: Sequence[str],
            outputs: Sequence[str], ports: Sequence[Port] = (), nominal: dict | None = None) -> LabeledLinearModel:
    """Same realization with every signal renamed to ``owner.<name>``."""

    def rename(labels, names, direction):
        if len(names) != len(labels):
            raise ValueError(f"expected {len(labels)} {direction} names, got {len(names)}")
        return tuple(SignalLabel(owner, n, lab.kind, direction) for lab, n in zip(labels, names))

    old_nominal = dict(model.nominal)
    new_nominal = dict(nominal or {})
    if nominal is None:
        for labels, names in ((model.state_labels, states), (model.input_labels, inputs),
                              (model.output_labels, outputs)):
            for lab, n in zip(labels, names):
                if lab.key in old_nominal:
                    new_nominal[f"{owner}.{n}"] = old_nominal[lab.key]
    return LabeledLinearModel(
        model.A, model.B, model.C, model.D,
        rename(model.state_labels, states, STATE), rename(model.input_labels, inputs, INPUT),
        rename(model.output_labels, outputs, OUTPUT), new_nominal, tuple(ports),
    )
