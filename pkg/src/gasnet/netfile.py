"""Declarative network files: parsing, serialization and model construction.

A network file is YAML with the top-level keys ``gas``, ``components``,
``connections``, ``externals`` and ``analyses``.  All quantities are SI;
a value may be written as a bare number or as ``"<number> <unit>"`` with
the SI unit of that parameter.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import components as comp
from .errors import ParseError, UnitError, UnknownComponentType, UnknownSignal
from .interconnect import ConnectionSpec
from .model import GasProperties, LabeledLinearModel

NETWORK_DIR = Path(__file__).with_name("networks")

# ----------------------------------------------------------------- units

_SI = {
    "m": {"m"},
    "m2": {"m2", "m^2", "m²"},
    "m3": {"m3", "m^3", "m³"},
    "Pa": {"Pa"},
    "kg/s": {"kg/s"},
    "K": {"K"},
    "s": {"s"},
    "rad/s": {"rad/s", "1/s"},
    "J/(kg K)": {"J/(kg K)", "J/(kg*K)", "J/kg/K", "m2/(s2 K)", "m^2/(s^2 K)"},
    "m/s2": {"m/s2", "m/s^2"},
    "W/(m2 K)": {"W/(m2 K)", "W/(m^2 K)", "W/m2/K"},
    "Pa s2": {"Pa s2", "Pa s^2"},
    "Pa s2/kg2": {"Pa s2/kg2", "Pa s^2/kg^2"},
    "1": {"", "1", "-"},
}

#: SI unit of every numeric parameter name used in network files
PARAM_UNITS = {
    "R_s": "J/(kg K)", "T_0": "K", "z_0": "1", "c_p": "J/(kg K)", "c_v": "J/(kg K)", "g": "m/s2",
    "A": "m2", "D": "m", "X": "m", "lambda": "1", "h": "m", "p_left": "Pa", "q": "kg/s",
    "p_right": "Pa", "k_v": "1", "k_c": "1", "k": "1", "C_d": "1", "D0": "m", "D1": "m",
    "A_o_max": "m2", "tau": "s", "A_o": "m2", "V": "m3", "p": "Pa", "T": "K",
    "n_inlets": "1", "n_outlets": "1", "V_p": "m3", "A_2": "m2", "L_2": "m", "eta": "1",
    "omega": "rad/s", "p1": "Pa", "T1": "K", "c0": "Pa s2", "c1": "Pa s2/kg2",
    "q_max": "kg/s", "omega_max": "rad/s", "k_rad": "W/(m2 K)", "D_o": "m", "T_amb": "K",
    "T_left": "K", "p_inlet": "Pa", "entrance_area": "m2",
    "t0": "s", "t1": "s", "dt": "s", "start": "rad/s", "stop": "rad/s", "points": "1",
}

_NUM_UNIT = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


# --------------------------------------------------------- line tracking

class _Map(dict):
    line = 0
    key_lines: dict = {}


class _Seq(list):
    line = 0
    item_lines: list = []


class _Loader(yaml.SafeLoader):
    pass


def _construct_map(loader, node):
    loader.flatten_mapping(node)
    m = _Map()
    m.line = node.start_mark.line + 1
    m.key_lines = {}
    for k_node, v_node in node.value:
        key = loader.construct_object(k_node, deep=True)
        if key in m:
            raise ParseError(f"line {k_node.start_mark.line + 1}: duplicate key {key!r}")
        m[key] = loader.construct_object(v_node, deep=True)
        m.key_lines[key] = k_node.start_mark.line + 1
    return m


def _construct_seq(loader, node):
    s = _Seq(loader.construct_object(n, deep=True) for n in node.value)
    s.line = node.start_mark.line + 1
    s.item_lines = [n.start_mark.line + 1 for n in node.value]
    return s


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_map)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_seq)


def _line(obj, key=None, default=0):
    if key is not None and isinstance(obj, _Map):
        return obj.key_lines.get(key, obj.line)
    return getattr(obj, "line", default)


def _err(where: str, line: int, msg: str, cls=ParseError):
    return cls(f"{where}:{line}: {msg}" if line else f"{where}: {msg}")


# ----------------------------------------------------------- data types

@dataclass(frozen=True)
class ComponentSpec:
    id: str
    type: str
    parameters: dict
    nominal: dict = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Connection:
    """``kind`` is ``"signal"`` (``a -> b``) or ``"port"`` (``a <-> b``)."""

    kind: str
    source: str
    target: str
    line: int = field(default=0, compare=False)

    def text(self) -> str:
        arrow = "->" if self.kind == "signal" else "<->"
        return f"{self.source} {arrow} {self.target}"


@dataclass(frozen=True)
class Analysis:
    kind: str
    options: dict = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class NetworkFile:
    gas: dict
    components: tuple
    connections: tuple
    inputs: tuple
    outputs: tuple
    analyses: tuple = ()
    name: str = field(default="network", compare=False)
    source: str = field(default="<memory>", compare=False)

    def component(self, cid: str) -> ComponentSpec:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            return v

        comps = []
        for c in self.components:
            d = {"id": c.id, "type": c.type, "parameters": clean(c.parameters)}
            if c.nominal:
                d["nominal"] = clean(c.nominal)
            comps.append(d)
        analyses = []
        for a in self.analyses:
            analyses.append({a.kind: clean(a.options)} if a.options else a.kind)
        return {
            "gas": clean(self.gas),
            "components": comps,
            "connections": [c.text() for c in self.connections],
            "externals": {"inputs": list(self.inputs), "outputs": list(self.outputs)},
            "analyses": analyses,
        }


def serialize_network(net: NetworkFile) -> str:
    return yaml.safe_dump(net.to_dict(), sort_keys=False, default_flow_style=None, width=100)


# -------------------------------------------------------------- values

def to_si(value: Any, param: str, where: str = "", line: int = 0) -> float:
    """Numeric value of ``value`` for parameter ``param``, rejecting non-SI units."""
    if isinstance(value, bool):
        raise _err(where, line, f"{param}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise _err(where, line, f"{param}: expected a number, got {value!r}")
    m = _NUM_UNIT.match(value)
    if not m:
        raise _err(where, line, f"{param}: cannot read {value!r} as a number")
    number, unit = float(m.group(1)), m.group(2)
    si = PARAM_UNITS.get(param)
    allowed = _SI.get(si, set()) if si else set()
    if unit and unit not in allowed:
        if si is None:
            expect = "write it as a plain number in SI units"
        elif si == "1":
            expect = "it is dimensionless"
        else:
            expect = f"give it in {si}"
        raise _err(where, line, f"{param}: unit {unit!r} is not SI; {expect}", UnitError)
    return number


def resolve_path(path: str | Path) -> Path:
    """File path, accepting a missing ``.yaml`` suffix or the name of a shipped network."""
    p = Path(path)
    for cand in (p, p.with_name(p.name + ".yaml"), p.with_name(p.name + ".yml")):
        if cand.is_file():
            return cand
    shipped = NETWORK_DIR / f"{p.stem}.yaml"
    if shipped.is_file():
        return shipped
    raise ParseError(f"{path}: no such network file")


# ------------------------------------------------------------- parsing

_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_SIGNAL = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)$")
_ANALYSES = ("mass_check", "dcgain", "freqsweep", "simulate")


def _need(d, key, where, what):
    if not isinstance(d, dict) or key not in d:
        raise _err(where, _line(d), f"{what} is missing {key!r}")
    return d[key]


def _numbers(d, where, allowed=None, what="block"):
    if not isinstance(d, dict):
        raise _err(where, _line(d), f"{what} must be a mapping")
    out = {}
    for k, v in d.items():
        if allowed is not None and k not in allowed:
            raise _err(where, _line(d, k), f"{what}: unknown key {k!r}; "
                       f"expected one of {', '.join(sorted(allowed))}")
        if isinstance(v, (dict, list)):
            out[k] = v
        else:
            out[k] = to_si(v, k, where, _line(d, k))
    return out


def _signal(text, where, line, ids):
    if not isinstance(text, str):
        raise _err(where, line, f"expected a signal name, got {text!r}")
    m = _SIGNAL.match(text.strip())
    if not m:
        raise _err(where, line, f"{text!r} is not of the form component.signal")
    if m.group(1) not in ids:
        raise _err(where, line, f"{text!r} refers to undeclared component {m.group(1)!r}", UnknownSignal)
    return text.strip()


def _pipe_block(d, where, what):
    allowed = {"A", "D", "X", "lambda", "h", "p_left", "q"}
    vals = _numbers(d, where, allowed, what)
    for k in ("X", "p_left", "q"):
        _need(vals, k, where, what)
    if "A" not in vals and "D" not in vals:
        raise _err(where, _line(d), f"{what} needs D (and optionally A)")
    return vals


def _check_component(c: ComponentSpec, where: str, raw):
    t = c.type
    p = c.parameters
    if t == "pipe":
        _pipe_block({**p, **c.nominal}, where, f"component {c.id!r}")
    elif t in ("branch", "joint", "star_junction"):
        keys = {"branch": ("trunk", "branches"), "joint": ("inflows", "outflow"),
                "star_junction": ("inflows", "outflows")}[t]
        for k in keys:
            v = _need(p, k, where, f"component {c.id!r}")
            items = v if isinstance(v, list) else [v]
            for item in items:
                _pipe_block(item, where, f"component {c.id!r} {k}")
    elif t not in COMPONENT_TYPES:
        raise _err(where, raw.line if hasattr(raw, "line") else 0,
                   f"component {c.id!r}: unknown type {t!r}; known types: "
                   f"{', '.join(sorted(COMPONENT_TYPES))}", UnknownComponentType)


def _convert_nested(v, where, line, name="value"):
    if isinstance(v, dict):
        return {k: _convert_nested(x, where, _line(v, k), k) for k, x in v.items()}
    if isinstance(v, list):
        return [_convert_nested(x, where, line, name) for x in v]
    if isinstance(v, str) and name in ("type", "input", "output", "kind"):
        return v
    return to_si(v, name, where, line)


def parse_text(text: str, source: str = "<memory>") -> NetworkFile:
    where = source
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise _err(where, mark.line + 1 if mark else 0, f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise _err(where, 0, "the file must contain a mapping at top level")
    unknown = set(doc) - {"gas", "components", "connections", "externals", "analyses", "name"}
    if unknown:
        k = sorted(unknown)[0]
        raise _err(where, _line(doc, k), f"unknown top-level key {k!r}")

    gas_raw = _need(doc, "gas", where, "network")
    gas = _numbers(gas_raw, where, {"R_s", "T_0", "z_0", "c_p", "c_v", "g", "mu"}, "gas")
    for k in ("R_s", "T_0", "z_0", "c_p", "c_v"):
        _need(gas, k, where, "gas")

    comps_raw = _need(doc, "components", where, "network")
    if not isinstance(comps_raw, list) or not comps_raw:
        raise _err(where, _line(doc, "components"), "components must be a nonempty list")
    comps, ids = [], set()
    for i, raw in enumerate(comps_raw):
        line = _line(raw) or comps_raw.item_lines[i]
        if not isinstance(raw, dict):
            raise _err(where, line, "each component must be a mapping")
        extra = set(raw) - {"id", "type", "parameters", "nominal"}
        if extra:
            raise _err(where, _line(raw, sorted(extra)[0]), f"unknown component key {sorted(extra)[0]!r}")
        cid = _need(raw, "id", where, "component")
        if not isinstance(cid, str) or not _ID.match(cid):
            raise _err(where, _line(raw, "id"), f"invalid component id {cid!r}")
        if cid in ids:
            raise _err(where, _line(raw, "id"), f"duplicate component id {cid!r}")
        ids.add(cid)
        ctype = _need(raw, "type", where, f"component {cid!r}")
        params = _convert_nested(raw.get("parameters") or _Map(), where, _line(raw, "parameters"))
        nominal = _convert_nested(raw.get("nominal") or _Map(), where, _line(raw, "nominal"))
        spec = ComponentSpec(cid, ctype, params, nominal, line)
        _check_component(spec, where, raw)
        comps.append(spec)

    conns = []
    conn_raw = doc.get("connections") or _Seq()
    for i, item in enumerate(conn_raw):
        line = conn_raw.item_lines[i] if isinstance(conn_raw, _Seq) else 0
        if not isinstance(item, str):
            raise _err(where, line, f"connection must be a string like 'a.p_r -> b.p_l', got {item!r}")
        if "<->" in item:
            a, b = (s.strip() for s in item.split("<->", 1))
            conns.append(Connection("port", _signal(a, where, line, ids), _signal(b, where, line, ids), line))
        elif "->" in item:
            a, b = (s.strip() for s in item.split("->", 1))
            conns.append(Connection("signal", _signal(a, where, line, ids), _signal(b, where, line, ids), line))
        else:
            raise _err(where, line, f"connection {item!r} needs '->' (signals) or '<->' (ports)")

    ext = doc.get("externals") or _Map()
    ins = tuple(_signal(s, where, _line(ext, "inputs"), ids) for s in (ext.get("inputs") or []))
    outs = tuple(_signal(s, where, _line(ext, "outputs"), ids) for s in (ext.get("outputs") or []))

    analyses = []
    an_raw = doc.get("analyses") or _Seq()
    for i, item in enumerate(an_raw):
        line = an_raw.item_lines[i] if isinstance(an_raw, _Seq) else 0
        if isinstance(item, str):
            kind, opts = item, {}
        elif isinstance(item, dict) and len(item) == 1:
            kind, opts = next(iter(item.items()))
            opts = opts or {}
        else:
            raise _err(where, line, "an analysis is a name or a single-key mapping")
        if kind not in _ANALYSES:
            raise _err(where, line, f"unknown analysis {kind!r}; expected one of {', '.join(_ANALYSES)}")
        analyses.append(Analysis(kind, _parse_analysis(kind, opts, where, line, ids), line))

    name = doc.get("name") or Path(source).stem
    return NetworkFile(dict(gas), tuple(comps), tuple(conns), ins, outs, tuple(analyses),
                       str(name), source)


def _parse_analysis(kind, opts, where, line, ids):
    if kind in ("mass_check", "dcgain"):
        return {}
    if kind == "freqsweep":
        if "frequencies" in opts:
            freqs = [to_si(f, "omega", where, line) for f in opts["frequencies"]]
            if not freqs:
                raise _err(where, line, "freqsweep needs at least one frequency")
            return {"frequencies": freqs}
        vals = _numbers(opts, where, {"start", "stop", "points"}, "freqsweep")
        for k in ("start", "stop", "points"):
            _need(vals, k, where, "freqsweep")
        if not 0 < vals["start"] < vals["stop"] or vals["points"] < 2:
            raise _err(where, line, "freqsweep needs 0 < start < stop and points >= 2")
        return {"start": vals["start"], "stop": vals["stop"], "points": int(vals["points"])}
    # simulate
    allowed = {"t0", "t1", "dt", "inputs", "x0", "name"}
    extra = set(opts) - allowed
    if extra:
        raise _err(where, _line(opts, sorted(extra)[0]), f"simulate: unknown key {sorted(extra)[0]!r}")
    out = {}
    for k in ("t0", "t1", "dt"):
        out[k] = to_si(_need(opts, k, where, "simulate"), k, where, _line(opts, k))
    tables = {}
    for sig, table in (opts.get("inputs") or {}).items():
        _signal(sig, where, _line(opts["inputs"], sig), ids)
        rows = []
        for row in table:
            if not isinstance(row, list) or len(row) != 2:
                raise _err(where, _line(opts["inputs"], sig), f"input table for {sig} needs [time, value] pairs")
            rows.append([to_si(row[0], "t0", where, line), float(to_si(row[1], "value", where, line))])
        if any(b[0] < a[0] for a, b in zip(rows, rows[1:])):
            raise _err(where, _line(opts["inputs"], sig), f"input table for {sig} must be sorted by time")
        tables[sig] = rows
    out["inputs"] = tables
    if "x0" in opts:
        out["x0"] = {k: float(to_si(v, "value", where, line)) for k, v in opts["x0"].items()}
    if "name" in opts:
        out["name"] = str(opts["name"])
    return out


def parse_network(path) -> NetworkFile:
    p = resolve_path(path)
    return parse_text(p.read_text(), str(p))


# -------------------------------------------------------------- building

def _pipe(d, gas) -> comp.PipeParams:
    if "A" in d:
        return comp.PipeParams(d["A"], d["X"], d.get("D", math.sqrt(4 * d["A"] / math.pi)),
                               d.get("lambda", 0.0), d.get("h", 0.0), gas, d["p_left"], d["q"])
    return comp.PipeParams.from_diameter(d["D"], d["X"], d.get("lambda", 0.0), gas, d["p_left"],
                                         d["q"], d.get("h", 0.0))


def _orifice(d, gas) -> comp.OrificeParams:
    return comp.OrificeParams(d["C_d"], d["D0"], d["D1"], gas, d["A_o_max"], d.get("tau", 1.0))


def _build_pipe(c, gas):
    return comp.single_pipe(_pipe({**c.parameters, **c.nominal}, gas), c.id)


def _build_branch(c, gas):
    p = c.parameters
    return comp.branch(_pipe(p["trunk"], gas), [_pipe(b, gas) for b in p["branches"]], c.id)


def _build_joint(c, gas):
    p = c.parameters
    return comp.joint([_pipe(b, gas) for b in p["inflows"]], _pipe(p["outflow"], gas), c.id)


def _build_star(c, gas):
    p = c.parameters
    return comp.star_junction([_pipe(b, gas) for b in p["inflows"]],
                              [_pipe(b, gas) for b in p["outflows"]], c.id)


def _build_static_valve(c, gas):
    return comp.static_valve(c.parameters["k_v"], c.id)


def _build_static_compressor(c, gas):
    return comp.static_compressor(c.parameters["k_c"], c.id)


def _build_static_gain(c, gas):
    p = c.parameters
    from .model import KINDS
    kind = p.get("kind", "pressure")
    if kind not in KINDS:
        raise ParseError(f"component {c.id!r}: unknown signal kind {kind!r}")
    return comp.static_gain(p["k"], c.id, (p.get("input", "p_l"), kind), (p.get("output", "p_r"), kind))


def _build_dynamic_valve(c, gas):
    n = c.nominal
    return comp.dynamic_valve(_orifice(c.parameters, gas), n["A_o"], n["p_left"], n["p_right"], c.id)


def _tank(c, gas):
    p, n = c.parameters, c.nominal
    return comp.TankParams(p["V"], gas, int(p.get("n_inlets", 1)), int(p.get("n_outlets", 1)),
                           n.get("p", 1e6), n.get("T", gas.T_0))


def _build_isothermal_tank(c, gas):
    return comp.isothermal_tank(_tank(c, gas), c.id)


def _build_nonisothermal_tank(c, gas):
    return comp.nonisothermal_tank(_tank(c, gas), c.nominal.get("q", 0.0), c.id)


def _compressor(c, gas):
    p = c.parameters
    m = p.get("map", {"type": "quadratic"})
    if m.get("type", "quadratic") != "quadratic":
        raise ParseError(f"component {c.id!r}: unknown compressor map {m.get('type')!r}")
    qmap = comp.QuadraticMap(**{k: v for k, v in m.items() if k != "type"})
    return comp.CompressorParams(p["V_p"], p["A_2"], p["L_2"], p["eta"], gas, qmap)


def _build_compressor(c, gas):
    n = c.nominal
    return comp.dynamic_compressor(_compressor(c, gas), n["q"], n["omega"], n["p1"], n["T1"], c.id)


def _hx(c, gas):
    p, n = c.parameters, c.nominal
    pipe = _pipe({**{k: p[k] for k in ("A", "D", "X", "lambda", "h") if k in p},
                  "p_left": n["p_left"], "q": n["q"]}, gas)
    return comp.HeatExchangerParams(pipe, p["k_rad"], p["D_o"], p["T_amb"], n["T_left"])


def _build_heat_exchanger(c, gas):
    return comp.heat_exchanger(_hx(c, gas), c.nominal["p_left"], c.nominal["q"], c.id)


def _build_valve_manifold(c, gas):
    p = c.parameters
    t1 = comp.TankParams(p["tank1"]["V"], gas, nominal_p=p["tank1"]["p"])
    t2 = comp.TankParams(p["tank2"]["V"], gas, nominal_p=p["tank2"]["p"])
    legs = [_pipe({**leg, "p_left": p["tank1"]["p"]}, gas) for leg in p["legs"]]
    o = [_orifice(p["orifice"], gas)] * 2
    return comp.valve_manifold(t1, t2, legs, o, p["p_inlet"], c.id, p.get("entrance_area"))


COMPONENT_TYPES = {
    "pipe": _build_pipe,
    "branch": _build_branch,
    "joint": _build_joint,
    "star_junction": _build_star,
    "static_valve": _build_static_valve,
    "static_compressor": _build_static_compressor,
    "static_gain": _build_static_gain,
    "dynamic_valve": _build_dynamic_valve,
    "isothermal_tank": _build_isothermal_tank,
    "nonisothermal_tank": _build_nonisothermal_tank,
    "compressor": _build_compressor,
    "heat_exchanger": _build_heat_exchanger,
    "valve_manifold": _build_valve_manifold,
}


def build_gas(net: NetworkFile) -> GasProperties:
    return GasProperties(**net.gas)


def build_components(net: NetworkFile) -> list[LabeledLinearModel]:
    gas = build_gas(net)
    models = []
    for c in net.components:
        try:
            models.append(COMPONENT_TYPES[c.type](c, gas))
        except KeyError as exc:
            raise _err(net.source, c.line, f"component {c.id!r}: missing parameter {exc}") from exc
        except (ValueError, TypeError) as exc:
            raise _err(net.source, c.line, f"component {c.id!r}: {exc}") from exc
    return models


def connection_spec(net: NetworkFile, models) -> ConnectionSpec:
    """Compile the file's connections; port connections become port pairs."""
    ports = {p.key: p for m in models for p in m.ports}
    pairs, bindings = [], []
    for c in net.connections:
        if c.kind == "port":
            for k in (c.source, c.target):
                if k not in ports:
                    raise _err(net.source, c.line, f"{k} is not a port", UnknownSignal)
            a, b = ports[c.source], ports[c.target]
            pairs.append((c.source, c.target) if a.kind == "p" else (c.target, c.source))
        else:
            bindings.append((c.source, c.target))
    return ConnectionSpec(pairs=tuple(pairs), bindings=tuple(bindings),
                          inputs=net.inputs, outputs=net.outputs)


def frequencies_of(options: dict) -> np.ndarray:
    if "frequencies" in options:
        return np.asarray(options["frequencies"], float)
    return np.logspace(np.log10(options["start"]), np.log10(options["stop"]), options["points"])


def input_function(tables: dict, keys) -> Any:
    """Piecewise-constant input ``u(t)``: each table holds ``[time, value]`` breakpoints."""
    idx = {k: i for i, k in enumerate(keys)}
    for k in tables:
        if k not in idx:
            raise UnknownSignal(f"simulation input {k} is not an external input")
    compiled = [(idx[k], np.array([r[0] for r in rows]), np.array([r[1] for r in rows]))
                for k, rows in tables.items()]
    n = len(keys)

    def u(t):
        out = np.zeros(n)
        for i, ts, vs in compiled:
            j = np.searchsorted(ts, t, side="right") - 1
            if j >= 0:
                out[i] = vs[j]
        return out

    return u
