"""Command-line driver: ``gasnet <command> <file> [options]``.

Commands
--------
build   parse, construct and interconnect; print a model summary
check   mass-conservation check of the closed network
dcgain  DC gain of the closed network
freq    frequency sweep (from the file's ``freqsweep`` analysis)
sim     every ``simulate`` analysis of the file

Exit status is 0 when every requested check passes, 1 when a check fails
and 2 on errors (unreadable file, invalid network, numerical failure).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GasnetError, PartitionMismatch
from .interconnect import connect_by_name, interconnect, validate_ports
from .model import dc_gain, validate_dimensions
from .netfile import (build_components, connection_spec, frequencies_of, input_function,
                      parse_network)
from .sim import TimeGrid, frequency_sweep, simulate_linear
from .verify import check_mass_conservation, descriptor_response, max_relative_deviation

COMMANDS = ("build", "check", "dcgain", "freq", "sim")
CROSS_CHECK_TOL = 1e-8
DEFAULT_FREQS = {"start": 1e-4, "stop": 1e1, "points": 20}


@dataclass
class RunReport:
    network: str
    command: str
    results: list = field(default_factory=list)
    files: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(r.get("passed") is False for r in self.results)

    @property
    def exit_status(self) -> int:
        if self.errors:
            return 2
        return 1 if self.failed else 0

    def as_dict(self) -> dict:
        return {"network": self.network, "command": self.command, "results": self.results,
                "files": self.files, "errors": self.errors, "exit_status": self.exit_status}


def _matrix(M) -> list:
    return np.asarray(M, float).tolist()


class Session:
    """One parsed and built network, with both interconnection pathways."""

    def __init__(self, path):
        self.net = parse_network(path)
        self.models = build_components(self.net)
        self.spec = connection_spec(self.net, self.models)
        problems = validate_ports(self.models, self.spec)
        if problems:
            raise GasnetError("invalid connections: " + "; ".join(problems))
        self.model = interconnect(self.models, self.spec, check=False)
        self._by_name = None

    def bindings(self):
        ports = {p.key: p for m in self.models for p in m.ports}
        return self.spec.signal_bindings(ports)

    @property
    def by_name(self):
        if self._by_name is None:
            self._by_name = connect_by_name(self.models, self.bindings(), self.spec.inputs,
                                            self.spec.outputs)
        return self._by_name

    def cross_check(self, omegas) -> dict:
        """Largest relative deviation of the name pathway and of the descriptor oracle."""
        from .model import frequency_response

        dev_name = dev_oracle = 0.0
        for om in omegas:
            s = 1j * om
            G = frequency_response(self.model, s)
            dev_name = max(dev_name, max_relative_deviation(frequency_response(self.by_name, s), G))
            Z = descriptor_response(self.models, self.bindings(), self.spec.inputs,
                                    self.spec.outputs, s)
            dev_oracle = max(dev_oracle, max_relative_deviation(G, Z))
        return {"name_vs_matrix": dev_name, "matrix_vs_descriptor": dev_oracle,
                "max_deviation": max(dev_name, dev_oracle)}


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get("GASNET_OUT") or "gasnet_out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _do_build(sess, args, report):
    m = sess.model
    problems = validate_dimensions(m)
    report.results.append({
        "analysis": "build", "passed": not problems, "problems": problems,
        "n_states": m.n_states, "n_inputs": m.n_inputs, "n_outputs": m.n_outputs,
        "inputs": [lab.key for lab in m.input_labels],
        "outputs": [lab.key for lab in m.output_labels],
        "states": [lab.key for lab in m.state_labels],
    })
    if args.out or os.environ.get("GASNET_OUT"):
        path = _out_dir(args) / f"{sess.net.name}_model.json"
        path.write_text(json.dumps({
            "A": _matrix(m.A), "B": _matrix(m.B), "C": _matrix(m.C), "D": _matrix(m.D),
            "states": [lab.key for lab in m.state_labels],
            "inputs": [lab.key for lab in m.input_labels],
            "outputs": [lab.key for lab in m.output_labels],
        }, indent=1))
        report.files.append(str(path))


def _do_check(sess, args, report):
    try:
        r = check_mass_conservation(sess.model, tol=args.tol)
        report.results.append({"analysis": "mass_check", **r.as_dict()})
    except PartitionMismatch as exc:
        report.results.append({"analysis": "mass_check", "passed": None,
                               "status": "not applicable", "reason": str(exc)})


def _do_dcgain(sess, args, report):
    G = dc_gain(sess.model)
    keys_in = [lab.key for lab in sess.model.input_labels]
    keys_out = [lab.key for lab in sess.model.output_labels]
    path = _out_dir(args) / f"{sess.net.name}_dcgain.csv"
    lines = ["output," + ",".join(keys_in)]
    lines += [k + "," + ",".join("%.17g" % v for v in row) for k, row in zip(keys_out, G)]
    path.write_text("\n".join(lines) + "\n")
    report.files.append(str(path))
    report.results.append({"analysis": "dcgain", "inputs": keys_in, "outputs": keys_out,
                           "gain": _matrix(G)})


def _do_freq(sess, args, report):
    opts = [a.options for a in sess.net.analyses if a.kind == "freqsweep"] or [DEFAULT_FREQS]
    for k, o in enumerate(opts):
        omegas = frequencies_of(o)
        table = frequency_sweep(sess.model, omegas)
        suffix = "" if k == 0 else f"_{k + 1}"
        path = _out_dir(args) / f"{sess.net.name}_freq{suffix}.csv"
        table.to_csv(path)
        report.files.append(str(path))
        res = {"analysis": "freqsweep", "points": len(omegas), "skipped": table.skipped}
        if args.cross_check:
            cc = sess.cross_check([w for w in omegas if w not in table.skipped])
            res.update({"cross_check": cc, "passed": cc["max_deviation"] < CROSS_CHECK_TOL})
        report.results.append(res)


def _do_sim(sess, args, report):
    sims = [a.options for a in sess.net.analyses if a.kind == "simulate"]
    if not sims:
        raise GasnetError("the network file requests no simulate analysis")
    m = sess.model
    keys = [lab.key for lab in m.input_labels]
    for k, o in enumerate(sims):
        grid = TimeGrid(o["t0"], o["t1"], o["dt"])
        u = input_function(o.get("inputs", {}), keys)
        x0 = np.zeros(m.n_states)
        for key, v in o.get("x0", {}).items():
            x0[m.state_index(key)] = v
        traj = simulate_linear(m, u, x0, grid)
        name = o.get("name") or ("sim" if k == 0 else f"sim_{k + 1}")
        path = _out_dir(args) / f"{sess.net.name}_{name}.csv"
        traj.to_csv(path)
        report.files.append(str(path))
        report.results.append({"analysis": "simulate", "name": name, "samples": len(traj.times),
                               "columns": traj.columns})


def run(path, command: str, args) -> RunReport:
    report = RunReport(str(path), command)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            sess = Session(path)
            report.network = sess.net.name
            if command == "build":
                _do_build(sess, args, report)
            elif command == "check":
                _do_check(sess, args, report)
            elif command == "dcgain":
                _do_dcgain(sess, args, report)
            elif command == "freq":
                _do_freq(sess, args, report)
            elif command == "sim":
                _do_sim(sess, args, report)
        for w in caught:
            report.results.append({"analysis": "warning", "message": str(w.message)})
    except (GasnetError, KeyError, ValueError) as exc:
        report.errors.append(f"{type(exc).__name__}: {exc}")
    return report


def _print_human(report: RunReport, out):
    for err in report.errors:
        print(f"error: {err}", file=sys.stderr)
    for r in report.results:
        kind = r["analysis"]
        if kind == "build":
            print(f"{report.network}: {r['n_states']} states, {r['n_inputs']} inputs, "
                  f"{r['n_outputs']} outputs", file=out)
            print("  inputs:  " + ", ".join(r["inputs"]), file=out)
            print("  outputs: " + ", ".join(r["outputs"]), file=out)
            for p in r["problems"]:
                print(f"  problem: {p}", file=out)
        elif kind == "mass_check":
            if r["passed"] is None:
                print(f"mass check: not applicable ({r['reason']})", file=out)
            else:
                word = "passed" if r["passed"] else "FAILED"
                print(f"mass check {word} ({r['mode']}): T_qp {r['t_qp_norm']:.3g}, "
                      f"column-sum deviation {r['colsum_dev']:.3g}, tol {r['tol']:.3g}", file=out)
        elif kind == "dcgain":
            print("dc gain (rows: outputs, columns: inputs)", file=out)
            print("  " + "  ".join(r["inputs"]), file=out)
            for name, row in zip(r["outputs"], r["gain"]):
                print(f"  {name}: " + "  ".join(f"{v: .6g}" for v in row), file=out)
        elif kind == "freqsweep":
            print(f"frequency sweep: {r['points']} points, {len(r['skipped'])} skipped", file=out)
            if "cross_check" in r:
                cc = r["cross_check"]
                word = "passed" if r["passed"] else "FAILED"
                print(f"cross-check {word}: max dual-path deviation {cc['max_deviation']:.3e} "
                      f"(name vs matrix {cc['name_vs_matrix']:.3e}, "
                      f"matrix vs descriptor {cc['matrix_vs_descriptor']:.3e})", file=out)
        elif kind == "simulate":
            print(f"simulation {r['name']}: {r['samples']} samples, "
                  f"{len(r['columns']) - 1} signals", file=out)
        elif kind == "warning":
            print(f"warning: {r['message']}", file=out)
    for f in report.files:
        print(f"wrote {f}", file=out)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gasnet", description="Build, check and simulate gas networks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file", help="network file (a shipped network may be named by its stem)")
    p.add_argument("--out", help="output directory (default: $GASNET_OUT or ./gasnet_out)")
    p.add_argument("--cross-check", action="store_true",
                   help="compare both interconnection pathways and an independent oracle")
    p.add_argument("--tol", type=float, default=1e-9, help="mass-check tolerance")
    p.add_argument("--json", action="store_true", help="print the run report as JSON")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    report = run(args.file, args.command, args)
    if args.json:
        print(json.dumps(report.as_dict(), indent=1))
    else:
        _print_human(report, sys.stdout)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
