"""Command line front end.

One subcommand per quantity of interest, each writing a deterministic
CSV or JSON data file (17 significant digits, no timestamps) plus a
sidecar <output>.meta.json carrying the resolved configuration.  The
default output directory is taken from JCFLOW_OUTPUT_DIR when set.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .branchid import Measurement, identify_branch
from .flow import (
    arcsin_branch,
    beta_exact,
    beta_one_loop,
    c_function,
    flow_integrate,
    flow_integrate_one_loop,
    renormalised_coupling_branches,
    spectrum,
)
from .operators import (
    ModelParams,
    build_operators,
    evolution_detuned,
    evolution_resonant,
)
from .smatrix import (
    FlowParams,
    bifurcation_scan,
    effective_t_matrix,
    large_k_asymptote,
    s_matrix_detuned,
    solve_flow,
)

__all__ = ["RunConfig", "ConfigError", "validate_and_echo", "run", "main"]


class ConfigError(Exception):
    """Configuration rejected; carries the offending flag."""

    def __init__(self, flag, message):
        self.flag = flag
        self.message = message
        super().__init__(f"{flag}: {message}")


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    output: str = ""
    format: str = "csv"
    dry_run: bool = False


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _py(x):
    # json module rejects numpy scalars
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_meta(config):
    meta = {
        "command": config.command,
        "format": config.format,
        "options": config.options,
        "output": os.path.basename(config.output),
        "version": __version__,
    }
    _write_json(config.output + ".meta.json", meta)


def get_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: <command>.<ext> "
                        "in JCFLOW_OUTPUT_DIR or the working directory)")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="data file format (default csv)")
    common.add_argument("--dry-run", action="store_true",
                        help="validate, echo the resolved config as JSON and exit")

    p = argparse.ArgumentParser(prog="jcflow",
                                description="Scale flow of the Jaynes-Cummings coupling")
    p.add_argument("--version", action="version", version=f"jcflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("spectrum", parents=[common],
                       help="decay spectra of all branches fixed by one probability")
    q.add_argument("--p-obs", type=float, required=True,
                   help="observed decay probability on mode 0")
    q.add_argument("--n-max", type=int, default=4, help="highest branch number")
    q.add_argument("--j-max", type=int, default=9, help="highest mode in the table")

    q = sub.add_parser("beta", parents=[common],
                       help="exact beta functions on a coupling grid")
    q.add_argument("--g-min", type=float, default=-1.0)
    q.add_argument("--g-max", type=float, default=1.0)
    q.add_argument("--points", type=int, default=401)
    q.add_argument("--n-max", type=int, default=4, help="highest branch number")
    q.add_argument("--one-loop", action="store_true",
                   help="append the cubic-order beta function")

    q = sub.add_parser("flow", parents=[common],
                       help="integrate the exact coupling flow across turning points")
    q.add_argument("--g0", type=float, required=True, help="bare coupling")
    q.add_argument("--t0", type=float, default=-2.0, help="initial flow time")
    q.add_argument("--t1", type=float, default=1.5, help="final flow time")
    q.add_argument("--samples", type=int, default=2001)
    q.add_argument("--rtol", type=float, default=1e-12)
    q.add_argument("--switch-band", type=float, default=1e-4,
                   help="half-width of the analytic band at |g_r| = 1")
    q.add_argument("--one-loop", action="store_true",
                   help="add a one-loop trajectory from the same starting value")

    q = sub.add_parser("effective-flow", parents=[common],
                       help="thread solution branches of the S-matrix matching condition")
    q.add_argument("--g-r", type=float, required=True, help="measured coupling")
    q.add_argument("--k-max", type=float, default=20.0)
    q.add_argument("--k-min", type=float, default=1e-3)
    q.add_argument("--k-points", type=int, default=400)
    q.add_argument("--e-max", type=float, default=5.0 * math.pi,
                   help="coupling window upper edge")
    q.add_argument("--mesh", type=int, default=4000, help="root-search mesh points")

    q = sub.add_parser("bifurcations", parents=[common],
                       help="locate scales where solution pairs are born")
    q.add_argument("--g-r", type=float, required=True, help="measured coupling")
    q.add_argument("--k-lo", type=float, default=0.3)
    q.add_argument("--k-hi", type=float, default=5.0)
    q.add_argument("--e-max", type=float, default=5.0 * math.pi)
    q.add_argument("--mesh", type=int, default=4000)
    q.add_argument("--scan-points", type=int, default=200)
    q.add_argument("--k-resolution", type=float, default=1e-9)

    q = sub.add_parser("branch-id", parents=[common],
                       help="branches consistent with two decay measurements")
    q.add_argument("--input", required=True,
                   help="JSON file: {n_max, measurements: [{j, probability, tolerance} x2]}")

    q = sub.add_parser("dump-operator", parents=[common],
                       help="serialise one operator matrix as JSON")
    q.add_argument("--name", required=True,
                   choices=("a", "a_dagger", "number", "tau_plus", "tau_minus",
                            "tau_3", "V", "H0", "u_resonant", "u_detuned",
                            "s_matrix", "t_matrix", "asymptote"))
    q.add_argument("--cutoff", type=int, default=8)
    q.add_argument("--coupling", type=float, default=1.0)
    q.add_argument("--detuning", type=float, default=0.0)
    q.add_argument("--mode-frequency", type=float, default=0.0)
    q.add_argument("--time", type=float, default=1.0)
    q.add_argument("--scale", type=float, default=1.0, help="flow scale k")
    return p


_DEFAULT_EXT = {"csv": "csv", "json": "json"}


def build_config(args) -> RunConfig:
    """Collect parsed arguments into a RunConfig and validate them."""
    opts = {k: v for k, v in vars(args).items()
            if k not in ("command", "output", "format", "dry_run")}
    cmd = args.command
    fmt = args.format
    if cmd == "branch-id" or cmd == "dump-operator":
        fmt = "json"  # these are JSON-shaped regardless

    if cmd == "spectrum":
        if not 0.0 <= opts["p_obs"] <= 1.0:
            raise ConfigError("--p-obs", "must lie in [0, 1]")
        if opts["n_max"] < 0:
            raise ConfigError("--n-max", "must be >= 0")
        if opts["j_max"] < 0:
            raise ConfigError("--j-max", "must be >= 0")
    elif cmd == "beta":
        if not opts["g_min"] < opts["g_max"]:
            raise ConfigError("--g-min", "must be < --g-max")
        if abs(opts["g_min"]) > 1.0 or abs(opts["g_max"]) > 1.0:
            raise ConfigError("--g-max", "exact beta is only defined on [-1, 1]")
        if opts["points"] < 2:
            raise ConfigError("--points", "must be >= 2")
        if opts["n_max"] < 0:
            raise ConfigError("--n-max", "must be >= 0")
    elif cmd == "flow":
        if opts["g0"] < 0.0:
            raise ConfigError("--g0", "must be >= 0")
        if not opts["t0"] < opts["t1"]:
            raise ConfigError("--t0", "must be < --t1")
        if opts["samples"] < 2:
            raise ConfigError("--samples", "must be >= 2")
        if not 0.0 < opts["switch_band"] < 0.4:
            raise ConfigError("--switch-band", "must lie in (0, 0.4)")
    elif cmd == "effective-flow":
        if opts["g_r"] < 0.0:
            raise ConfigError("--g-r", "must be >= 0")
        if opts["k_min"] > opts["k_max"]:
            raise ConfigError("--k-min", "must be <= --k-max")
        if opts["k_min"] <= 0.0:
            raise ConfigError("--k-min", "must be > 0 (the zero-scale limit "
                              "is attached analytically)")
        if opts["k_points"] < 2:
            raise ConfigError("--k-points", "must be >= 2")
        if opts["e_max"] <= 0.0:
            raise ConfigError("--e-max", "must be > 0")
        if opts["mesh"] < 100:
            raise ConfigError("--mesh", "must be >= 100")
    elif cmd == "bifurcations":
        if opts["g_r"] < 0.0:
            raise ConfigError("--g-r", "must be >= 0")
        if not 0.0 < opts["k_lo"] < opts["k_hi"]:
            raise ConfigError("--k-lo", "must satisfy 0 < --k-lo < --k-hi")
        if opts["scan_points"] < 2:
            raise ConfigError("--scan-points", "must be >= 2")
        if opts["k_resolution"] <= 0.0:
            raise ConfigError("--k-resolution", "must be > 0")
    elif cmd == "branch-id":
        if not os.path.exists(opts["input"]):
            raise ConfigError("--input", f"file not found: {opts['input']}")
    elif cmd == "dump-operator":
        if opts["cutoff"] < 2:
            raise ConfigError("--cutoff", "must be >= 2")
        if opts["name"] == "u_resonant" and opts["detuning"] != 0.0:
            raise ConfigError("--detuning", "must be 0 for u_resonant")
        if opts["name"] == "asymptote" and opts["scale"] <= 0.0:
            raise ConfigError("--scale", "must be > 0 for the asymptote")

    output = args.output
    if not output:
        outdir = os.environ.get("JCFLOW_OUTPUT_DIR", "")
        ext = "json" if fmt == "json" else "csv"
        output = os.path.join(outdir, f"{cmd}.{ext}")
    return RunConfig(command=cmd, options=opts, output=output,
                     format=fmt, dry_run=args.dry_run)


def validate_and_echo(config: RunConfig) -> dict:
    """Resolved configuration as a plain dict (what --dry-run prints)."""
    return {
        "command": config.command,
        "format": config.format,
        "options": config.options,
        "output": config.output,
    }


def _run_spectrum(config):
    o = config.options
    branches = renormalised_coupling_branches(o["p_obs"], o["n_max"])
    tables = [spectrum(b, o["p_obs"], o["j_max"]) for b, _ in branches]
    header = ["branch_n", "branch_sign", "g0"] + [f"p{j}" for j in range(o["j_max"] + 1)]
    rows = [[t.branch.n, t.branch.sign, t.bare_coupling, *t.probabilities]
            for t in tables]
    if config.format == "csv":
        _write_csv(config.output, header, rows)
    else:
        _write_json(config.output, [
            {"n": t.branch.n, "sign": t.branch.sign, "g0": _py(t.bare_coupling),
             "probabilities": [_py(p) for p in t.probabilities]} for t in tables
        ])
    return f"spectrum: {len(tables)} branches x {o['j_max'] + 1} modes"


def _run_beta(config):
    o = config.options
    g = np.linspace(o["g_min"], o["g_max"], o["points"])
    rows = []
    for n in range(o["n_max"] + 1):
        b = beta_exact(g, n)
        rows.extend([["exact", n, gi, bi] for gi, bi in zip(g, b)])
    if o["one_loop"]:
        b = beta_one_loop(g)
        rows.extend([["one_loop", 0, gi, bi] for gi, bi in zip(g, b)])
    header = ["kind", "branch_n", "g_r", "beta"]
    if config.format == "csv":
        _write_csv(config.output, header, rows)
    else:
        _write_json(config.output, [dict(zip(header, map(_py, r))) for r in rows])
    kinds = "exact" + (" + one-loop" if o["one_loop"] else "")
    return f"beta: {o['points']} points x {o['n_max'] + 1} branches ({kinds})"


def _run_flow(config):
    o = config.options
    states = flow_integrate(o["g0"], (o["t0"], o["t1"]), rtol=o["rtol"],
                            n_samples=o["samples"], switch_band=o["switch_band"])
    c = c_function(states)
    rows = [[s.t, s.g_r, s.branch_count,
             beta_exact(s.g_r, s.branch_count), ci]
            for s, ci in zip(states, c)]
    header = ["t", "g_r", "branch_count", "beta", "c"]
    if o["one_loop"]:
        one = flow_integrate_one_loop(states[0].g_r, (o["t0"], o["t1"]),
                                      n_samples=len(states))
        # resample the one-loop run onto the trajectory grid
        t_one = np.array([s.t for s in one])
        g_one = np.array([s.g_r for s in one])
        for row in rows:
            row.append(float(np.interp(row[0], t_one, g_one)))
        header.append("g_r_one_loop")
    if config.format == "csv":
        _write_csv(config.output, header, rows)
    else:
        _write_json(config.output, [dict(zip(header, map(_py, r))) for r in rows])
    turns = states[-1].branch_count - states[0].branch_count
    return (f"flow: {len(states)} states, {turns} turning points, "
            f"g_r({o['t1']:g}) = {states[-1].g_r:.6g}")


def _run_effective_flow(config):
    o = config.options
    grid = np.geomspace(o["k_max"], o["k_min"], o["k_points"])
    branches = solve_flow(o["g_r"], grid, o["e_max"], mesh=o["mesh"])
    births = {}
    for i, b in enumerate(branches):
        if b.birth_scale is not None:
            births.setdefault(b.birth_scale, []).append(b.couplings[0])
    birth_list = [{"k": _py(k), "e": _py(0.5 * (es[0] + es[-1]))}
                  for k, es in sorted(births.items(), reverse=True)]
    summary = {
        "g_r": o["g_r"],
        "births": birth_list,
        "branches": [
            {"branch_id": i, "birth_k": _py(b.birth_scale),
             "ir_branch_n": _py(b.ir_branch),
             "k_min_reached": float(b.scales[-1])}
            for i, b in enumerate(branches)
        ],
    }
    if config.format == "csv":
        rows = []
        for i, b in enumerate(branches):
            for k, e in zip(b.scales, b.couplings):
                rows.append([k, e, i, b.ir_branch])
        _write_csv(config.output, ["k", "e_k", "branch_id", "ir_branch_n"], rows)
        _write_json(config.output + ".summary.json", summary)
    else:
        summary["samples"] = {
            str(i): [[float(k), float(e)] for k, e in zip(b.scales, b.couplings)]
            for i, b in enumerate(branches)
        }
        _write_json(config.output, summary)
    return (f"effective-flow: {len(branches)} branches, "
            f"{len(birth_list)} births on the grid")


def _run_bifurcations(config):
    o = config.options
    births = bifurcation_scan(o["g_r"], (o["k_lo"], o["k_hi"]), o["e_max"],
                              mesh=o["mesh"], scan_points=o["scan_points"],
                              k_resolution=o["k_resolution"])
    if config.format == "csv":
        _write_csv(config.output, ["birth_k", "e_at_birth"], births)
    else:
        _write_json(config.output, [{"k": _py(k), "e": _py(e)} for k, e in births])
    return f"bifurcations: {len(births)} births in [{o['k_lo']:g}, {o['k_hi']:g}]"


def _run_branch_id(config):
    with open(config.options["input"]) as fh:
        payload = json.load(fh)
    try:
        meas = [Measurement(int(m["j"]), float(m["probability"]),
                            float(m["tolerance"])) for m in payload["measurements"]]
        n_max = int(payload["n_max"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("--input", f"malformed input file: {exc}")
    if len(meas) != 2:
        raise ConfigError("--input", "exactly two measurements are required")
    consistent = identify_branch(meas[0], meas[1], n_max)
    _write_json(config.output, {
        "consistent": [
            {"n": int(b.n), "sign": "+" if b.sign > 0 else "-", "g0": _py(g0)}
            for b, g0 in consistent
        ]
    })
    return f"branch-id: {len(consistent)} consistent branches"


def _run_dump_operator(config):
    o = config.options
    name = o["name"]
    mp = ModelParams(coupling=o["coupling"], detuning=o["detuning"],
                     cutoff=o["cutoff"], mode_frequency=o["mode_frequency"])
    fp = FlowParams(scale=o["scale"], coupling=o["coupling"], cutoff=o["cutoff"])
    if name in ("a", "a_dagger", "number", "tau_plus", "tau_minus", "tau_3", "V", "H0"):
        op = build_operators(mp)[name]
    elif name == "u_resonant":
        op = evolution_resonant(mp, o["time"])
    elif name == "u_detuned":
        op = evolution_detuned(mp, o["time"])
    elif name == "s_matrix":
        op = s_matrix_detuned(fp)
    elif name == "t_matrix":
        op = effective_t_matrix(fp)
    else:
        op = large_k_asymptote(fp)
    _write_json(config.output, op.to_json_dict())
    return f"dump-operator: {name} dim {op.dim}"


_RUNNERS = {
    "spectrum": _run_spectrum,
    "beta": _run_beta,
    "flow": _run_flow,
    "effective-flow": _run_effective_flow,
    "bifurcations": _run_bifurcations,
    "branch-id": _run_branch_id,
    "dump-operator": _run_dump_operator,
}


def run(config: RunConfig) -> int:
    """Execute one subcommand: write the data file, sidecar and summary line."""
    outdir = os.path.dirname(config.output)
    if outdir:
        os.makedirs(outdir, exist_ok=True)
    summary = _RUNNERS[config.command](config)
    _write_meta(config)
    print(f"{summary} -> {config.output}")
    return 0


def main(argv=None) -> int:
    args = get_parser().parse_args(argv)
    try:
        config = build_config(args)
    except ConfigError as exc:
        print("error: " + json.dumps({"flag": exc.flag, "message": exc.message}),
              file=sys.stderr)
        return 2
    if config.dry_run:
        print(json.dumps(validate_and_echo(config), indent=1, sort_keys=True))
        return 0
    try:
        return run(config)
    except ConfigError as exc:
        print("error: " + json.dumps({"flag": exc.flag, "message": exc.message}),
              file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print("error: " + json.dumps({"message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
