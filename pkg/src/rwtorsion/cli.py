"""Command-line front end.

Reads weighted-graph, domain, and metric-graph files, runs the library,
and emits JSON (default) or CSV to stdout.  Output is deterministic for
fixed inputs and seeds: JSON keys are sorted and floats are printed with
17 significant digits, so repeated runs are byte-identical.

Exit codes: 0 success, 1 input error, 2 computation error, 3 audit
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import graph as graph_mod
from . import kernel as kernel_mod
from . import montecarlo, quantum, torsion
from .audit import audit as run_audit
from .errors import ComputationError, InputError
from .geometry import EXHAUSTIVE_LIMIT, cheeger
from .space import make_domain


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; that slot is reserved
    for computation failures here, so downgrade usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty number list")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def _box(text: str) -> list[tuple[float, float]]:
    """Parse '0:1' or '0:1,0:2' into per-axis (lo, hi) pairs."""
    out = []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 2:
            raise argparse.ArgumentTypeError(f"bad box axis {part!r}, expected lo:hi")
        try:
            out.append((float(pieces[0]), float(pieces[1])))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad box axis {part!r}") from None
    if not 1 <= len(out) <= 3:
        raise argparse.ArgumentTypeError("box must have 1 to 3 axes")
    return out


def build_parser() -> argparse.ArgumentParser:
    default_threads = int(os.environ.get("TORSION_RW_THREADS", "1"))

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )
    common.add_argument(
        "--threads",
        type=int,
        default=default_threads,
        help="reserved parallelism knob (default from TORSION_RW_THREADS); "
        "this build always computes single-threaded for reproducibility",
    )
    common.add_argument(
        "--plot-dir",
        default=None,
        help="also render PNG figures into this directory (report subcommands)",
    )

    on_graph = argparse.ArgumentParser(add_help=False)
    on_graph.add_argument("--graph", required=True, help="weighted graph edge-list file")
    on_graph.add_argument("--domain", required=True, help="file naming the states of omega")

    parser = _Parser(
        prog="rwtorsion",
        description="Torsional rigidity toolkit for finite random walk spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("torsion", parents=[common, on_graph], help="torsional rigidity and stress")

    p_heat = sub.add_parser("heat-content", parents=[common, on_graph], help="Q(t) at given times")
    p_heat.add_argument("--t", type=_float_list, required=True, help="comma-separated times")

    p_mom = sub.add_parser("moments", parents=[common, on_graph], help="exit time moments")
    p_mom.add_argument("--j", type=_int_list, default=[1, 2], help="comma-separated orders")

    p_eig = sub.add_parser("eigenvalue", parents=[common, on_graph], help="first Dirichlet eigenvalue")
    p_eig.add_argument("--method", choices=("exact", "limit"), default="exact")
    p_eig.add_argument("--n", type=int, default=30, help="depth for the limit formula")

    p_che = sub.add_parser("cheeger", parents=[common, on_graph], help="p-Cheeger constants")
    p_che.add_argument("--p", type=_float_list, default=[1.0], help="comma-separated exponents")
    p_che.add_argument(
        "--mode",
        choices=("exhaustive", "greedy"),
        default=None,
        help="default: exhaustive when omega is small enough, else greedy",
    )

    p_pt = sub.add_parser("ptorsion", parents=[common, on_graph], help="p-torsional rigidity")
    p_pt.add_argument("--p", type=_float_list, default=[2.0], help="comma-separated exponents > 1")

    p_mc = sub.add_parser("mc", parents=[common, on_graph], help="Monte Carlo rigidity estimate")
    p_mc.add_argument("--samples", type=int, required=True, help="walks per start state")
    p_mc.add_argument("--seed", type=int, required=True)

    p_q = sub.add_parser("quantum", parents=[common], help="metric graph torsional rigidity")
    p_q.add_argument("--metric-graph", required=True, help="metric graph file")

    p_re = sub.add_parser("rescale", parents=[common], help="rescaled rigidity of a box")
    p_re.add_argument(
        "--kernel",
        required=True,
        help="uniform:<radius>, tent:<radius>, or gauss:<sigma>:<cutoff>",
    )
    p_re.add_argument("--eps", type=_float_list, required=True, help="comma-separated scales")
    p_re.add_argument("--h", type=float, required=True, help="grid cell size")
    p_re.add_argument(
        "--box",
        type=_box,
        default=[(0.0, 1.0)],
        help="domain box as lo:hi per axis, comma-separated (default 0:1)",
    )

    p_aud = sub.add_parser("audit", parents=[common, on_graph], help="inequality cross-checks")
    p_aud.add_argument(
        "--p", type=_float_list, default=[1.5, 2.0, 3.0], help="exponents for the p-dependent rows"
    )

    return parser


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_space(args):
    try:
        weighted = graph_mod.parse_graph_file(_read(args.graph))
    except InputError as exc:
        raise InputError(f"{args.graph}: {exc}") from exc
    space = graph_mod.from_weighted_graph(weighted)
    try:
        omega = graph_mod.parse_domain_file(_read(args.domain), space)
    except InputError as exc:
        raise InputError(f"{args.domain}: {exc}") from exc
    return space, omega


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def _emit_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [inner + _emit_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            inner + json.dumps(str(k)) + ": " + _emit_json(obj[k], indent + 1)
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, _csv_value(obj)))


_CSV_TABLES = {
    "heat-content": ("series", ("t", "q")),
    "moments": ("series", ("j", "value")),
    "rescale": ("series", ("eps", "value")),
    "cheeger": ("entries", ("p", "value", "mode", "certified", "argmin_set")),
    "ptorsion": ("entries", ("p", "rigidity_p", "energy_gap", "iterations", "residual")),
    "audit": ("rows", ("name", "statement", "lhs", "rhs", "slack", "tol", "pass", "note")),
}


def _write_csv(payload: dict, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    command = payload["command"]
    table = _CSV_TABLES.get(command)
    if table is not None:
        key, columns = table
        writer.writerow(columns)
        for entry in payload["results"][key]:
            row = []
            for col in columns:
                v = entry[col]
                if isinstance(v, (list, tuple)):
                    row.append("|".join(str(x) for x in v))
                else:
                    row.append(_csv_value(v))
            writer.writerow(row)
        return
    writer.writerow(("key", "value"))
    rows: list = []
    _flatten("", payload["results"], rows)
    for key, value in rows:
        writer.writerow((key, value))


def _cmd_torsion(args, warnings):
    space, omega = _load_space(args)
    result = torsion.stress_solve(space, omega)
    return {
        "rigidity": result.rigidity,
        "stress": result.stress_map(),
        "omega": list(result.domain_states),
    }


def _cmd_heat_content(args, warnings):
    space, omega = _load_space(args)
    series = [
        {"t": t, "q": torsion.heat_content(space, omega, t)} for t in args.t
    ]
    return {"series": series}


def _cmd_moments(args, warnings):
    space, omega = _load_space(args)
    series = []
    for j in args.j:
        if j < 1:
            raise InputError(f"moment order must be >= 1, got {j}")
        series.append({"j": j, "value": torsion.exit_moment(space, omega, j)})
    return {"series": series}


def _cmd_eigenvalue(args, warnings):
    space, omega = _load_space(args)
    if args.method == "exact":
        value = torsion.eigenvalue_exact(space, omega)
    else:
        value = torsion.eigenvalue_limit(space, omega, args.n)
    return {"method": args.method, "n": args.n, "value": value}


def _cmd_cheeger(args, warnings):
    space, omega = _load_space(args)
    mode = args.mode
    if mode is None:
        mode = "exhaustive" if len(omega) <= EXHAUSTIVE_LIMIT else "greedy"
        if mode == "greedy":
            warnings.append(
                f"omega has {len(omega)} states; using the greedy upper bound"
            )
    entries = []
    for p in args.p:
        found = cheeger(space, omega, p=p, mode=mode)
        entries.append(
            {
                "p": p,
                "value": found.value,
                "mode": found.mode,
                "certified": found.certified,
                "argmin_set": list(found.argmin_set),
            }
        )
    return {"entries": entries}


def _cmd_ptorsion(args, warnings):
    space, omega = _load_space(args)
    entries = []
    for p in args.p:
        result = torsion.p_torsion(space, omega, p)
        entries.append(
            {
                "p": p,
                "rigidity_p": result.rigidity_p,
                "energy_gap": result.energy_gap,
                "iterations": result.iterations,
                "residual": result.residual,
                "values": result.value_map(),
            }
        )
    return {"entries": entries}


def _cmd_mc(args, warnings):
    space, omega = _load_space(args)
    est = montecarlo.mc_torsion(space, omega, args.samples, args.seed)
    lo, hi = est.interval
    return {
        "estimate": est.mean,
        "half_width_95": est.half_width_95,
        "interval": [lo, hi],
        "n_samples": est.n_samples,
        "seed": est.seed,
    }


def _cmd_quantum(args, warnings):
    try:
        graph = quantum.parse_metric_graph_file(args.metric_graph)
    except InputError as exc:
        raise InputError(f"{args.metric_graph}: {exc}") from exc
    result = quantum.quantum_torsion(graph)
    bound = quantum.quantum_lower_bound(graph)
    return {
        "T_q": result.value,
        "c": result.c,
        "cube_term": result.cube_term,
        "vertex_term": result.vertex_term,
        "vertex_values": dict(result.vertex_values),
        "lower_bound": bound,
        "lower_bound_ok": bound <= result.value * (1.0 + 1e-12),
    }


def _cmd_rescale(args, warnings):
    kern = kernel_mod.parse_kernel_spec(args.kernel, dim=len(args.box))
    series = []
    for eps in args.eps:
        result = kernel_mod.rescaled_torsion(args.box, kern, eps, args.h)
        warnings.extend(result.warnings)
        series.append(
            {
                "eps": eps,
                "value": result.value,
                "raw_rigidity": result.raw_rigidity,
                "n_cells": result.n_cells,
                "n_omega": result.n_omega,
            }
        )
    return {
        "series": series,
        "kernel": args.kernel,
        "h": args.h,
        "box": [[lo, hi] for lo, hi in args.box],
    }


def _cmd_audit(args, warnings):
    space, omega = _load_space(args)
    report = run_audit(space, omega, p_values=args.p)
    rows = [
        {
            "name": r.name,
            "statement": r.statement,
            "lhs": r.lhs,
            "rhs": r.rhs,
            "slack": r.slack,
            "tol": r.tol,
            "pass": r.passed,
            "note": r.note,
        }
        for r in report.rows
    ]
    return {"rows": rows, "metadata": report.metadata}, report.all_passed


def _render_plots(args, payload) -> list[str]:
    from . import plotting

    command = payload["command"]
    results = payload["results"]
    outdir = args.plot_dir
    figures: list[str] = []
    if command == "heat-content":
        series = results["series"]
        figures.append(
            plotting.heat_content_figure(
                os.path.join(outdir, "heat_content.png"),
                [row["t"] for row in series],
                [row["q"] for row in series],
            )
        )
    elif command == "moments":
        series = results["series"]
        figures.append(
            plotting.moments_figure(
                os.path.join(outdir, "moments.png"),
                [row["j"] for row in series],
                [row["value"] for row in series],
            )
        )
    elif command == "rescale":
        series = results["series"]
        figures.append(
            plotting.rescale_figure(
                os.path.join(outdir, "rescale.png"),
                [row["eps"] for row in series],
                [row["value"] for row in series],
            )
        )
    elif command == "audit":
        rows = [r for r in results["rows"] if r["pass"] is not None]
        figures.append(
            plotting.audit_figure(
                os.path.join(outdir, "audit.png"),
                [r["name"] for r in rows],
                [r["slack"] for r in rows],
                [r["pass"] for r in rows],
            )
        )
    return figures


_HANDLERS = {
    "torsion": _cmd_torsion,
    "heat-content": _cmd_heat_content,
    "moments": _cmd_moments,
    "eigenvalue": _cmd_eigenvalue,
    "cheeger": _cmd_cheeger,
    "ptorsion": _cmd_ptorsion,
    "mc": _cmd_mc,
    "quantum": _cmd_quantum,
    "rescale": _cmd_rescale,
    "audit": _cmd_audit,
}


def _inputs_of(args) -> dict:
    skip = {"command", "format", "plot_dir"}
    out = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        if isinstance(value, list) and value and isinstance(value[0], tuple):
            value = [list(v) for v in value]
        out[key] = value
    return out


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("rwtorsion: error: --threads must be >= 1", file=sys.stderr)
        return 1

    warnings: list[str] = []
    if args.threads > 1:
        warnings.append(
            f"--threads {args.threads} requested; this build computes "
            "single-threaded for bit-reproducibility"
        )
    try:
        outcome = _HANDLERS[args.command](args, warnings)
    except (InputError, OSError, ValueError) as exc:
        print(f"rwtorsion: input error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"rwtorsion: computation error: {exc}", file=sys.stderr)
        return 2

    audit_ok = True
    if isinstance(outcome, tuple):
        results, audit_ok = outcome
    else:
        results = outcome

    payload = {
        "command": args.command,
        "inputs": _inputs_of(args),
        "results": results,
        "warnings": warnings,
    }
    if args.plot_dir is not None:
        payload["results"]["figures"] = _render_plots(args, payload)

    if args.format == "json":
        sys.stdout.write(_emit_json(payload) + "\n")
    else:
        buffer = io.StringIO()
        _write_csv(payload, buffer)
        sys.stdout.write(buffer.getvalue())
    return 0 if audit_ok else 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
