"""Command-line interface.

Subcommands: validate, build, localize, simulate, sweep, export-dot.
Machine-readable output goes to stdout (or --out); diagnostics to stderr.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import model
from .centrality import MEASURES, CentralityConfig
from .dot import export_dot
from .errors import FaultRankError
from .localization import localize
from .propagation import PropagationConfig
from .simulate import (
    ScenarioSpec,
    SweepGrid,
    generate_scenario,
    run_sweep,
)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _default_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("FAULTRANK_SEED")
    return int(env) if env else 0


def _prop_config(args) -> PropagationConfig:
    return PropagationConfig(
        cycle_epsilon=args.cycle_epsilon,
        tolerance=args.tolerance,
        max_iters=args.max_iters,
        combine=args.combine,
    )


def _cent_config(args) -> CentralityConfig:
    return CentralityConfig(
        alpha_fraction=args.alpha_fraction,
        tolerance=args.cent_tolerance,
        max_iters=args.cent_max_iters,
        katz_mode=args.katz_mode,
    )


def _add_propagation_flags(p):
    p.add_argument("--cycle-epsilon", type=float, default=0.01)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--combine", choices=["literal", "noisy-or"], default="literal")


def _add_centrality_flags(p):
    p.add_argument("--alpha-fraction", type=float, default=0.9)
    p.add_argument("--cent-tolerance", type=float, default=1e-8)
    p.add_argument("--cent-max-iters", type=int, default=1000)
    p.add_argument(
        "--katz-mode", choices=["direct_solve", "iterative_series"], default="direct_solve"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultrank",
        description="Centrality-based fault localization for distributed systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a catalog file")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out")

    p = sub.add_parser("build", help="build a fault graph from catalog + log/ifv")
    p.add_argument("--catalog", required=True)
    p.add_argument("--log", help="fault log CSV (timestamp,incident,fault)")
    p.add_argument("--ifv", help="impact factor CSV override (source,target,ifv)")
    p.add_argument("--probs", help="JSON file {fault_id: probability} override")
    p.add_argument("--out")

    p = sub.add_parser("localize", help="run the localization pipeline")
    p.add_argument("--graph", required=True)
    p.add_argument("--trigger", required=True)
    p.add_argument("--measure", choices=MEASURES, required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out")
    _add_propagation_flags(p)
    _add_centrality_flags(p)

    p = sub.add_parser("simulate", help="generate a synthetic scenario")
    p.add_argument("--n-faults", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--edge-density", type=float, default=3.0)
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="run the accuracy sweep")
    p.add_argument("--grid", help="JSON grid file {n_faults, thresholds, measures}")
    p.add_argument("--seeds", type=int, nargs="+", default=list(range(30)))
    p.add_argument("--truth-cutoff", type=float, default=0.5)
    p.add_argument("--gt-trials", type=int, default=4000)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    _add_propagation_flags(p)
    _add_centrality_flags(p)

    p = sub.add_parser("export-dot", help="emit a DOT rendering of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out")

    parser.add_argument("--config", help="JSON file of flag-name defaults")
    return parser


def _cmd_validate(args) -> int:
    catalog = model.load_catalog(args.catalog)
    _emit(
        _json_dumps(
            {
                "ok": True,
                "components": len(catalog.components),
                "faults": len(catalog.faults),
            }
        ),
        args.out,
    )
    return 0


def _cmd_build(args) -> int:
    catalog = model.load_catalog(args.catalog)
    log = model.load_fault_log(args.log) if args.log else []
    if args.probs:
        with open(args.probs) as fh:
            probs = {k: float(v) for k, v in json.load(fh).items()}
    elif args.log:
        probs = model.estimate_independent_probabilities(log, catalog)
    else:
        # fall back to the catalog's stored probabilities
        probs = {f.id: f.independent_probability for f in catalog.faults}
    if args.ifv:
        ifv = model.load_impact_factors(args.ifv)
    elif args.log:
        ifv = model.estimate_impact_factors(log, catalog)
    else:
        ifv = model.ImpactFactors({})
    graph = model.build_fault_graph(catalog, probs, ifv)
    _emit(_json_dumps(model.graph_to_dict(graph)), args.out)
    return 0


def _cmd_localize(args) -> int:
    graph = model.load_graph(args.graph)
    report = localize(
        graph,
        args.trigger,
        args.measure,
        args.threshold,
        prop_config=_prop_config(args),
        cent_config=_cent_config(args),
    )
    _emit(_json_dumps(report.to_dict()), args.out)
    return 0


def _cmd_simulate(args) -> int:
    spec = ScenarioSpec(
        n_faults=args.n_faults, seed=_default_seed(args), edge_density=args.edge_density
    )
    _, graph, trigger = generate_scenario(spec)
    _emit(_json_dumps(model.graph_to_dict(graph, trigger=trigger)), args.out)
    return 0


def _cmd_sweep(args) -> int:
    grid_kwargs = {"seeds": tuple(args.seeds)}
    if args.grid:
        with open(args.grid) as fh:
            data = json.load(fh)
        for key in ("n_faults", "thresholds", "measures"):
            if key in data:
                grid_kwargs[key] = tuple(data[key])
        if "seeds" in data:
            grid_kwargs["seeds"] = tuple(data["seeds"])
    grid = SweepGrid(**grid_kwargs)
    report = run_sweep(
        grid=grid,
        prop_config=_prop_config(args),
        cent_config=_cent_config(args),
        truth_cutoff=args.truth_cutoff,
        gt_trials=args.gt_trials,
        parallel=args.parallel,
    )
    if args.format == "csv":
        _emit(report.to_csv(), args.out)
    else:
        _emit(report.to_json(indent=2) + "\n", args.out)
    return 0


def _cmd_export_dot(args) -> int:
    graph = model.load_graph(args.graph)
    _emit(export_dot(graph), args.out)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "build": _cmd_build,
    "localize": _cmd_localize,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "export-dot": _cmd_export_dot,
}


def _apply_config_file(argv):
    """--config F supplies defaults for any long flag not given explicitly."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    with open(path) as fh:
        defaults = json.load(fh)
    given = {a.split("=")[0] for a in rest if a.startswith("--")}
    extra = []
    for key, value in sorted(defaults.items()):
        flag = "--" + key.replace("_", "-")
        if flag in given:
            continue
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        elif isinstance(value, list):
            extra.append(flag)
            extra.extend(str(v) for v in value)
        else:
            extra.extend([flag, str(value)])
    return rest + extra


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
    except (OSError, json.JSONDecodeError, IndexError) as exc:
        sys.stderr.write(f"bad --config: {exc}\n")
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FaultRankError as exc:
        sys.stdout.write(
            json.dumps({"code": exc.code, "message": exc.message}, sort_keys=True) + "\n"
        )
        return 1
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        sys.stdout.write(
            json.dumps(
                {"code": type(exc).__name__, "message": str(exc)}, sort_keys=True
            )
            + "\n"
        )
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
