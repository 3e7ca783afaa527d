"""Command-line harness.

Subcommands reproduce the benchmark experiments at desk scale and run
one-shot estimates on user data. Every run requires an explicit seed
(from the flag or the config file) and is bit-reproducible. Exit codes:
0 success, 2 configuration error, 3 data error, 4 a validation
experiment failed its closed-form targets.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from . import experiments as xp
from .delays import delay_from_spec
from .errors import (
    ConfigInvalidError,
    MalformedNetworkFileError,
    TreelocateError,
)
from .estimate import GridSpec, check_estimate, hat_estimate
from .reporting import (
    emit_confusion,
    emit_results,
    emit_river,
    emit_scaling,
    emit_sufficiency,
    emit_triangle,
)
from .simulate import Observation
from .tree import read_edge_list

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_VALIDATION = 4

_KIND_BY_COMMAND = {
    "confusion": "confusion",
    "scaling": "scaling_nodes",          # --vary switches to observers
    "normalized": "normalized_diameter",
    "river": "river",
    "check-vs-hat": "check_vs_hat",
    "triangle": "triangle",
    "sufficiency": "sufficiency_demo",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="master seed (required here or in the config)")
    parser.add_argument("--trials", type=int, help="trials per cell")
    parser.add_argument("--out", type=Path, help="output stem or file path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--paper-scale", action="store_true",
                        help="raise trial counts to the benchmark scale")
    parser.add_argument("--no-reduction", action="store_true",
                        help="rank every non-observer instead of the feasible classes")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    parser.add_argument("--grid-seed", type=int, help="seed for the random grid directions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treelocate",
        description="Source localization benchmarks for SI outbreaks on trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("confusion", help="path-network confusion matrices per delay model")
    _add_common(p)
    p.add_argument("--path-nodes", type=int, help="path length (default 11)")
    p.add_argument("--delay", action="append", help="delay spec JSON; repeatable")

    p = sub.add_parser("scaling", help="error vs tree size or observer count")
    _add_common(p)
    p.add_argument("--vary", choices=("nodes", "observers"), default="nodes")
    p.add_argument("--sizes", help="comma-separated tree sizes")
    p.add_argument("--observers", help="comma-separated observer counts (vary=observers)")
    p.add_argument("--n-observers", type=int, help="observers per trial (vary=nodes)")
    p.add_argument("--delay", action="append", help="delay spec JSON; repeatable")

    p = sub.add_parser("normalized", help="diameter-normalized error vs tree size")
    _add_common(p)
    p.add_argument("--sizes", help="comma-separated tree sizes")
    p.add_argument("--n-observers", type=int)
    p.add_argument("--delay", action="append")

    p = sub.add_parser("river", help="river-network source recovery heat table")
    _add_common(p)
    p.add_argument("--network", type=Path,
                   help="edge list 'u v mu sigma' (default: bundled synthetic network)")
    p.add_argument("--root", help="root label (default: first label in the file)")

    p = sub.add_parser("check-vs-hat", help="paired comparison of the two estimators")
    _add_common(p)
    p.add_argument("--sizes", help="comma-separated tree sizes")
    p.add_argument("--n-observers", type=int)

    p = sub.add_parser("triangle", help="validate the cyclic-network triangle law")
    _add_common(p)
    p.add_argument("--rates", help="semicolon-separated rate triples, e.g. '1,1,1;1,2,3'")

    p = sub.add_parser("sufficiency", help="demonstrate sufficiency loss at a star center")
    _add_common(p)
    p.add_argument("--star-leaves", type=int, help="hub fan-out (default 3)")
    p.add_argument("--delay", action="append")

    p = sub.add_parser("estimate", help="one-shot source estimate from files")
    p.add_argument("--tree-file", type=Path, required=True, help="edge list file")
    p.add_argument("--observations", type=Path, required=True,
                   help="JSON map observer label -> infection time")
    p.add_argument("--delay", help="delay spec JSON applied to every edge")
    p.add_argument("--estimator", choices=("hat", "check"), default="hat")
    p.add_argument("--no-reduction", action="store_true")
    p.add_argument("--grid-seed", type=int)
    p.add_argument("--out", type=Path, help="write the report JSON here as well")
    return parser


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigInvalidError(f"bad integer list {text!r}") from exc


def _parse_rates(text: str) -> tuple:
    try:
        return tuple(
            tuple(float(x) for x in chunk.split(","))
            for chunk in text.split(";")
            if chunk.strip()
        )
    except ValueError as exc:
        raise ConfigInvalidError(f"bad rates {text!r}") from exc


def _parse_delay_flags(values) -> tuple:
    specs = []
    for v in values or ():
        try:
            specs.append(json.loads(v))
        except json.JSONDecodeError as exc:
            raise ConfigInvalidError(f"delay spec is not valid JSON: {v!r}") from exc
    return tuple(specs)


def _load_config_file(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise ConfigInvalidError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigInvalidError("config file must hold a JSON object")
    return data


def _experiment_config(args) -> xp.ExperimentConfig:
    data = _load_config_file(args.config)
    data["kind"] = _KIND_BY_COMMAND[args.command]
    if args.command == "scaling" and args.vary == "observers":
        data["kind"] = "scaling_observers"

    if args.seed is not None:
        data["seed"] = args.seed
    if "seed" not in data:
        raise ConfigInvalidError("a seed is required (--seed or config)")
    if args.trials is not None:
        data["trials"] = args.trials
    if args.paper_scale:
        data["paper_scale"] = True
    if args.no_reduction:
        data["use_reduction"] = False
    if args.threads:
        data["threads"] = args.threads
    if args.grid_seed is not None:
        grid = data.get("grid", {})
        if isinstance(grid, dict):
            grid["seed"] = args.grid_seed
            data["grid"] = grid

    if getattr(args, "path_nodes", None):
        data["path_nodes"] = args.path_nodes
    if getattr(args, "sizes", None):
        data["sizes"] = _parse_int_list(args.sizes)
    if getattr(args, "observers", None):
        data["observer_counts"] = _parse_int_list(args.observers)
    if getattr(args, "n_observers", None):
        data["n_observers"] = args.n_observers
    if getattr(args, "rates", None):
        data["rates"] = _parse_rates(args.rates)
    if getattr(args, "star_leaves", None):
        data["star_leaves"] = args.star_leaves
    if getattr(args, "root", None):
        data["root_label"] = args.root
    if getattr(args, "network", None):
        data["network_file"] = str(args.network)
    delay_flags = _parse_delay_flags(getattr(args, "delay", None))
    if delay_flags:
        data["delays"] = delay_flags
    if args.command == "confusion" and not data.get("delays"):
        data["delays"] = xp.DEFAULT_CONFUSION_DELAYS
    return xp.config_from_dict(data)


def _default_network_path() -> Path:
    return Path(resources.files("treelocate").joinpath("data/synthetic_river_246.txt"))


def _run_experiment(args) -> int:
    cfg = _experiment_config(args)
    out = args.out or Path(f"treelocate_{cfg.kind}")
    fmt = args.format
    figures = not args.no_figures

    if cfg.kind == "confusion":
        written = emit_confusion(xp.run_confusion(cfg), out, fmt, figures)
        status = EXIT_OK
    elif cfg.kind in ("scaling_nodes", "scaling_observers"):
        written = emit_scaling(xp.run_scaling(cfg), out, fmt, figures)
        status = EXIT_OK
    elif cfg.kind == "normalized_diameter":
        written = emit_scaling(xp.run_normalized(cfg), out, fmt, figures)
        status = EXIT_OK
    elif cfg.kind == "river":
        network = Path(cfg.network_file) if cfg.network_file else _default_network_path()
        data = read_edge_list(network)
        result = xp.run_river(cfg, data)
        written = emit_river(result, out, fmt, figures)
        print(f"root fraction {result.summary['root_fraction']:.3f}; "
              f"five nearest nodes hold {result.summary['nearest5_fraction']:.3f}")
        status = EXIT_OK
    elif cfg.kind == "check_vs_hat":
        written = emit_scaling(xp.run_check_vs_hat(cfg), out, fmt, figures)
        status = EXIT_OK
    elif cfg.kind == "triangle":
        result = xp.run_triangle(cfg)
        written = emit_triangle(result, out, fmt, figures)
        print("triangle validation:", "PASS" if result.passed else "FAIL")
        status = EXIT_OK if result.passed else EXIT_VALIDATION
    elif cfg.kind == "sufficiency_demo":
        result = xp.run_sufficiency(cfg)
        written = emit_sufficiency(result, out, fmt, figures)
        print(
            f"conditional means differ by {result.summary['separation_in_se']:.1f} "
            f"standard errors: {'PASS' if result.passed else 'FAIL'}"
        )
        status = EXIT_OK if result.passed else EXIT_VALIDATION
    else:  # pragma: no cover - kinds are validated upstream
        raise ConfigInvalidError(f"unhandled kind {cfg.kind}")

    for p in written:
        print(f"wrote {p}")
    return status


def _run_estimate(args) -> int:
    data = read_edge_list(args.tree_file)
    try:
        raw = json.loads(args.observations.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedNetworkFileError(f"observation file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not raw:
        raise MalformedNetworkFileError("observation file must map labels to times")
    try:
        times = {data.node_for_label(str(k)): float(v) for k, v in raw.items()}
    except KeyError as exc:
        raise MalformedNetworkFileError(str(exc)) from exc
    obs = Observation(times=times)
    observers = sorted(times)

    if args.delay:
        try:
            delay = delay_from_spec(json.loads(args.delay))
        except (json.JSONDecodeError, ValueError) as exc:
            raise ConfigInvalidError(f"bad delay spec: {exc}") from exc
        delays = delay
    elif data.edge_params is not None and all(len(p) >= 2 for p in data.edge_params):
        from .experiments import river_delay_models

        delays = river_delay_models(data)
    else:
        raise ConfigInvalidError("provide --delay or per-edge mu/sigma columns in the tree file")

    grid = GridSpec(seed=args.grid_seed) if args.grid_seed is not None else GridSpec()
    estimator = check_estimate if args.estimator == "check" else hat_estimate
    report = estimator(data.tree, observers, delays, obs, grid, not args.no_reduction)

    payload = report.as_dict()
    payload["selected_label"] = data.labels[report.selected]
    payload["tie_labels"] = [data.labels[v] for v in report.tie_set]
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return _run_estimate(args)
        return _run_experiment(args)
    except ConfigInvalidError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, MalformedNetworkFileError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TreelocateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
