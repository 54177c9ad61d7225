"""Command line front end.

Subcommands: solve (one constrained graph solve), continuum (grid solve),
sweep (transition study), eigens (growth study), tlp (distance between two
point/value files) and rerun (reproduce a recorded manifest).

Flags may come from a flat JSON config (--config); explicit flags override
file values and unknown config keys are rejected. Every run that writes
outputs also writes a manifest with all resolved parameters, so reruns are
byte-identical. Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .cache import save_eigencache
from .continuum import PeriodicGrid, continuum_spectrum, solve_continuum_constrained
from .experiments import (
    DEFAULT_LABELS,
    SweepConfig,
    eigen_growth_experiment,
    run_sweep,
    transition_study,
)
from .graph import Kernel, build_weight_matrix, graph_laplacian, is_connected
from .io import (
    read_manifest,
    read_point_values,
    write_eigen_rows,
    write_fits,
    write_grid_csv,
    write_manifest,
    write_point_values,
    write_sweep_records,
    write_transitions,
)
from .solver import ConstraintSet, solve_constrained
from .spectral import eigendecompose
from .tlp import EmpiricalPair, tl2_distance
from .torus import SampleSet, sample_uniform, wrap


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v != ""]


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v != ""]


@dataclass(frozen=True)
class Param:
    name: str
    convert: type
    default: object = None
    required: bool = False
    help: str = ""


_SCHEMAS = {
    "solve": [
        Param("n", int, required=True, help="total node count, labeled points included"),
        Param("eps", float, required=True, help="graph length scale"),
        Param("s", float, 16.0, help="fractional exponent"),
        Param("seed", int, 0, help="sampling seed"),
        Param("d", int, 2, help="torus dimension"),
        Param("labels", str, required=True, help="labels CSV (x1,..,xd,label)"),
        Param("out", str, required=True, help="output node-values CSV"),
        Param("cache", str, None, help="optional eigencache output path"),
    ],
    "continuum": [
        Param("m", int, 100, help="grid nodes per axis"),
        Param("s", float, 16.0, help="fractional exponent"),
        Param("labels", str, required=True, help="labels CSV (x1,x2,label)"),
        Param("out", str, required=True, help="output grid CSV (m rows x m cols)"),
    ],
    "sweep": [
        Param("n_values", _int_list, required=True, help="comma-separated n list"),
        Param("s", float, 16.0),
        Param("reps", int, 10),
        Param("seed", int, 0),
        Param("d", int, 2),
        Param("grid_m", int, 100),
        Param("labels", str, None, help="labels CSV; default (0.1,0.1)->0, (0.9,0.9)->1"),
        Param("eps_values", _float_list, None, help="explicit eps grid"),
        Param("eps_count", int, 40),
        Param("eps_lo_factor", float, 1.05),
        Param("eps_hi_factor", float, 3.0),
        Param("bandwidth", float, None, help="smoothing bandwidth in log eps"),
        Param("out_dir", str, required=True),
    ],
    "eigens": [
        Param("n_values", _int_list, required=True),
        Param("reps", int, 10),
        Param("alpha", float, 4.0),
        Param("seed", int, 0),
        Param("d", int, 2),
        Param("out_dir", str, required=True),
    ],
    "tlp": [
        Param("a", str, required=True, help="first point/value CSV"),
        Param("b", str, required=True, help="second point/value CSV"),
        Param("d", int, 2),
        Param("out", str, None, help="optional output file for the distance"),
    ],
}

_UNSET = object()


def _build_parser() -> _Parser:
    parser = _Parser(prog="fraclap", description=__doc__)
    parser.add_argument("--version", action="version", version=f"fraclap {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    for name, schema in _SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config file; flags override")
        for param in schema:
            flag = "--" + param.name.replace("_", "-")
            p.add_argument(flag, dest=param.name, default=_UNSET, help=param.help)
    rerun = sub.add_parser("rerun")
    rerun.add_argument("manifest", help="manifest.json of a previous run")
    rerun.add_argument("--out", default=None, help="override the output path")
    rerun.add_argument("--out-dir", dest="out_dir", default=None, help="override the output dir")
    return parser


def _resolve_params(subcommand: str, namespace) -> dict:
    schema = _SCHEMAS[subcommand]
    by_name = {p.name: p for p in schema}
    resolved = {p.name: p.default for p in schema}
    config_path = getattr(namespace, "config", None)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a flat JSON object")
        for key, value in file_values.items():
            if key not in by_name:
                raise UsageError(f"unknown config key: {key!r}")
            resolved[key] = _convert(by_name[key], value)
    for param in schema:
        given = getattr(namespace, param.name)
        if given is not _UNSET:
            resolved[param.name] = _convert(param, given)
    missing = [p.name for p in schema if p.required and resolved[p.name] is None]
    if missing:
        raise UsageError(f"missing required options: {', '.join(missing)}")
    return resolved


def _convert(param: Param, value):
    if value is None:
        return None
    if param.convert in (_int_list, _float_list) and isinstance(value, (list, tuple)):
        return [(int if param.convert is _int_list else float)(v) for v in value]
    try:
        return param.convert(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for --{param.name.replace('_', '-')}: {exc}") from exc


def _read_labels(path, d):
    points, values = read_point_values(path, d)
    return tuple((tuple(p), float(v)) for p, v in zip(points, values))


def _check_writable(path) -> None:
    """Resolve the output location before any compute starts."""
    parent = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(parent):
        raise UsageError(f"output directory does not exist: {parent}")


def _exec_solve(params: dict) -> None:
    _check_writable(params["out"])
    if params["cache"]:
        _check_writable(params["cache"])
    d = params["d"]
    label_points, label_values = read_point_values(params["labels"], d)
    N = label_values.shape[0]
    if params["n"] <= N:
        raise UsageError(f"--n must exceed the {N} labeled points")
    random_points = sample_uniform(params["n"] - N, d, params["seed"]).points
    samples = SampleSet(points=np.vstack([wrap(label_points), random_points]), dim=d)
    graph = build_weight_matrix(samples, params["eps"], Kernel.indicator())
    if not is_connected(graph):
        raise NumericalError(f"graph disconnected at eps={params['eps']}")
    spec = eigendecompose(graph_laplacian(graph))
    solution = solve_constrained(spec, ConstraintSet(np.arange(N), label_values), params["s"])
    write_point_values(samples.points, solution.values, params["out"])
    if params["cache"]:
        save_eigencache(
            params["cache"], spec, d=d, eps=params["eps"], seed=params["seed"]
        )
    write_manifest(params["out"] + ".manifest.json", "solve", params)


def _exec_continuum(params: dict) -> None:
    _check_writable(params["out"])
    labels = _read_labels(params["labels"], 2)
    spec = continuum_spectrum(PeriodicGrid(m=params["m"], d=2), "finite-difference")
    u = solve_continuum_constrained(spec, labels, params["s"])
    write_grid_csv(u, params["out"])
    write_manifest(params["out"] + ".manifest.json", "continuum", params)


def _sweep_config(params: dict) -> SweepConfig:
    labels = DEFAULT_LABELS if params["labels"] is None else _read_labels(params["labels"], params["d"])
    return SweepConfig(
        n_values=tuple(params["n_values"]),
        s=params["s"],
        reps=params["reps"],
        base_seed=params["seed"],
        labels=labels,
        dim=params["d"],
        grid_m=params["grid_m"],
        eps_values=None if params["eps_values"] is None else tuple(params["eps_values"]),
        eps_count=params["eps_count"],
        eps_lo_factor=params["eps_lo_factor"],
        eps_hi_factor=params["eps_hi_factor"],
        bandwidth=params["bandwidth"],
    )


def _exec_sweep(params: dict) -> None:
    out_dir = params["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    cfg = _sweep_config(params)
    records = run_sweep(cfg)
    if not any(r.connected for r in records):
        raise NumericalError("no connected instances")
    # records and manifest land before the fallible detection step, so a
    # failed study still leaves a reproducible trace
    write_sweep_records(records, os.path.join(out_dir, "records.csv"))
    write_manifest(os.path.join(out_dir, "manifest.json"), "sweep", params)
    try:
        results, fits = transition_study(cfg, records)
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
    write_transitions(results, os.path.join(out_dir, "transitions.csv"))
    write_fits(fits, os.path.join(out_dir, "fits.csv"))


def _exec_eigens(params: dict) -> None:
    out_dir = params["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    result = eigen_growth_experiment(
        params["n_values"],
        alpha=params["alpha"],
        reps=params["reps"],
        base_seed=params["seed"],
        dim=params["d"],
    )
    write_eigen_rows(result.rows, os.path.join(out_dir, "records.csv"))
    write_fits(result.fits, os.path.join(out_dir, "fits.csv"), key_name="regime")
    write_manifest(os.path.join(out_dir, "manifest.json"), "eigens", params)


def _exec_tlp(params: dict) -> None:
    if params["out"]:
        _check_writable(params["out"])
    d = params["d"]
    pts_a, vals_a = read_point_values(params["a"], d)
    pts_b, vals_b = read_point_values(params["b"], d)
    a = EmpiricalPair(points=SampleSet(points=pts_a, dim=d), values=vals_a)
    b = EmpiricalPair(points=SampleSet(points=pts_b, dim=d), values=vals_b)
    try:
        distance = tl2_distance(a, b)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(repr(distance))
    if params["out"]:
        with open(params["out"], "w", encoding="utf-8") as fh:
            fh.write(repr(distance) + "\n")
        write_manifest(params["out"] + ".manifest.json", "tlp", params)


_EXECUTORS = {
    "solve": _exec_solve,
    "continuum": _exec_continuum,
    "sweep": _exec_sweep,
    "eigens": _exec_eigens,
    "tlp": _exec_tlp,
}


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        namespace = parser.parse_args(argv)
        if namespace.subcommand is None:
            raise UsageError("a subcommand is required")
        if namespace.subcommand == "rerun":
            manifest = read_manifest(namespace.manifest)
            subcommand = manifest["subcommand"]
            if subcommand not in _EXECUTORS:
                raise UsageError(f"manifest names unknown subcommand {subcommand!r}")
            params = dict(manifest["params"])
            if namespace.out is not None and "out" in params:
                params["out"] = namespace.out
            if namespace.out_dir is not None and "out_dir" in params:
                params["out_dir"] = namespace.out_dir
            _EXECUTORS[subcommand](params)
        else:
            params = _resolve_params(namespace.subcommand, namespace)
            _EXECUTORS[namespace.subcommand](params)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
