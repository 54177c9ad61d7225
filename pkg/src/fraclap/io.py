"""CSV and manifest plumbing for the run harness.

Floats are written with shortest round-trip formatting (Python repr), so a
rerun that reproduces the same values reproduces the same bytes; diff-based
reproducibility checks can therefore be exact. Rows are emitted in a fixed
sort order regardless of compute order.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import __version__
from .experiments import SweepRecord

SWEEP_HEADER = "n,eps,rep,seed,connected,err,energy"
TRANSITION_HEADER = "n,eps_argmin,eps_hat,eps_star"
EIGEN_HEADER = "n,rep,eps_conn,regime,k_star,lambda_kstar,psi_inf_norm"


def _fmt(value) -> str:
    """Shortest round-trip decimal; NaN renders as an empty field."""
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_records(records, path) -> None:
    """Write a homogeneous record list, dispatching on its schema."""
    records = list(records)
    if not records or isinstance(records[0], SweepRecord):
        write_sweep_records(records, path)
    elif hasattr(records[0], "eps_argmin"):
        write_transitions(records, path)
    elif hasattr(records[0], "psi_inf_norm"):
        write_eigen_rows(records, path)
    else:
        raise TypeError(f"unknown record type: {type(records[0]).__name__}")


def write_sweep_records(records, path) -> None:
    """Write sweep records sorted by (n, eps, rep); err/energy empty if unusable."""
    rows = sorted(records, key=lambda r: (r.n, r.eps, r.rep))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.n},{_fmt(r.eps)},{r.rep},{r.seed},"
                f"{'true' if r.connected else 'false'},{_fmt(r.err)},{_fmt(r.energy)}\n"
            )


def read_sweep_records(path) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SWEEP_HEADER:
            raise ValueError(f"unexpected sweep header: {header!r}")
        for line in fh:
            n, eps, rep, seed, connected, err, energy = line.rstrip("\n").split(",")
            records.append(
                SweepRecord(
                    n=int(n),
                    eps=float(eps),
                    rep=int(rep),
                    seed=int(seed),
                    connected=connected == "true",
                    err=float(err) if err else math.nan,
                    energy=float(energy) if energy else math.nan,
                )
            )
    return records


def write_transitions(results, path) -> None:
    rows = sorted(results, key=lambda r: r.n)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRANSITION_HEADER + "\n")
        for r in rows:
            fh.write(f"{r.n},{_fmt(r.eps_argmin)},{_fmt(r.eps_hat)},{_fmt(r.eps_star)}\n")


def write_eigen_rows(rows, path) -> None:
    rows = sorted(rows, key=lambda r: (r.n, r.rep, r.regime))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EIGEN_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.n},{r.rep},{_fmt(r.eps_conn)},{r.regime},{r.k_star},"
                f"{_fmt(r.lambda_kstar)},{_fmt(r.psi_inf_norm)}\n"
            )


def write_fits(fits: dict, path, key_name: str = "quantity") -> None:
    """Fits CSV: one row per fitted quantity with (coefficient, exponent).

    A quantity whose fit was degenerate (value None) gets empty fields.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{key_name},coefficient,exponent\n")
        for key in sorted(fits, key=str):
            if fits[key] is None:
                fh.write(f"{key},,\n")
                continue
            c, a = fits[key]
            fh.write(f"{key},{_fmt(c)},{_fmt(a)}\n")


def write_grid_csv(grid_fn: np.ndarray, path) -> None:
    """Row-major m x m CSV of a 2-d grid function, no header."""
    if grid_fn.ndim != 2:
        raise ValueError("grid CSV output is defined for 2-d grids")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in grid_fn:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_grid_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        rows = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    return np.array(rows)


def write_point_values(points: np.ndarray, values, path, value_name: str = "value") -> None:
    """Point/value CSV: header x1,..,xd,<value_name>, one node per row."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float).reshape(-1)
    d = points.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"x{i + 1}" for i in range(d)) + f",{value_name}\n")
        for row, v in zip(points, values):
            fh.write(",".join(_fmt(c) for c in row) + f",{_fmt(v)}\n")


def read_point_values(path, d: int):
    """Read a labels-style CSV (header x1,..,xd,label or ...,value)."""
    expected_xs = [f"x{i + 1}" for i in range(d)]
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if len(header) != d + 1 or header[:d] != expected_xs or header[d] not in ("label", "value"):
            raise ValueError(
                f"bad header {header!r}: expected {','.join(expected_xs)},label|value"
            )
        points, values = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != d + 1:
                raise ValueError(f"line {lineno}: expected {d + 1} columns, got {len(fields)}")
            try:
                row = [float(f) for f in fields]
            except ValueError as exc:
                raise ValueError(f"line {lineno}: malformed value ({exc})") from None
            if not all(np.isfinite(row)):
                raise ValueError(f"line {lineno}: non-finite value")
            points.append(row[:d])
            values.append(row[d])
    if not points:
        raise ValueError("empty point/value file")
    return np.array(points), np.array(values)


def write_manifest(path, subcommand: str, params: dict) -> None:
    """Record everything needed to reproduce a run byte-identically."""
    payload = {
        "library_version": __version__,
        "subcommand": subcommand,
        "params": params,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    for key in ("library_version", "subcommand", "params"):
        if key not in payload:
            raise ValueError(f"manifest missing key {key!r}")
    return payload
