"""Acceptance gate: every criterion at its stated tolerance.

Criteria 1-5 are the fast property suite; 6-8 run the desk-scale studies
through the CLI so the reproducibility check (8) can rerun them from their
manifests. Each check prints one PASS/FAIL line before asserting, so a red
criterion still reports every other outcome.
"""

import itertools
import math
import os

import numpy as np
import pytest

import fraclap as fl
from fraclap.cli import run_cli
from fraclap.experiments import SweepConfig, _instance_points, averaged_error_curves
from fraclap.io import read_sweep_records
from tests.conftest import random_connected_instance


def report(tag, ok, detail=""):
    print(f"\nACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {tag}: {detail}"


# --- criterion 1: graph/Laplacian invariants --------------------------------


def test_criterion_1_graph_invariants():
    failures = []
    rng = np.random.default_rng(1001)
    for trial in range(100):
        _, graph = random_connected_instance(
            2000 + trial, n_low=5, n_high=60, eps_factor=1.1 + (trial % 7) * 0.25
        )
        lap = fl.graph_laplacian(graph)
        n = graph.n
        if not np.array_equal(lap, lap.T):
            failures.append((trial, "symmetry"))
        if np.abs(lap.sum(axis=1)).max() > 1e-9 * max(1.0, np.abs(lap).max()):
            failures.append((trial, "row sums"))
        vals = np.linalg.eigvalsh(lap)
        if vals[0] < -1e-8 * vals[-1]:
            failures.append((trial, "PSD"))
        W = graph.weights.copy()
        W[np.diag_indices_from(W)] += rng.random(n)
        from fraclap.graph import WeightedGraph

        bumped = WeightedGraph(
            n=n, eps=graph.eps, weights=W, degrees=W.sum(axis=1), sigma_eta=graph.sigma_eta
        )
        if np.abs(fl.graph_laplacian(bumped) - lap).max() > 1e-10 * max(1.0, np.abs(lap).max()):
            failures.append((trial, "self-loop invariance"))
        u = rng.standard_normal(n)
        lhs = fl.inner_product(u, lap @ u)
        diff = u[:, None] - u[None, :]
        rhs = np.sum(graph.weights * diff**2) / (graph.sigma_eta * n**2 * graph.eps**2)
        if abs(lhs - rhs) > 1e-8 * max(abs(rhs), 1e-300):
            failures.append((trial, "quadratic form"))
    report("1 graph invariants (100 instances)", not failures, f"violations={failures[:5]}")


# --- criterion 2: spectral ----------------------------------------------------


def test_criterion_2_spectral():
    failures = []
    # orthonormality and residual
    for trial in range(20):
        _, graph = random_connected_instance(3000 + trial, n_low=5, n_high=60)
        lap = fl.graph_laplacian(graph)
        spec = fl.eigendecompose(lap)
        n = spec.n
        gram = spec.eigenvectors.T @ spec.eigenvectors / n
        if np.abs(gram - np.eye(n)).max() > 1e-8:
            failures.append((trial, "orthonormality"))
        for k in range(n):
            psi = spec.eigenvectors[:, k]
            resid = lap @ psi - spec.eigenvalues[k] * psi
            if np.sqrt(fl.inner_product(resid, resid)) > 1e-7 * (1 + spec.eigenvalues[k]):
                failures.append((trial, f"residual k={k}"))
                break
    # integer-power oracle
    rng = np.random.default_rng(1002)
    for trial in range(10):
        _, graph = random_connected_instance(3100 + trial, n_low=5, n_high=40)
        lap = fl.graph_laplacian(graph)
        spec = fl.eigendecompose(lap)
        u = rng.standard_normal(spec.n)
        M = np.eye(spec.n)
        for s in (1, 2, 3):
            M = M @ lap
            direct = fl.inner_product(u, M @ u)
            got = fl.fractional_energy(spec, u, float(s))
            if abs(got - direct) > 1e-7 * max(abs(direct), 1e-300):
                failures.append((trial, f"oracle s={s}"))
    # Minkowski on 200 triples
    checked = 0
    trial = 0
    while checked < 200:
        _, graph = random_connected_instance(3200 + trial, n_low=5, n_high=50)
        spec = fl.eigendecompose(fl.graph_laplacian(graph))
        u = rng.standard_normal(spec.n)
        v = rng.standard_normal(spec.n)
        for s in (0.5, 1.0, 2.0, 7.0, 16.0):
            lhs = math.sqrt(fl.fractional_energy(spec, u + v, s))
            rhs = math.sqrt(fl.fractional_energy(spec, u, s)) + math.sqrt(
                fl.fractional_energy(spec, v, s)
            )
            if lhs > rhs + 1e-9:
                failures.append((trial, f"Minkowski s={s}"))
        checked += 5
        trial += 1
    # Dirac bound on every node of 20 graphs
    for trial in range(20):
        _, graph = random_connected_instance(3300 + trial, n_low=5, n_high=40)
        spec = fl.eigendecompose(fl.graph_laplacian(graph))
        lam_max = spec.eigenvalues[-1]
        for s in (1.0, 2.5):
            bound = lam_max**s / spec.n
            for i in range(spec.n):
                delta = np.zeros(spec.n)
                delta[i] = 1.0
                if fl.fractional_energy(spec, delta, s) > bound + 1e-9:
                    failures.append((trial, f"dirac i={i} s={s}"))
    report("2 spectral invariants", not failures, f"violations={failures[:5]}")


# --- criterion 3: solver ------------------------------------------------------


def test_criterion_3_solver():
    failures = []
    rng = np.random.default_rng(1003)
    for trial in range(50):
        _, graph = random_connected_instance(4000 + trial, n_low=6, n_high=30)
        lap = fl.graph_laplacian(graph)
        spec = fl.eigendecompose(lap)
        k = int(rng.integers(1, min(5, spec.n)))
        idx = rng.choice(spec.n, size=k, replace=False)
        vals = rng.standard_normal(k)
        cs = fl.ConstraintSet(idx, vals)
        s = int(rng.choice([1, 2, 4]))
        u = fl.solve_constrained(spec, cs, float(s))
        v = fl.brute_force_oracle(lap, cs, s)
        if np.abs(u.values - v).max() > 1e-7:
            failures.append((trial, "oracle agreement"))
    # shift/scale equivariance + perturbation optimality on a fixed instance
    _, graph = random_connected_instance(4100, n_low=25, n_high=25)
    spec = fl.eigendecompose(fl.graph_laplacian(graph))
    base_cs = fl.ConstraintSet([0, 3], [0.2, 1.4])
    for s in (2.0, 16.0):
        u = fl.solve_constrained(spec, base_cs, s)
        shifted = fl.solve_constrained(spec, fl.ConstraintSet([0, 3], [2.7, 3.9]), s)
        if np.abs(shifted.values - (u.values + 2.5)).max() > 1e-7:
            failures.append((s, "shift equivariance"))
        scaled = fl.solve_constrained(spec, fl.ConstraintSet([0, 3], [-0.6, -4.2]), s)
        if np.abs(scaled.values - (-3.0 * u.values)).max() > 1e-6 * (1 + np.abs(u.values).max()):
            failures.append((s, "scale equivariance"))
        base = fl.fractional_energy(spec, u.values, s)
        for _ in range(100):
            v = rng.standard_normal(spec.n)
            v[[0, 3]] = 0.0
            for t in (-1.0, -1e-2, 1e-2, 1.0):
                if fl.fractional_energy(spec, u.values + t * v, s) < base - 1e-9:
                    failures.append((s, "perturbation optimality"))
    report("3 solver", not failures, f"violations={failures[:5]}")


# --- criterion 4: continuum ---------------------------------------------------


def test_criterion_4_continuum():
    failures = []
    spec = fl.continuum_spectrum(fl.PeriodicGrid(m=100, d=2), "finite-difference")
    rel = abs(spec.eigenvalues[1] - 4 * math.pi**2) / (4 * math.pi**2)
    if rel > 3.7e-4:
        failures.append(("fd eigenvalue", rel))
    lams = fl.analytic_eigenvalues(2000, d=2)
    ks = np.arange(2, 2001)
    ratios = lams[1:] / (4 * math.pi**2 * ks)
    if ratios.min() < 0.2 - 1e-12 or ratios.max() > 5.0 + 1e-12:
        failures.append(("weyl sandwich", (ratios.min(), ratios.max())))
    u = fl.solve_continuum_constrained(spec, [((0.1, 0.1), 0.0), ((0.9, 0.9), 1.0)], 16.0)
    if abs(u[50, 50] - 0.5) > 1e-6:
        failures.append(("midpoint symmetry", u[50, 50]))
    report("4 continuum", not failures, f"violations={failures}")


# --- criterion 5: TL2 ---------------------------------------------------------


def test_criterion_5_tl2():
    failures = []
    rng = np.random.default_rng(1005)
    for trial in range(40):
        n = int(rng.integers(2, 8))
        d = int(rng.integers(1, 3))
        a = fl.EmpiricalPair(fl.SampleSet(rng.random((n, d)), dim=d), rng.standard_normal(n))
        b = fl.EmpiricalPair(fl.SampleSet(rng.random((n, d)), dim=d), rng.standard_normal(n))
        got = fl.tl2_distance(a, b)
        best = math.inf
        for perm in itertools.permutations(range(n)):
            total = 0.0
            for i, j in enumerate(perm):
                total += (
                    fl.torus_distance(a.points.points[i], b.points.points[j]) ** 2
                    + (a.values[i] - b.values[j]) ** 2
                )
            best = min(best, total / n)
        if abs(got - best) > 1e-12 * max(1.0, best):
            failures.append((trial, "brute force"))
        if abs(fl.tl2_distance(b, a) - got) > 1e-12 * max(1.0, got):
            failures.append((trial, "symmetry"))
        if fl.tl2_distance(a, a) > 1e-12:
            failures.append((trial, "identity"))
    report("5 TL2", not failures, f"violations={failures[:5]}")


# --- criteria 6-8: desk-scale studies through the CLI -------------------------

SWEEP_ARGS = ["--n-values", "100,200,400,800", "--s", "16", "--reps", "10",
              "--eps-count", "40", "--seed", "0"]
EIGENS_ARGS = ["--n-values", "400,600,800,1000,1200", "--reps", "10",
               "--alpha", "4", "--seed", "0"]


@pytest.fixture(scope="module")
def sweep_run(tmp_path_factory):
    out_dir = str(tmp_path_factory.mktemp("sweep"))
    rc = run_cli(["sweep", *SWEEP_ARGS, "--out-dir", out_dir])
    assert rc == 0, "desk-scale sweep failed to run"
    return out_dir


@pytest.fixture(scope="module")
def eigens_run(tmp_path_factory):
    out_dir = str(tmp_path_factory.mktemp("eigens"))
    rc = run_cli(["eigens", *EIGENS_ARGS, "--out-dir", out_dir])
    assert rc == 0, "desk-scale growth study failed to run"
    return out_dir


def _sweep_curves(out_dir):
    records = read_sweep_records(os.path.join(out_dir, "records.csv"))
    cfg = SweepConfig(n_values=(100, 200, 400, 800), s=16.0, reps=10, base_seed=0)
    return averaged_error_curves(cfg, records)


def _read_table(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return header, rows


def test_criterion_6a_transitions_detected(sweep_run):
    header, rows = _read_table(os.path.join(sweep_run, "transitions.csv"))
    detected = sorted(int(r[0]) for r in rows)
    curves = _sweep_curves(sweep_run)
    non_monotone = all(
        np.any(np.diff(err) < 0) and np.any(np.diff(err) > 0) for _, err in curves.values()
    )
    ok = detected == [100, 200, 400, 800] and non_monotone
    report("6a transition detected per n", ok, f"detected={detected} non_monotone={non_monotone}")


def test_criterion_6b_plateau_ratio(sweep_run):
    curves = _sweep_curves(sweep_run)
    ratios = {n: float(err[-1] / err.min()) for n, (_, err) in curves.items()}
    checked = {n: r for n, r in ratios.items() if n >= 400}
    ok = all(r >= 2.0 for r in checked.values())
    report(
        "6b ill-posed/minimum error ratio >= 2 (n >= 400)",
        ok,
        f"ratios={ {n: round(r, 3) for n, r in ratios.items()} } "
        "(known desk-scale shortfall, see README)",
    )


def _fits(out_dir):
    _, rows = _read_table(os.path.join(out_dir, "fits.csv"))
    return {r[0]: (float(r[1]), float(r[2])) if r[1] else None for r in rows}


def test_criterion_6c_eps_hat_exponent(sweep_run):
    fits = _fits(sweep_run)
    c, a = fits["eps_hat"]
    ok = 0.02 <= a <= 0.12
    report("6c eps_hat exponent in [0.02, 0.12]", ok, f"fit: {c:.4f}/n^{a:.4f} (full-scale reference 0.6541/n^0.05)")


def test_criterion_6d_eps_star_exponent(sweep_run):
    fits = _fits(sweep_run)
    c, a = fits["eps_star"]
    ok = 0.02 <= a <= 0.14
    report("6d eps_star exponent in [0.02, 0.14]", ok, f"fit: {c:.4f}/n^{a:.4f} (full-scale reference 0.7312/n^0.06)")


def test_criterion_7_growth_slopes(eigens_run):
    fits = _fits(eigens_run)
    slope = {int(k): v[1] for k, v in fits.items() if v is not None}
    ok4 = -0.10 <= slope.get(4, math.inf) <= 0.10
    report("7 (k4) slope in [-0.10, 0.10]", ok4, f"slope={slope.get(4):+.4f} (full-scale reference +0.01)")


def test_criterion_7_k2_slope(eigens_run):
    fits = _fits(eigens_run)
    slope = fits["2"][1]
    ok = -1.0 <= slope <= -0.3
    report(
        "7 (k2) slope in [-1.0, -0.3]",
        ok,
        f"slope={slope:+.4f} (full-scale reference -0.63; known desk-scale shortfall, see README)",
    )


def test_criterion_7_k3_slope(eigens_run):
    fits = _fits(eigens_run)
    slope = fits["3"][1]
    ok = -0.3 <= slope <= 0.05
    report("7 (k3) slope in [-0.3, 0.05]", ok, f"slope={slope:+.4f} (full-scale reference -0.08)")


def test_criterion_8_reproducibility(sweep_run, eigens_run, tmp_path_factory):
    mismatches = []
    sweep_twin = str(tmp_path_factory.mktemp("sweep_rerun"))
    rc = run_cli(["rerun", os.path.join(sweep_run, "manifest.json"), "--out-dir", sweep_twin])
    if rc != 0:
        mismatches.append("sweep rerun failed")
    else:
        for name in ("records.csv", "transitions.csv", "fits.csv"):
            a = open(os.path.join(sweep_run, name), "rb").read()
            b = open(os.path.join(sweep_twin, name), "rb").read()
            if a != b:
                mismatches.append(f"sweep {name}")
    eig_twin = str(tmp_path_factory.mktemp("eigens_rerun"))
    rc = run_cli(["rerun", os.path.join(eigens_run, "manifest.json"), "--out-dir", eig_twin])
    if rc != 0:
        mismatches.append("eigens rerun failed")
    else:
        for name in ("records.csv", "fits.csv"):
            a = open(os.path.join(eigens_run, name), "rb").read()
            b = open(os.path.join(eig_twin, name), "rb").read()
            if a != b:
                mismatches.append(f"eigens {name}")
    report("8 manifest reruns byte-identical", not mismatches, f"mismatches={mismatches}")


# --- extra invariant: qualitative Poincare bound over transition-study solves --


def test_poincare_ratio_non_divergent():
    cfg = SweepConfig(n_values=(100, 200, 400, 800), reps=1, base_seed=0)
    ratios = []
    for n in cfg.n_values:
        _, pts = _instance_points(cfg, n, 0)
        dist = fl.pairwise_distances(pts.points)
        eps = 1.3 * fl.connectivity_radius(pts, distances=dist)
        graph = fl.build_weight_matrix(pts, eps, fl.Kernel.indicator(), distances=dist)
        spec = fl.eigendecompose(fl.graph_laplacian(graph))
        sol = fl.solve_constrained(spec, fl.ConstraintSet([0, 1], [0.0, 1.0]), 16.0)
        u_bar = sol.values[:2].mean()
        ratios.append(float(np.abs(sol.values - u_bar).max() / math.sqrt(sol.energy)))
    print(f"\npoincare ratios across n: {[f'{r:.3e}' for r in ratios]}")
    assert ratios[-1] <= 10.0 * ratios[0]
