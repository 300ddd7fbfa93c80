"""Experiment execution: single collisions, sweeps, and S-matrix dumps.

Sweeps parallelize over sweep values with a thread pool; every value's
computation is self-contained (its own quadrature workspace), solvers are
shared read-mostly through a keyed cache, and output rows are assembled in
config order so the CSV bytes do not depend on scheduling.
"""
from __future__ import annotations

import csv
import io
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import ExperimentConfig
from .kinetics import classify_regime
from .maps import (
    apply_map,
    magnus_first_order,
    random_unitary_map,
    scattering_map_tensor,
    semiclassical_collision,
    time_dependent_evolve,
)
from .smatrix import MultichannelSolver
from .thermo import CollisionReport, build_report, energy_change

CSV_COLUMNS = (
    "sweep_var", "value", "model", "pop_upup", "re_coh", "im_coh",
    "deltaE", "deltaS", "work", "trace_defect", "runtime_ms", "error",
)


class _SolverCache:
    """Thread-safe cache of multichannel solvers keyed by their inputs.

    Within a sweep the potential usually changes per value (lambda sweeps)
    but stays fixed across sigma_x values, where sharing the pre-solved
    energy grid is the dominant saving.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._solvers: dict = {}

    def get(self, config: ExperimentConfig) -> MultichannelSolver:
        key = (config.spatial.cache_key(), config.ode_tol, config.mass)
        with self._lock:
            solver = self._solvers.get(key)
            if solver is None:
                solver = MultichannelSolver(
                    config.system, config.nu, config.spatial,
                    ode_tol=config.ode_tol, mass=config.mass)
                self._solvers[key] = solver
            return solver


def run_model(
    config: ExperimentConfig,
    model: str,
    solver_cache: _SolverCache | None = None,
) -> CollisionReport:
    """Run one model on the configured initial state and report."""
    system = config.system
    rho0 = config.rho_joint
    regime = None
    if config.spatial is not None:
        regime = classify_regime(config.kinetic_state(), system, config.spatial)

    if model == "exact_sm":
        solver = (solver_cache or _SolverCache()).get(config)
        tensor = scattering_map_tensor(
            system, config.nu, config.spatial, config.kinetic_state(),
            config.quadrature, ode_tol=config.ode_tol, solver=solver)
        applied = apply_map(tensor, rho0)
        return build_report(
            model, system, rho0, applied.rho,
            diagnostics={
                "trace_defect": applied.trace_defect,
                "hermiticity_defect": applied.hermiticity_defect,
                "quadrature_nodes": tensor.nodes_used,
            },
            regime=regime)

    if model == "random_unitary":
        rho1 = random_unitary_map(
            system, config.nu, config.spatial, config.kinetic_state(),
            rho0, config.quadrature)
        return build_report(model, system, rho0, rho1, regime=regime)

    if model == "semiclassical":
        rho1 = semiclassical_collision(
            system, config.nu, config.spatial.mean, config.p0,
            config.spatial.a, rho0, mass=config.mass)
        work = energy_change(system, rho0, rho1)
        return build_report(model, system, rho0, rho1, work=work, regime=regime)

    if model == "time_dependent":
        result = time_dependent_evolve(
            system, config.nu, config.temporal, rho0, ode_tol=config.ode_tol)
        work = energy_change(system, rho0, result.rho)
        return build_report(
            model, system, rho0, result.rho, work=work,
            diagnostics={"propagator_unitarity_defect": result.unitarity_defect},
            regime=regime)

    if model == "magnus1":
        u = magnus_first_order(system, config.nu, config.temporal)
        rho1 = rho0.conjugated(u)
        work = energy_change(system, rho0, rho1)
        return build_report(model, system, rho0, rho1, work=work, regime=regime)

    raise ValueError(f"unknown model {model!r}")


def run_single(config: ExperimentConfig) -> dict[str, CollisionReport]:
    """Run every configured model on the same initial state."""
    cache = _SolverCache()
    return {model: run_model(config, model, cache) for model in config.models}


def _config_for_value(config: ExperimentConfig, value: float) -> ExperimentConfig:
    if config.sweep_variable == "lambda":
        return config.with_lambda(value)
    if config.sweep_variable == "sigma_x":
        return config.with_sigma_x(value)
    raise ValueError("config has no sweep")


def _format(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _rows_for_value(
    config: ExperimentConfig, value: float, cache: _SolverCache
) -> list[dict[str, str]]:
    sub = _config_for_value(config, value)
    rows = []
    n = config.system.dim
    labels = config.system.labels
    for model in config.models:
        start = time.perf_counter()
        row = {c: "" for c in CSV_COLUMNS}
        row["sweep_var"] = config.sweep_variable
        row["value"] = _format(value)
        row["model"] = model
        try:
            report = run_model(sub, model, cache)
            if labels is not None:
                pop = report.populations["upup"]
                coh = report.coherences["dndn_upup"]
            else:
                pop = report.populations[str(n - 1)]
                coh = report.coherences[f"0_{n - 1}"]
            row["pop_upup"] = _format(pop)
            row["re_coh"] = _format(coh.real)
            row["im_coh"] = _format(coh.imag)
            row["deltaE"] = _format(report.delta_e)
            row["deltaS"] = _format(report.delta_s)
            row["work"] = _format(report.work)
            row["trace_defect"] = _format(report.diagnostics.get("trace_defect"))
        except Exception as exc:  # partial failure: flag the row, keep sweeping
            row["error"] = f"{type(exc).__name__}: {exc}"
        row["runtime_ms"] = _format(1e3 * (time.perf_counter() - start))
        rows.append(row)
    return rows


def run_sweep(config: ExperimentConfig, threads: int = 1) -> str:
    """Execute the configured sweep and return the CSV text.

    Rows appear in (sweep value, model) config order regardless of worker
    scheduling; runtime_ms is the only column allowed to differ between
    otherwise identical runs.
    """
    if config.sweep_variable is None:
        raise ValueError("config has no [sweep] table")
    cache = _SolverCache()
    values = config.sweep_values
    results: list[list[dict[str, str]] | None] = [None] * len(values)
    if threads <= 1:
        for i, v in enumerate(values):
            results[i] = _rows_for_value(config, v, cache)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(_rows_for_value, config, v, cache): i
                for i, v in enumerate(values)
            }
            for fut, i in futures.items():
                results[i] = fut.result()
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rows in results:
        for row in rows:
            writer.writerow(row)
    return buf.getvalue()


def dump_smatrix(config: ExperimentConfig, n_energies: int | None = None) -> str:
    """Exact S-matrix blocks over the experiment's energy window, as CSV.

    One row per (energy, block, row, col) with the flux-normalized complex
    entry and the per-energy unitarity defect.
    """
    from .maps import _energy_range, _momentum_window  # shared windowing

    if config.spatial is None:
        raise ValueError("S-matrix dump requires a spatial potential")
    state = config.kinetic_state()
    p_lo, p_hi = _momentum_window(state, config.quadrature)
    e_lo, e_hi = _energy_range(config.system, state, p_lo, p_hi)
    n_e = n_energies if n_energies is not None else config.quadrature.grid_points
    energies = np.linspace(e_lo, e_hi, int(n_e))
    solver = MultichannelSolver(
        config.system, config.nu, config.spatial,
        ode_tol=config.ode_tol, mass=config.mass)
    solved = solver.solve_many(energies)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["E", "block", "row", "col", "re", "im", "unitarity_defect"])
    n = config.system.dim
    for sm in solved:
        for name, block in (("t", sm.t), ("r", sm.r), ("tbar", sm.tbar), ("rbar", sm.rbar)):
            for i in range(n):
                for j in range(n):
                    writer.writerow([
                        repr(sm.energy), name, i, j,
                        repr(block[i, j].real), repr(block[i, j].imag),
                        repr(sm.defect),
                    ])
    return buf.getvalue()
