"""
studies module - Study runners behind the command-line subcommands

Each runner takes a Scenario and an output directory, writes its CSV and JSON files
atomically, and returns the JSON summary it wrote. Work over refinement levels runs
on a thread pool; results are collected in level order, so outputs do not depend on
the number of workers. A failed check raises InvariantViolation after all outputs
have been written.

This module is licensed under the MIT License.
"""

import dataclasses
import json
import logging
import math
import os
import tempfile
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import pairwise
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from scipy import stats

from pairwise_graphlimit import __version__
from pairwise_graphlimit.config import Scenario
from pairwise_graphlimit.dynamics import DiscreteState, Dynamics
from pairwise_graphlimit.embedding import ConvergenceReport, ConvergenceRow, CubeLabeling, Embedding
from pairwise_graphlimit.errors import InvariantViolation
from pairwise_graphlimit.graph_limit import GraphLimit
from pairwise_graphlimit.grid import ContinuumTrajectory
from pairwise_graphlimit.integrator import Integrator, Trajectory
from pairwise_graphlimit.kernels import InfluenceKernel, ModelParams, SignMap
from pairwise_graphlimit.meanfield import MAX_TRANSPORT_ATOMS, MeanField
from pairwise_graphlimit.picard import PicardSolver
from pairwise_graphlimit.rng import RandomStreams, random_state

logger = logging.getLogger(__name__)

CROSS_VALIDATION_TOLERANCE = 1e-6
MASS_MEAN_TOLERANCE = 1e-10
W1_AGREEMENT_TOLERANCE = 1e-9
BENCH_EQUALITY_TOLERANCE = 1e-10
BENCH_TIMED_FROM = 128
FACTORIZED_RATIO_BAND = (3.0, 6.0)
BRUTEFORCE_RATIO_BAND = (6.0, 12.0)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class StudyContext:
    """Where and how a study runs."""

    out_dir: Path
    threads: int = 1

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def map(self, task: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """task over items, in item order, on up to self.threads workers."""
        values = list(items)
        if self.threads == 1 or len(values) < 2:
            return [task(value) for value in values]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(task, values))


def atomic_write(path: Path, write: Callable[[Path], None]) -> Path:
    """Let write fill a temporary file next to path, then rename it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(handle)
    try:
        write(Path(temporary))
        os.replace(temporary, path)
    except BaseException:
        Path(temporary).unlink(missing_ok=True)
        raise
    return path


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _json_safe(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_json_safe(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    text = json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n"
    return atomic_write(path, lambda temporary: temporary.write_text(text, encoding="utf-8"))


def _header(scenario: Scenario) -> dict[str, Any]:
    return {"scenario": scenario.name, "seed": scenario.seed, "version": __version__}


def _finish(summary: dict[str, Any], failures: list[str], path: Path) -> dict[str, Any]:
    summary["failures"] = failures
    summary["passed"] = not failures
    write_json(path, summary)
    if failures:
        raise InvariantViolation("; ".join(failures[:5]) + (f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""))
    return summary


def run_simulate(scenario: Scenario, context: StudyContext) -> dict[str, Any]:
    """
    Simulate the particle system at every level, monitoring the invariants.

    Writes trajectory_N{N}.csv, invariants_N{N}.csv and simulate_summary.json.

    Raises:
        InvariantViolation: If a monitored bound fails at some level
    """
    kernel, sign, cfg = scenario.influence(), scenario.sign_map(), scenario.integrator()
    x0, m0 = scenario.initial_opinions(), scenario.initial_masses()

    def simulate(side: int) -> dict[str, Any]:
        state = Embedding.project_initial(x0, m0, scenario.dim, side)
        params = ModelParams.for_initial(state.positions, state.masses, kernel, sign, scenario.horizon)
        result = Integrator.simulate(state, cfg, kernel, sign, params, freeze_masses=scenario.freeze_masses)
        atomic_write(context.path(f"trajectory_N{side}.csv"), result.trajectory.write_csv)
        atomic_write(context.path(f"invariants_N{side}.csv"), result.log.write_csv)
        records = result.log.records
        return {
            "N": side,
            "particles": state.count,
            "samples": len(records),
            "halted": result.trajectory.halted,
            "diagnostic": result.diagnostic,
            "max_mass_dev": max(r.mass_dev for r in records),
            "min_env_ratio": min(r.min_env_ratio for r in records),
            "min_env_ratio_unscaled": min(r.min_env_ratio_unscaled for r in records),
            "max_pos_ratio": max(r.max_pos_ratio for r in records),
            "min_sep_ratio": min(r.sep_ratio for r in records),
            "empirical_separation_constant": result.log.empirical_separation_constant,
            "violations": result.log.violations(cfg),
        }

    levels = context.map(simulate, scenario.levels)
    failures = [f"N={level['N']}: {problem}" for level in levels for problem in level["violations"]]
    summary = {**_header(scenario), "levels": levels}
    logger.info("simulate %s: %d level(s), %d violation(s)", scenario.name, len(levels), len(failures))
    return _finish(summary, failures, context.path("simulate_summary.json"))


def _reference(scenario: Scenario) -> ContinuumTrajectory:
    """The direct grid solution at the reference resolution."""
    xgrid, mgrid = Embedding.project_grids(
        scenario.initial_opinions(), scenario.initial_masses(), scenario.dim, scenario.reference_resolution
    )
    return GraphLimit.solve_direct(
        xgrid,
        mgrid,
        scenario.integrator(),
        scenario.influence(),
        scenario.sign_map(),
        scenario.horizon,
        freeze_masses=scenario.freeze_masses,
    )


def _particle_run(scenario: Scenario, side: int) -> Trajectory:
    state = Embedding.project_initial(scenario.initial_opinions(), scenario.initial_masses(), scenario.dim, side)
    return Integrator.march(
        state,
        scenario.integrator(),
        scenario.influence(),
        scenario.sign_map(),
        scenario.horizon,
        freeze_masses=scenario.freeze_masses,
    )


def run_graphlimit(scenario: Scenario, context: StudyContext) -> dict[str, Any]:
    """
    Solve the graph-limit equation directly at the reference resolution and, when the
    scenario enables it, cross-validate against the coupled Picard solver.

    Writes continuum_K{K}.csv and graphlimit_summary.json; with Picard also
    picard_K{K}.csv and picard_report.json.

    Raises:
        InvariantViolation: If the mass integral drifts or the two solvers disagree
    """
    kernel, sign = scenario.influence(), scenario.sign_map()
    resolution = scenario.reference_resolution
    reference = _reference(scenario)
    atomic_write(context.path(f"continuum_K{resolution}.csv"), reference.write_csv)

    failures = []
    drift = float(np.max(np.abs(np.mean(reference.masses, axis=-1) - 1.0)))
    if drift > MASS_MEAN_TOLERANCE:
        failures.append(f"mass integral drifted by {drift:.3e}")
    summary: dict[str, Any] = {**_header(scenario), "K": resolution, "samples": int(reference.times.size), "mass_drift": drift}

    if scenario.picard:
        coarse = scenario.picard_resolution
        xgrid, mgrid = Embedding.project_grids(scenario.initial_opinions(), scenario.initial_masses(), scenario.dim, coarse)
        cfg = scenario.integrator()
        direct = GraphLimit.solve_direct(xgrid, mgrid, dataclasses.replace(cfg, record_every=1), kernel, sign, scenario.picard_horizon)
        solution = PicardSolver.solve_coupled(
            xgrid, mgrid, scenario.picard_config(), kernel, sign, horizon=scenario.picard_horizon, dt=scenario.dt
        )
        atomic_write(context.path(f"picard_K{coarse}.csv"), solution.trajectory.write_csv)
        position_sup, mass_sup = solution.trajectory.sup_difference(direct)
        factors = [factor for window in solution.windows for factor in window.contraction_factors]
        report = {
            **_header(scenario),
            "K": coarse,
            "horizon": scenario.picard_horizon,
            "sup_position_difference": position_sup,
            "sup_mass_difference": mass_sup,
            "outer_differences": list(solution.outer_differences),
            "max_contraction_factor": max(factors, default=0.0),
            "windows": [
                {
                    "start": window.start,
                    "length": window.length,
                    "iterations": window.iterations,
                    "differences": list(window.differences),
                }
                for window in solution.windows
            ],
        }
        write_json(context.path("picard_report.json"), report)
        summary["picard"] = {key: report[key] for key in ("K", "sup_position_difference", "sup_mass_difference", "max_contraction_factor")}
        if max(position_sup, mass_sup) > CROSS_VALIDATION_TOLERANCE:
            failures.append(f"Picard and direct solutions differ by {max(position_sup, mass_sup):.3e}")

    return _finish(summary, failures, context.path("graphlimit_summary.json"))


def _w1_at(trajectory: Trajectory, reference: ContinuumTrajectory, t: float) -> float:
    mu = MeanField.empirical_measure(trajectory.state_at(t))
    nu = MeanField.continuum_measure(*reference.grids_at(t))
    return MeanField.w1(mu, nu)


def convergence_report(scenario: Scenario, context: StudyContext) -> ConvergenceReport:
    """xi_N, zeta_N, ||g_N|| and W1 for every level and sample time against the reference solution."""
    kernel, sign, norm = scenario.influence(), scenario.sign_map(), scenario.norm_kind()
    reference = _reference(scenario)

    def level(side: int) -> list[ConvergenceRow]:
        trajectory = _particle_run(scenario, side)
        labeling = CubeLabeling(scenario.dim, side)
        rows = []
        for t in scenario.sample_times:
            embedded = Embedding.riemann_embed(trajectory.state_at(t), labeling)
            xi, zeta = Embedding.xi_zeta(embedded, reference.grids_at(t), norm)
            gn = Embedding.gn_diagnostic(reference, side, t, kernel, sign, norm)
            rows.append(ConvergenceRow(side, float(t), xi, zeta, gn, _w1_at(trajectory, reference, t)))
        logger.debug("level N=%d done", side)
        return rows

    report = ConvergenceReport(scenario.dim, norm)
    for rows in context.map(level, scenario.levels):
        for row in rows:
            report.add(row)
    return report


def run_converge(scenario: Scenario, context: StudyContext) -> dict[str, Any]:
    """
    Graph-limit convergence study.

    Writes convergence.csv (N, t, xi, zeta, gn, w1) and convergence_summary.json.

    Raises:
        InvariantViolation: If sup_t(xi + zeta) or sup_t ||g_N|| fails to decrease strictly in N
    """
    report = convergence_report(scenario, context)
    atomic_write(context.path("convergence.csv"), report.write_csv)
    summary = {**_header(scenario), "reference_resolution": scenario.reference_resolution, **report.summary()}
    failures = []
    if not summary["strictly_decreasing"]:
        failures.append(f"sup_t(xi + zeta) is not strictly decreasing: {summary['sup_xi_plus_zeta']}")
    if not summary["gn_strictly_decreasing"]:
        failures.append(f"sup_t g_N is not strictly decreasing: {summary['sup_gn']}")
    logger.info("converge %s: sup errors %s", scenario.name, summary["sup_xi_plus_zeta"])
    return _finish(summary, failures, context.path("convergence_summary.json"))


def run_meanfield(scenario: Scenario, context: StudyContext) -> dict[str, Any]:
    """
    W1 between the empirical measures and the continuum measure at each sample time.

    Writes meanfield.csv (N, t, w1) and meanfield_summary.json. In d = 1 each distance is
    also computed by exact transport and the two values are compared.

    Raises:
        InvariantViolation: If W1 fails to decrease in N at some time, or the two W1 algorithms disagree
    """
    reference = _reference(scenario)

    def level(side: int) -> list[tuple[int, float, float, float | None]]:
        trajectory = _particle_run(scenario, side)
        rows = []
        for t in scenario.sample_times:
            mu = MeanField.empirical_measure(trajectory.state_at(t))
            nu = MeanField.continuum_measure(*reference.grids_at(t))
            distance = MeanField.w1(mu, nu)
            check = None
            if mu.dim == 1 and mu.size + nu.size <= MAX_TRANSPORT_ATOMS:
                check = abs(MeanField.w1_discrete(mu, nu) - distance)
            rows.append((side, float(t), distance, check))
        return rows

    rows = [row for rows in context.map(level, scenario.levels) for row in rows]

    def write(path: Path) -> None:
        with path.open("w", newline="") as handle:
            handle.write("N,t,w1\n")
            for side, t, distance, _ in rows:
                handle.write(f"{side},{t!r},{distance!r}\n")

    atomic_write(context.path("meanfield.csv"), write)

    failures = []
    by_time: dict[str, list[float]] = {}
    for t in scenario.sample_times:
        series = [distance for _, sample, distance, _ in rows if sample == float(t)]
        by_time[repr(float(t))] = series
        if not ConvergenceReport.strictly_decreasing(series):
            failures.append(f"W1 at t={t} is not strictly decreasing in N: {series}")
    checks = [check for *_, check in rows if check is not None]
    agreement = max(checks, default=None)
    if agreement is not None and agreement > W1_AGREEMENT_TOLERANCE:
        failures.append(f"w1_1d and w1_discrete differ by {agreement:.3e}")
    summary = {**_header(scenario), "levels": list(scenario.levels), "w1_by_time": by_time, "w1_algorithm_gap": agreement}
    return _finish(summary, failures, context.path("meanfield_summary.json"))


def _best_time(call: Callable[[], Any], repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        call()
        best = min(best, time.perf_counter() - start)
    return best


def _bench_row(state: DiscreteState, kernel: InfluenceKernel, sign: SignMap, repeats: int) -> dict[str, Any]:
    positions, masses = state.positions, state.masses
    velocities = Dynamics.velocities(positions, masses, kernel)
    factorized = Dynamics.mass_rates(positions, masses, velocities, sign)
    bruteforce = Dynamics.mass_rates_bruteforce(positions, masses, kernel, sign)
    return {
        "P": state.count,
        "factorized_s": _best_time(lambda: Dynamics.mass_rates(positions, masses, velocities, sign), repeats),
        "bruteforce_s": _best_time(lambda: Dynamics.mass_rates_bruteforce(positions, masses, kernel, sign), repeats),
        "max_abs_diff": float(np.max(np.abs(factorized - bruteforce))),
    }


def run_bench(scenario: Scenario, context: StudyContext) -> dict[str, Any]:
    """
    Time the factorised and brute-force mass right-hand sides on random states.

    Writes bench.csv (P, factorized_s, bruteforce_s, max_abs_diff) and bench_summary.json
    with log-log scaling exponents. Doubling ratios are checked for sizes from 128 up.

    Raises:
        InvariantViolation: If the two paths disagree or a doubling ratio leaves its band
    """
    kernel, sign = scenario.influence(), scenario.sign_map()
    streams = RandomStreams(scenario.seed)
    rows = []
    for count in scenario.bench_sizes:
        state = random_state(streams.generator(count), count, scenario.dim)
        rows.append(_bench_row(state, kernel, sign, scenario.bench_repeats))
        logger.info("bench P=%d: %s", count, rows[-1])

    def write(path: Path) -> None:
        with path.open("w", newline="") as handle:
            handle.write("P,factorized_s,bruteforce_s,max_abs_diff\n")
            for row in rows:
                handle.write(f"{row['P']},{row['factorized_s']!r},{row['bruteforce_s']!r},{row['max_abs_diff']!r}\n")

    atomic_write(context.path("bench.csv"), write)

    failures = [f"P={row['P']}: paths differ by {row['max_abs_diff']:.3e}" for row in rows if row["max_abs_diff"] > BENCH_EQUALITY_TOLERANCE]
    ratios = []
    for earlier, later in pairwise(rows):
        ratio = {
            "from": earlier["P"],
            "to": later["P"],
            "factorized": later["factorized_s"] / earlier["factorized_s"] if earlier["factorized_s"] > 0 else math.nan,
            "bruteforce": later["bruteforce_s"] / earlier["bruteforce_s"] if earlier["bruteforce_s"] > 0 else math.nan,
        }
        ratios.append(ratio)
        if earlier["P"] >= BENCH_TIMED_FROM and later["P"] == 2 * earlier["P"]:
            low, high = FACTORIZED_RATIO_BAND
            if not low <= ratio["factorized"] <= high:
                failures.append(f"factorised doubling ratio {ratio['factorized']:.2f} outside [{low}, {high}] at P={later['P']}")
            low, high = BRUTEFORCE_RATIO_BAND
            if not low <= ratio["bruteforce"] <= high:
                failures.append(f"brute-force doubling ratio {ratio['bruteforce']:.2f} outside [{low}, {high}] at P={later['P']}")

    exponents: dict[str, float | None] = {"factorized": None, "bruteforce": None}
    timed = [row for row in rows if row["factorized_s"] > 0 and row["bruteforce_s"] > 0]
    if len(timed) >= 2:
        sizes = np.log([row["P"] for row in timed])
        for key in exponents:
            exponents[key] = float(stats.linregress(sizes, np.log([row[f"{key}_s"] for row in timed])).slope)

    summary = {**_header(scenario), "rows": rows, "doubling_ratios": ratios, "scaling_exponents": exponents}
    return _finish(summary, failures, context.path("bench_summary.json"))


STUDIES: dict[str, Callable[[Scenario, StudyContext], dict[str, Any]]] = {
    "simulate": run_simulate,
    "graphlimit": run_graphlimit,
    "converge": run_converge,
    "meanfield": run_meanfield,
    "bench": run_bench,
}
