"""Experiment engine: stepsize comparisons, parameter sweeps, limit checks.

Every routine here is a pure function of its arguments.  Trials are seeded
through per-trial substreams (see :mod:`krosep.rng`), so results are
reproducible and independent of execution order; the three stepsize rules
are compared on paired streams (identical instance and identical solver
initialization per trial).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument
from .linalg import ModeDims, SymMatrix, hs_norm
from .models import ModelSpec, instantiate
from .solver import SolveReport, SolverConfig, StepsizeRule, solve

WISHART_SWEEP_DIMS = ModeDims((5, 5))


@dataclass(frozen=True)
class TrialRecord:
    """One solver run; mirrors the summary CSV columns."""

    model: str
    params: str
    rule: str
    iters: int
    seed: int
    trial: int
    normalized_sq_distance: float
    final_f: float
    lmo_calls: int
    wall_ms: float


@dataclass(frozen=True)
class RuleCurves:
    """Mean per-iteration trajectories for one stepsize rule."""

    rule: str
    mean_f: list[float]
    mean_norm_sq_dist: list[float]


@dataclass(frozen=True)
class StepsizeComparison:
    curves: list[RuleCurves]
    trials: list[TrialRecord]


@dataclass(frozen=True)
class SweepCell:
    param: float
    mean: float
    std: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    cells: list[SweepCell]
    trials: list[TrialRecord]


@dataclass(frozen=True)
class LimitRow:
    family: str
    param: float
    metric: str
    value: float
    trials: int
    iters: int


def trimmed_mean(values, frac: float = 0.05) -> float:
    """Mean after dropping the lowest and highest ``frac`` fraction of values."""
    xs = np.sort(np.asarray(values, dtype=float))
    k = int(np.floor(frac * xs.size))
    if xs.size - 2 * k < 1:
        return float(xs.mean())
    return float(xs[k : xs.size - k].mean())


def wishart_sample_grid(count: int = 13, lo: int = 10, hi: int = 100_000) -> list[int]:
    """Sample counts spaced uniformly in log scale, rounded to integers."""
    return [int(round(v)) for v in np.geomspace(lo, hi, count)]


def toeplitz_rho_grid(count: int = 10, lo: float = 0.05, hi: float = 0.5) -> list[float]:
    """Correlation values spaced uniformly in [lo, hi]."""
    return [float(v) for v in np.linspace(lo, hi, count)]


def bell_fw_limit(lam: float) -> SymMatrix:
    """Closed-form limit point of the solver on the identity-augmented Bell model.

    Two branches, switching at lam = 0.5 (they agree there).
    """
    if lam < 0:
        raise InvalidArgument("lam must be nonnegative")
    if lam <= 0.5:
        d = 1.0 + lam
        o = (1.0 + lam) / 3.0
        return SymMatrix(
            [
                [d, 0.0, 0.0, o],
                [0.0, o, o, 0.0],
                [0.0, o, o, 0.0],
                [o, 0.0, 0.0, d],
            ]
        )
    d = 1.0 + lam
    return SymMatrix(
        [
            [d, 0.0, 0.0, 0.5],
            [0.0, lam, 0.5, 0.0],
            [0.0, 0.5, lam, 0.0],
            [0.5, 0.0, 0.0, d],
        ]
    )


def toeplitz_fw_limit(rho: float) -> SymMatrix:
    """Closed-form limit point of the solver on the 4x4 AR(1) model.

    Equal to the AR(1) matrix with its anti-diagonal pairs (1,4)/(4,1) and
    (2,3)/(3,2) replaced by (rho + rho^3)/2; the squared distance to the
    AR(1) matrix is exactly rho^2 (1 - rho^2)^2.
    """
    if not abs(rho) < 1:
        raise InvalidArgument("|rho| must be strictly less than 1")
    r, r2 = rho, rho * rho
    m = (rho + rho ** 3) / 2.0
    return SymMatrix(
        [
            [1.0, r, r2, m],
            [r, 1.0, m, r2],
            [r2, m, 1.0, r],
            [m, r2, r, 1.0],
        ]
    )


def toeplitz_residual(rho: float) -> float:
    """The squared distance rho^2 (1 - rho^2)^2 between the AR(1) matrix and
    the solver's limit point."""
    return rho * rho * (1.0 - rho * rho) ** 2


def _solver_seed(base_seed: int, trial: int) -> int:
    return base_seed ^ trial


def run_trial(spec: ModelSpec, trial: int, config: SolverConfig) -> tuple[SolveReport, TrialRecord]:
    """Instantiate the model for one trial and solve it."""
    matrix = instantiate(spec, trial)
    cfg = replace(config, seed=_solver_seed(spec.seed, trial))
    report = solve(matrix, spec.dims, cfg)
    record = TrialRecord(
        model=spec.kind,
        params=spec.params_label(),
        rule=cfg.rule.value,
        iters=cfg.max_iters,
        seed=spec.seed,
        trial=trial,
        normalized_sq_distance=report.normalized_sq_distance,
        final_f=report.final_f,
        lmo_calls=report.lmo_calls,
        wall_ms=report.wall_ms,
    )
    return report, record


def stepsize_compare(spec: ModelSpec, trials: int, config: SolverConfig,
                     rules: tuple[StepsizeRule, ...] = (
                         StepsizeRule.FIXED,
                         StepsizeRule.LINE_SEARCH,
                         StepsizeRule.FULLY_CORRECTIVE,
                     )) -> StepsizeComparison:
    """Run all stepsize rules on the same instances with paired substreams."""
    if trials < 1:
        raise InvalidArgument("trials must be at least 1")
    curves: list[RuleCurves] = []
    records: list[TrialRecord] = []
    sigma_sq_cache: dict[int, float] = {}
    for rule in rules:
        f_acc: np.ndarray | None = None
        d_acc: np.ndarray | None = None
        for trial in range(trials):
            cfg = replace(config, rule=rule, record_trajectory=True)
            report, record = run_trial(spec, trial, cfg)
            records.append(record)
            if trial not in sigma_sq_cache:
                sigma_sq_cache[trial] = hs_norm(instantiate(spec, trial)) ** 2
            f_traj = np.asarray(report.objective_trajectory)
            d_traj = np.asarray(report.cone_sq_distances) / sigma_sq_cache[trial]
            if f_acc is None:
                f_acc = np.zeros_like(f_traj)
                d_acc = np.zeros_like(d_traj)
            f_acc += f_traj
            d_acc += d_traj
        curves.append(
            RuleCurves(
                rule=rule.value,
                mean_f=[float(x) for x in f_acc / trials],
                mean_norm_sq_dist=[float(x) for x in d_acc / trials],
            )
        )
    return StepsizeComparison(curves=curves, trials=records)


def _sweep_spec(kind: str, dims: ModeDims, param: float, seed: int) -> ModelSpec:
    if kind == "wishart":
        return ModelSpec(kind="wishart", dims=dims, samples=int(round(param)), seed=seed)
    if kind == "toeplitz":
        return ModelSpec(kind="toeplitz", dims=dims, rho=float(param), seed=seed)
    raise InvalidArgument(f"sweep supports wishart and toeplitz models, got {kind!r}")


def parameter_sweep(kind: str, dims: ModeDims, grid, trials: int,
                    config: SolverConfig, seed: int = 0) -> SweepResult:
    """Solve ``trials`` instances per grid value; aggregate the normalized
    squared distances per cell.

    Every (cell, trial) pair gets its own substream, keyed by the global
    trial index ``cell * trials + trial``.
    """
    grid = list(grid)
    if len(grid) == 0:
        raise InvalidArgument("sweep grid must be non-empty")
    if trials < 1:
        raise InvalidArgument("trials must be at least 1")
    cells: list[SweepCell] = []
    records: list[TrialRecord] = []
    for cell_index, param in enumerate(grid):
        spec = _sweep_spec(kind, dims, param, seed)
        distances = []
        for trial in range(trials):
            global_trial = cell_index * trials + trial
            cfg = replace(config, record_trajectory=False)
            _, record = run_trial(spec, global_trial, cfg)
            record = replace(record, trial=trial)
            records.append(record)
            distances.append(record.normalized_sq_distance)
        arr = np.asarray(distances)
        cells.append(SweepCell(param=float(param), mean=float(arr.mean()),
                               std=float(arr.std()), trials=trials))
    return SweepResult(cells=cells, trials=records)


def limit_check(family: str, params, trials: int, config: SolverConfig,
                seed: int = 0) -> list[LimitRow]:
    """Solve each family member and compare against its closed-form limit.

    For the Bell family the metric is the normalized squared distance
    between the solver output and the branch limit matrix; for the AR(1)
    family it is the absolute deviation of the squared distance to the
    input from the closed-form residual.  Values are 5%-trimmed means.
    """
    if trials < 1:
        raise InvalidArgument("trials must be at least 1")
    rows: list[LimitRow] = []
    for cell_index, param in enumerate(list(params)):
        if family == "bell":
            spec = ModelSpec(kind="bell", dims=ModeDims((2, 2)), lam=float(param), seed=seed)
            limit = bell_fw_limit(float(param))
            limit_sq = hs_norm(limit) ** 2
            metric = "dist_to_limit"
        elif family == "toeplitz":
            spec = ModelSpec(kind="toeplitz", dims=ModeDims((2, 2)), rho=float(param), seed=seed)
            target = instantiate(spec)
            residual = toeplitz_residual(float(param))
            metric = "residual_error"
        else:
            raise InvalidArgument(f"limit check supports bell and toeplitz, got {family!r}")
        values = []
        for trial in range(trials):
            global_trial = cell_index * trials + trial
            cfg = replace(config, record_trajectory=False)
            report, _ = run_trial(spec, global_trial, cfg)
            out = report.final_matrix.a
            if family == "bell":
                values.append(float(np.sum((out - limit.a) ** 2)) / limit_sq)
            else:
                sq_dist = float(np.sum((out - target.a) ** 2))
                values.append(abs(sq_dist - residual))
        rows.append(LimitRow(family=family, param=float(param), metric=metric,
                             value=trimmed_mean(values), trials=trials,
                             iters=config.max_iters))
    return rows
