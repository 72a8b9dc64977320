"""Bootstrap standard errors and percentile confidence intervals.

Each replicate draws rows with replacement, re-standardizes the resampled
columns, and re-runs the full pipeline: the PLS fit and, when the model has a
cyclic section, both steps of the feedback estimator. Replicate weight
vectors are sign-aligned against the original sample before anything is
recorded, preventing the arbitrary orientation of composite scores from
inflating the spread. Replicate r draws from a counter-based generator keyed
by (seed, r), so results do not depend on execution order.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .cyclic import CyclicFit, estimate_cyclic
from .dataset import PreparedData
from .errors import DataError, EstimationError
from .modelspec import ModelSpec
from .plscore import DEFAULT_MAX_ITER, DEFAULT_TOL, PlsFit, fit_pls

MIN_REPLICATES = 100
MAX_FAILURE_RATE = 0.05

_UINT64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class CoefficientStats:
    """Replicate vector and derived interval statistics for one coefficient."""

    estimate: float
    replicates: np.ndarray
    se: float
    ci: tuple[float, float]
    significant: bool


@dataclass(frozen=True)
class BootstrapResult:
    """Per-coefficient bootstrap summaries over B replicates."""

    b_requested: int
    b_effective: int
    failures: int
    level: float
    seed: int
    paths: dict[tuple[str, str], CoefficientStats]
    loadings: dict[tuple[str, str], CoefficientStats]
    cyclic_paths: dict[tuple[str, str], CoefficientStats]


def percentile_ci(replicates: np.ndarray, level: float) -> tuple[float, float]:
    """Nearest-rank percentile interval at the given confidence level.

    Lower bound at quantile (1-level)/2, upper at 1-(1-level)/2; the
    nearest-rank rule picks order statistic ceil(q*m), clamped to [1, m].
    """
    reps = np.sort(np.asarray(replicates, dtype=np.float64))
    if reps.size == 0:
        raise ValueError("replicates must be non-empty")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    m = reps.size

    def rank(q: float) -> int:
        # small epsilon keeps q*m from drifting across an integer boundary
        return max(1, min(m, math.ceil(q * m - 1e-9)))

    lower = (1.0 - level) / 2.0
    return float(reps[rank(lower) - 1]), float(reps[rank(1.0 - lower) - 1])


def _replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    key = np.array([seed & _UINT64_MASK, replicate], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _restandardize(matrix: np.ndarray) -> np.ndarray:
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    if np.any(std <= 1e-12):
        raise DataError("zero variance in a resampled column")
    return (matrix - mean) / std


def _aligned_fit(fit: PlsFit, reference: dict[str, np.ndarray]) -> PlsFit:
    """Flip replicate blocks whose weights point away from the original's."""
    flips = {
        name: -1.0 if float(fit.weights[name] @ reference[name]) < 0 else 1.0
        for name in fit.constructs
    }
    if all(f == 1.0 for f in flips.values()):
        return fit
    flip_vec = np.array([flips[name] for name in fit.constructs])
    return dataclasses.replace(
        fit,
        weights={n: fit.weights[n] * flips[n] for n in fit.constructs},
        scores=fit.scores * flip_vec,
        loadings={n: fit.loadings[n] * flips[n] for n in fit.constructs},
        paths={(s, t): v * flips[s] * flips[t] for (s, t), v in fit.paths.items()},
    )


def _collect(
    estimates: dict, replicate_values: dict, level: float
) -> dict[tuple[str, str], CoefficientStats]:
    out: dict[tuple[str, str], CoefficientStats] = {}
    for key, values in replicate_values.items():
        reps = np.asarray(values, dtype=np.float64)
        ci = percentile_ci(reps, level)
        out[key] = CoefficientStats(
            estimate=float(estimates[key]),
            replicates=reps,
            se=float(np.std(reps, ddof=1)),
            ci=ci,
            significant=not (ci[0] <= 0.0 <= ci[1]),
        )
    return out


def bootstrap(
    data: PreparedData,
    spec: ModelSpec,
    b: int,
    level: float = 0.95,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> BootstrapResult:
    """Bootstrap the pipeline with B row-resamples of size n_effective.

    Point estimates always come from the original sample and are never
    altered here. Replicates that fail (singular systems, degenerate
    resampled columns, step-2 failures) are skipped and counted; a failure
    rate above 5% raises EstimationError with the last failure's diagnostic.
    Deterministic given the seed.
    """
    if b < MIN_REPLICATES:
        raise ValueError(f"bootstrap needs at least {MIN_REPLICATES} replicates, got {b}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")

    fit0 = fit_pls(data, spec, tol=tol, max_iter=max_iter)
    if not fit0.converged:
        raise EstimationError(
            f"weights did not converge within {max_iter} iterations"
        )
    cyc0: CyclicFit | None = None
    if spec.cyclic is not None:
        cyc0 = estimate_cyclic(data, fit0, spec, tol=tol, max_iter=max_iter)

    n = data.matrix.shape[0]
    path_reps: dict[tuple[str, str], list[float]] = {k: [] for k in fit0.paths}
    loading_reps: dict[tuple[str, str], list[float]] = {}
    for name in fit0.constructs:
        lo, hi = data.block_index[name]
        for col in data.columns[lo:hi]:
            loading_reps[(name, col)] = []
    cyclic_reps: dict[tuple[str, str], list[float]] = (
        {k: [] for k in cyc0.cyclic_paths} if cyc0 is not None else {}
    )

    failures = 0
    last_failure = ""
    for r in range(b):
        rng = _replicate_rng(seed, r)
        idx = rng.integers(0, n, size=n)
        try:
            matrix = _restandardize(data.matrix[idx])
            rep_data = dataclasses.replace(data, matrix=matrix)
            rep_fit = fit_pls(rep_data, spec, tol=tol, max_iter=max_iter)
            if not rep_fit.converged:
                raise EstimationError("replicate weights did not converge")
            rep_fit = _aligned_fit(rep_fit, fit0.weights)
            rep_cyc = None
            if cyc0 is not None:
                rep_cyc = estimate_cyclic(rep_data, rep_fit, spec, tol=tol, max_iter=max_iter)
                step2 = _aligned_fit(rep_cyc.step2_fit, cyc0.step2_fit.weights)
        except (DataError, EstimationError, np.linalg.LinAlgError) as exc:
            failures += 1
            last_failure = str(exc)
            continue
        for key in path_reps:
            path_reps[key].append(rep_fit.paths[key])
        for name in rep_fit.constructs:
            lo, hi = data.block_index[name]
            for j, col in enumerate(data.columns[lo:hi]):
                loading_reps[(name, col)].append(float(rep_fit.loadings[name][j]))
        if rep_cyc is not None:
            for key in cyclic_reps:
                cyclic_reps[key].append(step2.paths[key])

    if failures > MAX_FAILURE_RATE * b:
        raise EstimationError(
            f"bootstrap failure rate {failures}/{b} exceeds "
            f"{MAX_FAILURE_RATE:.0%}; last failure: {last_failure}"
        )

    loading_estimates = {}
    for name in fit0.constructs:
        lo, hi = data.block_index[name]
        for j, col in enumerate(data.columns[lo:hi]):
            loading_estimates[(name, col)] = float(fit0.loadings[name][j])

    return BootstrapResult(
        b_requested=b,
        b_effective=b - failures,
        failures=failures,
        level=level,
        seed=seed,
        paths=_collect(fit0.paths, path_reps, level),
        loadings=_collect(loading_estimates, loading_reps, level),
        cyclic_paths=(
            _collect(cyc0.cyclic_paths, cyclic_reps, level) if cyc0 is not None else {}
        ),
    )
