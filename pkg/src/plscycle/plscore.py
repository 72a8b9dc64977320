"""Iterative PLS path-modeling estimator.

Alternates outer score computation, inner proxy construction (centroid,
factorial, or path scheme), and outer weight updates (mode A covariances,
mode B regression weights, fixed unit weights for single-item blocks) until
the largest weight change falls below tolerance. Loadings are indicator-score
correlations; path coefficients come from OLS of each endogenous construct on
its predecessors' scores.

All location parameters are identically zero because every column entering
the estimator is standardized; reports list them as 0 for completeness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .modelspec import ModelSpec, UNIT_MODES

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 300

# condition number above which a regression system is treated as singular
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class PlsFit:
    """Converged outer weights, scores, loadings, paths, and fit diagnostics."""

    constructs: tuple[str, ...]
    modes: dict[str, str]
    weights: dict[str, np.ndarray]
    scores: np.ndarray
    loadings: dict[str, np.ndarray]
    paths: dict[tuple[str, str], float]
    r_squared: dict[str, float]
    iterations: int
    converged: bool

    def score(self, name: str) -> np.ndarray:
        return self.scores[:, self.constructs.index(name)]


def _solve_ols(corr: np.ndarray, pred: list[int], target: int, label: str) -> np.ndarray:
    """Standardized OLS coefficients from a correlation matrix."""
    a = corr[np.ix_(pred, pred)]
    b = corr[pred, target]
    if np.linalg.cond(a) > _COND_LIMIT:
        raise EstimationError(f"singular system: collinear predecessors of '{label}'")
    return np.linalg.solve(a, b)


def path_coefficients(
    scores: np.ndarray, spec: ModelSpec, constructs: tuple[str, ...] | None = None
) -> tuple[dict[tuple[str, str], float], dict[str, float]]:
    """OLS path coefficients and R squared per endogenous construct.

    ``scores`` columns must follow ``constructs`` (block declaration order by
    default). On standardized scores a single predecessor's coefficient is
    exactly the Pearson correlation of the two score columns.
    """
    if constructs is None:
        constructs = spec.block_names()
    index = {name: i for i, name in enumerate(constructs)}
    if scores.shape[1] != len(constructs):
        raise ValueError("scores column count does not match construct count")
    corr = np.corrcoef(scores, rowvar=False)
    if corr.ndim == 0:  # single construct
        corr = np.array([[1.0]])
    paths: dict[tuple[str, str], float] = {}
    r_squared: dict[str, float] = {}
    for name in constructs:
        preds = spec.predecessors(name)
        if not preds:
            continue
        pred_idx = [index[p] for p in preds]
        beta = _solve_ols(corr, pred_idx, index[name], name)
        for p, value in zip(preds, beta):
            paths[(p, name)] = float(value)
        r_squared[name] = float(corr[pred_idx, index[name]] @ beta)
    return paths, r_squared


def loadings(data, scores: np.ndarray, spec: ModelSpec) -> dict[str, np.ndarray]:
    """Pearson correlation of each indicator column with its construct score."""
    constructs = spec.block_names()
    out: dict[str, np.ndarray] = {}
    for i, name in enumerate(constructs):
        block = data.block_matrix(name)
        stacked = np.column_stack([block, scores[:, i]])
        corr = np.corrcoef(stacked, rowvar=False)
        out[name] = corr[: block.shape[1], block.shape[1]].copy()
    return out


def _normalized(weights: np.ndarray, block: np.ndarray, name: str) -> np.ndarray:
    """Scale weights so the resulting score has unit population variance."""
    score = block @ weights
    std = score.std()
    if std <= 1e-12:
        raise EstimationError(f"degenerate score variance in block '{name}'")
    return weights / std


def _inner_weights(
    corr: np.ndarray,
    scheme: str,
    preds: list[list[int]],
    succs: list[list[int]],
    names: tuple[str, ...],
) -> np.ndarray:
    """Adjacency weighting matrix E; proxy for construct k is scores @ E[k]."""
    k = corr.shape[0]
    e = np.zeros((k, k))
    for i in range(k):
        neighbors = preds[i] + succs[i]
        if not neighbors:
            e[i, i] = 1.0  # isolated construct: its own score is the proxy
            continue
        if scheme == "centroid":
            e[i, neighbors] = np.sign(corr[i, neighbors])
        elif scheme == "factorial":
            e[i, neighbors] = corr[i, neighbors]
        else:  # path
            if preds[i]:
                e[i, preds[i]] = _solve_ols(corr, preds[i], i, names[i])
            if succs[i]:
                e[i, succs[i]] = corr[i, succs[i]]
    return e


def fit_pls(
    data,
    spec: ModelSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    init_weights: dict[str, np.ndarray] | None = None,
) -> PlsFit:
    """Estimate the model on prepared (standardized) data.

    Outer weights start equal (or at ``init_weights``) and are rescaled to
    unit score variance after every update. Each block is oriented so its
    loading sum is non-negative. Convergence is the maximum absolute weight
    change across all blocks dropping below ``tol``; hitting ``max_iter``
    returns a fit with ``converged=False`` rather than raising.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be a positive integer")
    constructs = spec.block_names()
    k = len(constructs)
    index = {name: i for i, name in enumerate(constructs)}
    blocks = []
    modes = []
    for block in spec.blocks:
        lo, hi = data.block_index[block.name]
        if block.mode in UNIT_MODES and hi - lo != 1:
            raise EstimationError(
                f"block '{block.name}' must be prepared to exactly one column"
            )
        blocks.append(data.matrix[:, lo:hi])
        modes.append(block.mode)
    n = data.matrix.shape[0]
    preds = [[index[p] for p in spec.predecessors(name)] for name in constructs]
    succs = [[index[s] for s in spec.successors(name)] for name in constructs]

    # precompute block correlation matrices and factorizations for mode B
    block_corr: list[np.ndarray | None] = []
    for i, name in enumerate(constructs):
        if modes[i] == "formative":
            s = blocks[i].T @ blocks[i] / n
            if np.linalg.cond(s) > _COND_LIMIT:
                raise EstimationError(f"singular system in formative block '{name}'")
            block_corr.append(s)
        else:
            block_corr.append(None)

    weights: list[np.ndarray] = []
    for i, name in enumerate(constructs):
        if init_weights is not None and name in init_weights:
            w = np.asarray(init_weights[name], dtype=np.float64).copy()
            if w.shape != (blocks[i].shape[1],):
                raise ValueError(f"init weights for '{name}' have the wrong length")
        else:
            w = np.ones(blocks[i].shape[1])
        weights.append(_normalized(w, blocks[i], name))

    def flip_to_positive(i: int, w: np.ndarray) -> np.ndarray:
        if modes[i] in UNIT_MODES:
            return w  # fixed unit weight; loading is +1 by construction
        score = blocks[i] @ w
        if (blocks[i].T @ score).sum() < 0:  # sum of loadings, up to scale
            return -w
        return w

    weights = [flip_to_positive(i, w) for i, w in enumerate(weights)]

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        scores = np.column_stack([blocks[i] @ weights[i] for i in range(k)])
        corr = scores.T @ scores / n
        e = _inner_weights(corr, spec.scheme, preds, succs, constructs)
        proxies = scores @ e.T
        delta = 0.0
        new_weights: list[np.ndarray] = []
        for i, name in enumerate(constructs):
            if modes[i] in UNIT_MODES:
                new_weights.append(weights[i])
                continue
            cov = blocks[i].T @ proxies[:, i] / n
            if modes[i] == "formative":
                w = np.linalg.solve(block_corr[i], cov)
            else:  # reflective, mode A
                w = cov
            w = flip_to_positive(i, _normalized(w, blocks[i], name))
            delta = max(delta, float(np.max(np.abs(w - weights[i]))))
            new_weights.append(w)
        weights = new_weights
        if delta < tol:
            converged = True
            break

    scores = np.column_stack([blocks[i] @ weights[i] for i in range(k)])
    loading_map = loadings(data, scores, spec)
    paths, r_squared = path_coefficients(scores, spec, constructs)
    return PlsFit(
        constructs=constructs,
        modes={name: modes[i] for i, name in enumerate(constructs)},
        weights={name: weights[i] for i, name in enumerate(constructs)},
        scores=scores,
        loadings=loading_map,
        paths=paths,
        r_squared=r_squared,
        iterations=iterations,
        converged=converged,
    )
