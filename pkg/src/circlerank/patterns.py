"""Edge-probability matrices for the token graph.

Four patterns are combined into one symmetric matrix of Bernoulli
probabilities: inverse-square distance decay, TF-IDF centrality,
query-match distance, and query relevance. A scale divisor is then solved
so the expected number of sampled edges hits a target sparsity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .corpus import TermWeights
from .errors import (
    BudgetUnreachableWarning,
    DimensionMismatch,
    EmptySequence,
    NegativeWeight,
)

DEFAULT_DISTANCE_SCALE = 50.0
DEFAULT_SPARSITY = 0.93

BUDGET_REL_TOL = 1e-6


@dataclass(frozen=True)
class PatternConfig:
    """Knobs for building and scaling the combined probability matrix."""

    p: float = DEFAULT_DISTANCE_SCALE
    lambdas: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    sparsity: float = DEFAULT_SPARSITY
    max_doc_len: int = 2048

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("distance scale p must be positive")
        if len(self.lambdas) != 4 or any(l < 0 for l in self.lambdas):
            raise ValueError("need four non-negative combination weights")
        if abs(sum(self.lambdas) - 1.0) > 1e-9:
            raise ValueError("combination weights must sum to 1")
        if not 0.0 < self.sparsity < 1.0:
            raise ValueError("sparsity must lie strictly between 0 and 1")
        if self.max_doc_len < 1:
            raise ValueError("max_doc_len must be at least 1")


def static_distance_matrix(length: int, p: float = DEFAULT_DISTANCE_SCALE) -> np.ndarray:
    """Inverse-square decay in token distance: 1 / (1 + |i-j|/p)^2."""
    if length < 1:
        raise EmptySequence("need at least one token")
    if p <= 0:
        raise ValueError("distance scale p must be positive")
    idx = np.arange(length, dtype=np.float64)
    dist = np.abs(idx[:, None] - idx[None, :])
    return 1.0 / (1.0 + dist / p) ** 2


def normalize_f(weight_products: np.ndarray) -> np.ndarray:
    """Square-root smoothing followed by min-max normalization.

    A constant input (max == min) maps to all zeros: the pattern abstains
    rather than divide by zero.
    """
    products = np.asarray(weight_products, dtype=np.float64)
    if np.any(products < 0):
        raise NegativeWeight("weight products must be non-negative")
    smoothed = np.sqrt(products)
    lo = smoothed.min()
    hi = smoothed.max()
    if hi == lo:
        return np.zeros_like(smoothed)
    return (smoothed - lo) / (hi - lo)


def _weight_outer_matrix(weights: TermWeights | np.ndarray) -> np.ndarray:
    values = weights.values if isinstance(weights, TermWeights) else np.asarray(weights, dtype=np.float64)
    if values.ndim != 1:
        raise DimensionMismatch("expected a one-dimensional weight vector")
    if len(values) == 0:
        raise EmptySequence("need at least one token")
    return normalize_f(np.outer(values, values))


def static_centrality_matrix(weights: TermWeights | np.ndarray) -> np.ndarray:
    """Probability from TF-IDF weight products, smoothed and normalized."""
    return _weight_outer_matrix(weights)


def dynamic_distance_weights(
    match_pos: np.ndarray, length: int, p: float = DEFAULT_DISTANCE_SCALE
) -> np.ndarray:
    """Mean inverse-distance weight to the query-matching positions.

    With no matches the weights are all zero: there is no distance
    evidence, and the resulting pattern abstains.
    """
    if p <= 0:
        raise ValueError("distance scale p must be positive")
    match_pos = np.asarray(match_pos, dtype=np.float64)
    if match_pos.size == 0:
        return np.zeros(length, dtype=np.float64)
    idx = np.arange(length, dtype=np.float64)
    dist = np.abs(idx[:, None] - match_pos[None, :])
    return np.mean(1.0 / (1.0 + dist / p), axis=1)


def dynamic_distance_matrix(weights: TermWeights | np.ndarray) -> np.ndarray:
    """Probability from query-match distance weight products."""
    return _weight_outer_matrix(weights)


def dynamic_centrality_matrix(weights: TermWeights | np.ndarray) -> np.ndarray:
    """Probability from query-relevance weight products."""
    return _weight_outer_matrix(weights)


def combine(
    static_dist: np.ndarray,
    static_cent: np.ndarray,
    dyn_dist: np.ndarray,
    dyn_cent: np.ndarray,
    lambdas: tuple[float, float, float, float],
) -> np.ndarray:
    """Convex combination of the four pattern matrices."""
    matrices = (static_dist, static_cent, dyn_dist, dyn_cent)
    shape = matrices[0].shape
    for m in matrices:
        if m.shape != shape:
            raise DimensionMismatch(f"pattern shapes differ: {m.shape} vs {shape}")
    if len(lambdas) != 4 or any(l < 0 for l in lambdas) or abs(sum(lambdas) - 1.0) > 1e-9:
        raise ValueError("need four non-negative weights summing to 1")
    out = np.zeros(shape, dtype=np.float64)
    for lam, m in zip(lambdas, matrices):
        out += lam * m
    return out


class MuResult(NamedTuple):
    mu: float
    scaled: np.ndarray
    budget_unreachable: bool


def _clamped_sum(values: np.ndarray, mu: float) -> float:
    return float(np.minimum(values / mu, 1.0).sum())


def scale_to_budget(values: np.ndarray, budget: float) -> tuple[float, bool]:
    """Find mu > 0 with sum(min(v / mu, 1)) == budget over a flat array.

    The clamped sum is piecewise-hyperbolic in mu with breakpoints at the
    sorted values, so the root is solved in closed form per interval; a
    bisection backstop covers float-boundary cases. Returns
    (mu, unreachable): when even mu -> 0 cannot reach the budget because
    everything clamps at 1, the saturating mu is returned with the flag set.
    """
    values = np.asarray(values, dtype=np.float64)
    if np.any(values < 0):
        raise NegativeWeight("probabilities must be non-negative")
    if budget <= 0:
        raise ValueError("budget must be positive")
    nonzero = np.sort(values[values > 0])
    n = nonzero.size
    if n == 0:
        return 1.0, True
    if budget >= n:
        # All mass clamped at 1 is the best any mu can do.
        return float(nonzero[0]), budget > n
    prefix = np.cumsum(nonzero)
    # With t entries unclamped (mu in (nonzero[t-1], nonzero[t]]) the sum is
    # (n - t) + prefix[t-1] / mu; solve each interval and keep the consistent one.
    t_vals = np.arange(1, n + 1)
    denom = budget - (n - t_vals)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu_cand = np.where(denom > 0, prefix / denom, np.inf)
    lo = nonzero[t_vals - 1]
    hi = np.concatenate((nonzero[1:], [np.inf]))
    ok = (denom > 0) & (mu_cand > lo) & (mu_cand <= hi)
    if np.any(ok):
        mu = float(mu_cand[np.argmax(ok)])
        if abs(_clamped_sum(nonzero, mu) - budget) <= BUDGET_REL_TOL * budget:
            return mu, False
    # Backstop: bisection on the monotone non-increasing clamped sum.
    lo_mu = float(nonzero[0]) / 2.0
    hi_mu = float(prefix[-1]) / budget
    for _ in range(200):
        mid = 0.5 * (lo_mu + hi_mu)
        if _clamped_sum(nonzero, mid) > budget:
            lo_mu = mid
        else:
            hi_mu = mid
    return 0.5 * (lo_mu + hi_mu), False


def solve_mu(matrix: np.ndarray, sparsity: float) -> MuResult:
    """Scale the combined matrix so expected edges meet the sparsity budget.

    The budget is length^2 * (1 - sparsity), summed over off-diagonal
    cells only; scaled entries are clamped at 1 and the diagonal is zeroed
    (self-loops are never sampled). If the budget cannot be met a
    BudgetUnreachableWarning is emitted and the saturating scale returned.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch("expected a square matrix")
    if not 0.0 < sparsity < 1.0:
        raise ValueError("sparsity must lie strictly between 0 and 1")
    length = matrix.shape[0]
    budget = length * length * (1.0 - sparsity)
    if budget <= 0:
        raise ValueError("sparsity budget must be positive")
    iu = np.triu_indices(length, k=1)
    upper = matrix[iu]
    # Symmetric matrix: solving on the upper triangle with half the budget
    # is the same root as the full off-diagonal sum.
    mu, unreachable = scale_to_budget(upper, budget / 2.0)
    if unreachable:
        warnings.warn(
            f"sparsity budget {budget:.6g} unreachable for a {length}x{length} matrix",
            BudgetUnreachableWarning,
            stacklevel=2,
        )
    scaled = np.clip(matrix / mu, 0.0, 1.0)
    np.fill_diagonal(scaled, 0.0)
    return MuResult(mu=mu, scaled=scaled, budget_unreachable=unreachable)


def build_pattern_matrices(doc_length, static_cent_w, dyn_dist_w, dyn_cent_w, config: PatternConfig):
    """All four patterns for one document, in combination order."""
    return (
        static_distance_matrix(doc_length, config.p),
        static_centrality_matrix(static_cent_w),
        dynamic_distance_matrix(dyn_dist_w),
        dynamic_centrality_matrix(dyn_cent_w),
    )
