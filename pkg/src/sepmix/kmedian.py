"""Discrete k-median fitting of spherical mixtures by maximum likelihood.

Centers are restricted to sample points; the objective is the sum of squared
distances to the nearest center.  For a common spherical width the maximizing
variance has the closed form sigma^2 = 2 * objective / (M * n) under the
density normalizer (2 pi sigma)^(-n/2); with that plug-in the quadratic term
of the log-likelihood collapses to exactly M * n / 4.  The textbook
normalizer (2 pi sigma^2)^(-n/2) is available behind ``normalization =
"standard"``, where sigma^2 = objective / (M * n) instead.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InstanceTooLarge, TooFewPoints, ZeroSigmaWarning

_NORMALIZATIONS = ("paper", "standard")


@dataclass(frozen=True)
class LocalSearchConfig:
    max_rounds: int = 100
    improvement_factor: float = 1e-3

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not (0 < self.improvement_factor < 1):
            raise ValueError("improvement_factor must be in (0, 1)")


@dataclass
class KMedianSolution:
    """Centers (sample points), nearest-center assignment, and objective."""

    center_indices: np.ndarray
    centers: np.ndarray
    assignment: np.ndarray
    objective: float

    @property
    def k(self) -> int:
        return self.center_indices.shape[0]


def kmedian_cost(points, centers) -> float:
    """Sum over points of the squared distance to the nearest center.

    Nearest centers are found with the Gram expansion; the returned value is
    then recomputed from explicit differences, so a point sitting exactly on
    a center contributes exactly zero.
    """
    points = np.asarray(points, dtype=float)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[1] != points.shape[1]:
        raise DimensionMismatch(
            f"centers have dim {centers.shape[1]}, points {points.shape[1]}"
        )
    nearest = np.argmin(_sq_to_centers(points, centers), axis=1)
    diff = points - centers[nearest]
    return float(np.einsum("ij,ij->", diff, diff))


def _sq_to_centers(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    pp = np.einsum("ij,ij->i", points, points)
    cc = np.einsum("ij,ij->i", centers, centers)
    d2 = pp[:, None] + cc[None, :] - 2.0 * (points @ centers.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _solution_from_indices(points, d2_full, idx) -> KMedianSolution:
    """Canonical solution: indices sorted, ties to the lowest center index."""
    idx = np.sort(np.asarray(idx, dtype=int))
    sub = d2_full[:, idx]
    assignment = np.argmin(sub, axis=1)  # first minimum = lowest index
    diff = points - points[idx][assignment]  # exact, no Gram roundoff
    objective = float(np.einsum("ij,ij->", diff, diff))
    return KMedianSolution(
        center_indices=idx,
        centers=points[idx].copy(),
        assignment=assignment,
        objective=objective,
    )


def kmedian_local_search(
    points, k: int, rng: np.random.Generator, config: LocalSearchConfig | None = None
) -> KMedianSolution:
    """Farthest-point seeding plus best-single-swap descent.

    Each round evaluates every (current center, candidate point) swap and
    applies the best one as long as it improves the objective by the factor
    (1 - improvement_factor / k); otherwise the search stops.  The objective
    is nonincreasing round to round.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if m < k:
        raise TooFewPoints(f"{m} points < k = {k}")
    if k < 1:
        raise ValueError("k must be >= 1")
    config = config or LocalSearchConfig()
    d2 = _sq_to_centers(points, points)

    chosen = [int(rng.integers(m))]
    nearest = d2[:, chosen[0]].copy()
    while len(chosen) < k:
        far = int(np.argmax(nearest))  # first max = lowest index on ties
        chosen.append(far)
        np.minimum(nearest, d2[:, far], out=nearest)

    current = np.array(sorted(chosen), dtype=int)
    cost = float(d2[:, current].min(axis=1).sum())
    shrink = 1.0 - config.improvement_factor / k
    for _ in range(config.max_rounds):
        best_cost, best_pair = cost, None
        in_set = np.zeros(m, dtype=bool)
        in_set[current] = True
        for out_pos in range(k):
            keep = np.delete(current, out_pos)
            base = d2[:, keep].min(axis=1) if keep.size else np.full(m, np.inf)
            # cost after swapping in candidate c is sum(min(base, d2[:, c]))
            cand_costs = np.minimum(base[:, None], d2).sum(axis=0)
            cand_costs[in_set] = np.inf
            c = int(np.argmin(cand_costs))
            if cand_costs[c] < best_cost:
                best_cost, best_pair = float(cand_costs[c]), (out_pos, c)
        if best_pair is None or best_cost > shrink * cost:
            break
        current = current.copy()
        current[best_pair[0]] = best_pair[1]
        current.sort()
        cost = best_cost
    return _solution_from_indices(points, d2, current)


def kmedian_exhaustive(points, k: int, max_subsets: int = 1_000_000) -> KMedianSolution:
    """Exact optimum over all C(M, k) center subsets (ties: first subset).

    Raises:
        TooFewPoints: fewer points than centers.
        InstanceTooLarge: C(M, k) exceeds ``max_subsets``.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if m < k:
        raise TooFewPoints(f"{m} points < k = {k}")
    total = math.comb(m, k)
    if total > max_subsets:
        raise InstanceTooLarge(f"C({m}, {k}) = {total} > {max_subsets}")
    d2 = _sq_to_centers(points, points)
    best_cost, best_idx = math.inf, None
    combos = itertools.combinations(range(m), k)
    chunk_size = max(1, min(8192, total))
    while True:
        chunk = list(itertools.islice(combos, chunk_size))
        if not chunk:
            break
        idx = np.array(chunk, dtype=int)  # (batch, k)
        costs = d2[:, idx].min(axis=2).sum(axis=0)
        arg = int(np.argmin(costs))
        if costs[arg] < best_cost:
            best_cost, best_idx = float(costs[arg]), idx[arg]
    return _solution_from_indices(points, d2, best_idx)


def sigma_hat(points, solution: KMedianSolution, normalization: str = "paper") -> float:
    """Maximum-likelihood spherical width for a fixed assignment.

    paper:    sigma^2 = 2 * objective / (M * n)
    standard: sigma^2 = objective / (M * n)
    """
    if normalization not in _NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {_NORMALIZATIONS}")
    points = np.asarray(points, dtype=float)
    m, n = points.shape
    scale = 2.0 if normalization == "paper" else 1.0
    return math.sqrt(scale * solution.objective / (m * n))


def spherical_log_likelihood(
    points,
    solution: KMedianSolution,
    sigma: float | None = None,
    normalization: str = "paper",
) -> float:
    """Log-likelihood of the points under the fitted spherical model.

    paper:    -[(M n / 2) ln(2 pi sigma) + objective / (2 sigma^2)]
    standard: -[(M n / 2) ln(2 pi sigma^2) + objective / (2 sigma^2)]

    With the matching maximum-likelihood sigma the quadratic term equals
    M n / 4 (paper) or M n / 2 (standard) exactly.  When every point sits on
    its center the likelihood is unbounded: returns +inf with a
    ZeroSigmaWarning.
    """
    if normalization not in _NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {_NORMALIZATIONS}")
    points = np.asarray(points, dtype=float)
    m, n = points.shape
    cost = solution.objective
    if sigma is None:
        sigma = sigma_hat(points, solution, normalization)
        if sigma > 0.0:
            quad = cost / (2.0 * sigma * sigma)
            expected = m * n / (4.0 if normalization == "paper" else 2.0)
            assert abs(quad - expected) <= 1e-9 * expected, (quad, expected)
    if sigma == 0.0:
        warnings.warn("all points coincide with centers", ZeroSigmaWarning)
        return math.inf
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    log_norm = (
        math.log(2.0 * math.pi * sigma)
        if normalization == "paper"
        else math.log(2.0 * math.pi * sigma * sigma)
    )
    return -((m * n / 2.0) * log_norm + cost / (2.0 * sigma * sigma))


@dataclass
class FitResult:
    """Output of fit_spherical_mixture."""

    solution: KMedianSolution
    sigma: float
    log_likelihood: float
    weights: np.ndarray
    normalization: str = "paper"


def fit_spherical_mixture(
    points,
    k: int,
    rng: np.random.Generator,
    config: LocalSearchConfig | None = None,
    normalization: str = "paper",
) -> FitResult:
    """Local-search k-median fit plus width, likelihood, and cluster weights."""
    points = np.asarray(points, dtype=float)
    solution = kmedian_local_search(points, k, rng, config)
    sig = sigma_hat(points, solution, normalization)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroSigmaWarning)
        loglik = spherical_log_likelihood(points, solution, None, normalization)
    if sig == 0.0:
        warnings.warn("all points coincide with centers", ZeroSigmaWarning)
    counts = np.bincount(solution.assignment, minlength=k)
    return FitResult(
        solution=solution,
        sigma=sig,
        log_likelihood=loglik,
        weights=counts / points.shape[0],
        normalization=normalization,
    )
