"""Distance-based peeling classifiers for separated Gaussian mixtures.

The general classifier repeats k times on the remaining index set T:

  1. find the smallest ball around a sample point holding at least
     ceil(3 * w_min * |S| / 4) points of T (center x, radius alpha);
  2. beta = largest directional variance of the points in B(x, alpha);
  3. march outward from alpha in steps of nu = sqrt(w_min * beta / 8) until
     one step adds no new point of T (step count s);
  4. beta' = largest directional variance within B(x, alpha + s * nu);
  5. remove B(x, alpha + s * nu + 3 * sqrt(beta') * (ln(|S| / delta) + 1)).

Every quantity above depends on the points only through pairwise distances
and subset covariance spectra, so the output is invariant under rigid
motions and (up to index relabeling) under point order.

The spherical warm-up instead removes, k times, the ball of radius
|x0 - y0| * (1 + 3 t / sqrt(n)) around the closest remaining pair (x0, y0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DiagnosticWarning,
    EmptyPeel,
    NoGapWithinCap,
    ResidualPointsAfterKPeels,
    ThresholdTooLarge,
)
from .model import LabeledSampleSet
from .separation import schedule_t

_STEP_CAP_MAX = 1_000_000


@dataclass(frozen=True)
class ClassifierConfig:
    """Knobs for the general classifier.

    ``t_override`` replaces the schedule t = 100 ln|S| / delta; t only feeds
    diagnostics (the peeling radii are t-free), but it must be positive.
    ``step_cap`` bounds the step-3 search; when None a per-peel cap is derived
    from the observed radius spread, bounded by 1e6.
    """

    k: int
    w_min: float
    delta: float = 0.05
    t_override: float | None = None
    step_cap: int | None = None
    power_max_iters: int = 500
    power_tol: float = 1e-4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0 < self.w_min <= 1) or self.k * self.w_min > 1 + 1e-12:
            raise ValueError(f"need 0 < w_min and k * w_min <= 1, got {self.w_min}")
        if not (0 < self.delta <= 1):
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.step_cap is not None and self.step_cap < 1:
            raise ValueError("step_cap must be >= 1")


@dataclass
class PeelStep:
    """Trace of one peel iteration."""

    center_index: int
    alpha: float
    beta: float
    nu: float
    s: int
    beta_prime: float
    removal_radius: float
    removed: np.ndarray


@dataclass
class PeelTrace:
    threshold: int
    t: float
    delta: float
    steps: list[PeelStep] = field(default_factory=list)


@dataclass
class Partition:
    """Disjoint index clusters covering the whole sample, in peel order."""

    clusters: list[np.ndarray]
    trace: PeelTrace | None = None

    @property
    def k(self) -> int:
        return len(self.clusters)

    def size(self) -> int:
        return int(sum(len(c) for c in self.clusters))

    def as_labels(self) -> np.ndarray:
        """Cluster id per point index (clusters must cover 0..M-1)."""
        labels = np.full(self.size(), -1, dtype=int)
        for cid, cluster in enumerate(self.clusters):
            labels[cluster] = cid
        return labels

    def validate(self):
        seen = np.concatenate(self.clusters) if self.clusters else np.array([], int)
        if len(np.unique(seen)) != len(seen):
            raise ValueError("clusters overlap")
        if seen.size and (seen.min() < 0 or len(seen) != seen.max() + 1):
            raise ValueError("clusters do not cover a 0..M-1 index range")


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Squared euclidean distances between rows, via the Gram expansion."""
    b = a if b is None else b
    aa = np.einsum("ij,ij->i", a, a)
    bb = aa if b is a else np.einsum("ij,ij->i", b, b)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _points_of(samples) -> tuple[np.ndarray, LabeledSampleSet | None]:
    if isinstance(samples, LabeledSampleSet):
        return samples.points, samples
    return np.asarray(samples, dtype=float), None


def smallest_dense_ball(points, T, threshold: int) -> tuple[int, float]:
    """Smallest ball centered on a point of T holding >= threshold points of T.

    Returns (center point index, radius alpha).  The radius is the
    threshold-th smallest within-T distance from the center (the center
    itself counts).  Ties go to the lowest point index.

    Raises:
        ThresholdTooLarge: threshold exceeds |T|.
    """
    points, _ = _points_of(points)
    T = np.sort(np.asarray(T, dtype=int))
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    if threshold > T.size:
        raise ThresholdTooLarge(f"threshold {threshold} > |T| = {T.size}")
    dists = np.sqrt(pairwise_sq_dists(points[T]))
    local, alpha = _dense_ball_from_dists(dists, threshold)
    return int(T[local]), alpha


def _dense_ball_from_dists(dists: np.ndarray, threshold: int) -> tuple[int, float]:
    kth = np.partition(dists, threshold - 1, axis=1)[:, threshold - 1]
    local = int(np.argmin(kth))  # first minimum = lowest index
    return local, float(kth[local])


def max_variance(
    points, max_iters: int = 500, tol: float = 1e-4
) -> tuple[float, np.ndarray]:
    """Largest directional variance of a point set and its direction.

    Power iteration on the centered second-moment operator, applied through
    the data matrix (the n x n matrix is never formed).  The start vector is
    the coordinate axis of largest range with a small dense component mixed
    in so that exactly invariant axis-aligned starts cannot lock onto a
    subdominant eigenvector.  Stops when the residual ||Av - beta v|| drops
    below tol * beta, which for a symmetric operator puts beta within
    tol * beta of a true eigenvalue.
    """
    points, _ = _points_of(points)
    m, n = points.shape
    if m == 0:
        raise ValueError("empty point set")
    y = points - points.mean(axis=0)
    ranges = np.ptp(y, axis=0) if m > 1 else np.zeros(n)
    axis = int(np.argmax(ranges))
    if m == 1 or ranges[axis] == 0.0:
        v = np.zeros(n)
        v[axis] = 1.0
        return 0.0, v
    v = np.full(n, 1e-6)
    v[axis] += 1.0
    v /= np.linalg.norm(v)
    beta = 0.0
    for _ in range(max_iters):
        av = y.T @ (y @ v) / m
        beta = float(v @ av)
        resid = av - beta * v
        if np.linalg.norm(resid) <= tol * max(beta, 1e-300):
            break
        norm = np.linalg.norm(av)
        if norm == 0.0:  # started orthogonal to the whole spread
            return 0.0, v
        v = av / norm
    return beta, v


def find_gap(points, T, center_index: int, alpha: float, nu: float, step_cap: int) -> int:
    """Least s >= 1 with B(x, alpha + s nu) and B(x, alpha + (s-1) nu) equal on T.

    Raises:
        NoGapWithinCap: no such s within step_cap steps.
    """
    points, _ = _points_of(points)
    if nu <= 0:
        raise ValueError("nu must be positive")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    T = np.asarray(T, dtype=int)
    dists = np.sort(np.linalg.norm(points[T] - points[center_index], axis=1))
    return _gap_from_sorted(dists, alpha, nu, step_cap)


def _gap_from_sorted(sorted_dists: np.ndarray, alpha: float, nu: float, step_cap: int) -> int:
    prev = int(np.searchsorted(sorted_dists, alpha, side="right"))
    for s in range(1, step_cap + 1):
        cur = int(np.searchsorted(sorted_dists, alpha + s * nu, side="right"))
        if cur == prev:
            return s
        prev = cur
    raise NoGapWithinCap(
        f"no empty annulus within {step_cap} steps; mixture may be unseparated"
    )


def classify_general(samples, config: ClassifierConfig) -> Partition:
    """Partition a sample from a separated mixture into k clusters by peeling.

    ``samples`` may be a LabeledSampleSet (labels are ignored for the
    partition itself; generation metadata feeds warn-only diagnostics) or a
    plain M x n matrix.

    Raises:
        ThresholdTooLarge: a peel finds fewer live points than the threshold.
        NoGapWithinCap: step 3 exhausts its cap.
        EmptyPeel: a peel removes nothing.
        ResidualPointsAfterKPeels: points remain after k peels.
    """
    points, meta = _points_of(samples)
    m_total = points.shape[0]
    t = config.t_override if config.t_override is not None else schedule_t(
        m_total, config.delta
    )
    if t <= 0:
        raise ValueError(f"separation scale t must be positive, got {t}")
    threshold = math.ceil(3.0 * config.w_min * m_total / 4.0 - 1e-9)
    if m_total < config.k * threshold:
        raise ValueError(
            f"|S| = {m_total} < k * threshold = {config.k * threshold}; "
            "sample too small for the configured w_min"
        )
    log_term = math.log(m_total / config.delta) + 1.0
    trace = PeelTrace(threshold=threshold, t=t, delta=config.delta)
    alive = np.arange(m_total)
    clusters: list[np.ndarray] = []
    for _ in range(config.k):
        if alive.size < threshold:
            raise ThresholdTooLarge(
                f"{alive.size} live points < threshold {threshold} "
                f"after {len(clusters)} peels"
            )
        pts = points[alive]
        dists = np.sqrt(pairwise_sq_dists(pts))
        x_loc, alpha = _dense_ball_from_dists(dists, threshold)
        row = dists[x_loc]
        beta, _ = max_variance(pts[row <= alpha], config.power_max_iters, config.power_tol)
        nu = math.sqrt(config.w_min * beta / 8.0)
        if nu > 0.0:
            cap = config.step_cap
            if cap is None:
                cap = min(
                    _STEP_CAP_MAX,
                    math.ceil(float(row.max()) / nu) + 4 * math.ceil(math.sqrt(beta) / nu) + 1,
                )
            s = _gap_from_sorted(np.sort(row), alpha, nu, cap)
        else:
            s = 1  # all ball points coincide; any step adds nothing
        r_gap = alpha + s * nu
        beta_prime, _ = max_variance(
            pts[row <= r_gap], config.power_max_iters, config.power_tol
        )
        removal_radius = r_gap + 3.0 * math.sqrt(beta_prime) * log_term
        removed_mask = row <= removal_radius
        if not np.any(removed_mask):
            raise EmptyPeel("peel removed no points")
        removed = alive[removed_mask]
        trace.steps.append(
            PeelStep(
                center_index=int(alive[x_loc]),
                alpha=alpha,
                beta=beta,
                nu=nu,
                s=s,
                beta_prime=beta_prime,
                removal_radius=removal_radius,
                removed=removed,
            )
        )
        clusters.append(removed)
        alive = alive[~removed_mask]
    if alive.size:
        raise ResidualPointsAfterKPeels(
            f"{alive.size} points remain after {config.k} peels"
        )
    if meta is not None:
        _emit_bracket_diagnostics(trace, meta, config)
    return Partition(clusters=clusters, trace=trace)


def _emit_bracket_diagnostics(trace: PeelTrace, meta: LabeledSampleSet, config):
    """Warn when beta / beta' leave their theory brackets (needs true sigmas)."""
    if meta.component_sigmas is None or meta.labels is None:
        return
    for step in trace.steps:
        lbls = meta.labels[step.removed]
        comp = int(np.bincount(lbls).argmax())
        s2 = float(meta.component_sigmas[comp]) ** 2
        lo, hi = config.w_min**2 * s2 / 8.0, 4.0 * s2 / config.w_min
        if not (lo <= step.beta <= hi):
            warnings.warn(
                f"beta={step.beta:.4g} outside [{lo:.4g}, {hi:.4g}] for component "
                f"{comp}; sample size is likely below the guarantee scale",
                DiagnosticWarning,
            )
        if not (0.16 * s2 <= step.beta_prime <= 2.5 * s2):
            warnings.warn(
                f"beta'={step.beta_prime:.4g} outside [{0.16 * s2:.4g}, "
                f"{2.5 * s2:.4g}] for component {comp}",
                DiagnosticWarning,
            )


def classify_spherical(samples, k: int, t: float) -> Partition:
    """Warm-up partition for spherical mixtures via closest-pair balls.

    Repeats k times on the remaining set T: find the closest pair (x0, y0)
    (ties to the lexicographically first index pair), then remove
    T ∩ B(x0, |x0 - y0| * (1 + 3 t / sqrt(n))).
    """
    points, meta = _points_of(samples)
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if k < 1:
        raise ValueError("k must be >= 1")
    m_total, n = points.shape
    if meta is not None and meta.ambient_dim is not None:
        n = meta.ambient_dim
    factor = 1.0 + 3.0 * t / math.sqrt(n)
    dists = np.sqrt(pairwise_sq_dists(points))
    alive = np.arange(m_total)
    clusters: list[np.ndarray] = []
    for _ in range(k):
        if alive.size == 0:
            raise EmptyPeel("no points left to peel")
        if alive.size == 1:
            clusters.append(alive.copy())
            alive = alive[:0]
            continue
        sub = dists[np.ix_(alive, alive)]
        np.fill_diagonal(sub, np.inf)
        flat = int(np.argmin(sub))  # row-major: lowest index pair wins ties
        i_loc = flat // alive.size
        radius = float(sub.flat[flat]) * factor
        removed_mask = dists[alive[i_loc]][alive] <= radius
        clusters.append(alive[removed_mask])
        alive = alive[~removed_mask]
    if alive.size:
        raise ResidualPointsAfterKPeels(
            f"{alive.size} points remain after {k} peels"
        )
    return Partition(clusters=clusters)
