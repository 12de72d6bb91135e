"""Pairwise separation margins and planting of separated mixtures.

A pair of components (with median radii R_i, R_j and top standard deviations
sigma_i, sigma_j) counts as t-separated when

    |p_i - p_j|^2 >= -|R_i^2 - R_j^2|
                     + c1 * t * (R_i + R_j) * (sigma_i + sigma_j)
                     + c2 * t^2 * (sigma_i^2 + sigma_j^2).

"paper" mode fixes (c1, c2) = (500, 100), which is what the classification
guarantees assume.  "practical" mode defaults to (60, 30), the coefficients
of the cross-distance lower bound that the peeling argument actually
consumes; it keeps desk-scale experiments affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePlacement, InvalidDelta, MissingMedianRadius
from .model import GaussianParams, Mixture, make_gaussian, median_radius, random_rotation

_PAPER_CONSTANTS = (500.0, 100.0)
_PRACTICAL_CONSTANTS = (60.0, 30.0)


@dataclass(frozen=True)
class SeparationConfig:
    """Separation scale t plus the inequality constants.

    t = 0 is accepted for diagnostics (the margin is then just the distance
    term against the radius gap); classification refuses it.
    """

    t: float
    mode: str = "paper"
    c1: float | None = None
    c2: float | None = None

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if self.mode not in ("paper", "practical"):
            raise ValueError(f"unknown mode {self.mode!r}")
        defaults = _PAPER_CONSTANTS if self.mode == "paper" else _PRACTICAL_CONSTANTS
        c1 = defaults[0] if self.c1 is None else float(self.c1)
        c2 = defaults[1] if self.c2 is None else float(self.c2)
        if self.mode == "paper" and (c1, c2) != _PAPER_CONSTANTS:
            raise ValueError("paper mode fixes the constants at (500, 100)")
        if c1 <= 0 or c2 <= 0:
            raise ValueError("constants must be positive")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)


@dataclass
class SeparationReport:
    """Margin matrix (NaN diagonal) and the overall verdict."""

    margins: np.ndarray
    satisfied: bool
    config: SeparationConfig

    @property
    def min_margin(self) -> float:
        off = self.margins[~np.isnan(self.margins)]
        return float(off.min()) if off.size else math.inf


def schedule_t(sample_size: int, delta: float) -> float:
    """Separation scale 100 * ln(sample_size) / delta."""
    if sample_size < 2:
        raise ValueError(f"sample_size must be >= 2, got {sample_size}")
    if delta <= 0 or delta > 1:
        raise InvalidDelta(f"delta must be in (0, 1], got {delta}")
    return 100.0 * math.log(sample_size) / delta


def pair_separation_rhs(
    r_i: float, sigma_i: float, r_j: float, sigma_j: float, config: SeparationConfig
) -> float:
    """Right-hand side of the separation inequality for one pair."""
    t = config.t
    return (
        -abs(r_i * r_i - r_j * r_j)
        + config.c1 * t * (r_i + r_j) * (sigma_i + sigma_j)
        + config.c2 * t * t * (sigma_i * sigma_i + sigma_j * sigma_j)
    )


def pair_margin(
    r_i: float,
    sigma_i: float,
    r_j: float,
    sigma_j: float,
    center_dist_sq: float,
    config: SeparationConfig,
) -> float:
    """Margin |p_i - p_j|^2 - rhs for one pair; >= 0 means separated."""
    return center_dist_sq - pair_separation_rhs(r_i, sigma_i, r_j, sigma_j, config)


def separation_margin(mixture: Mixture, config: SeparationConfig) -> SeparationReport:
    """Evaluate all pairwise margins.

    Every component must carry an estimated median radius.  The matrix is
    exactly symmetric: each unordered pair is evaluated once and mirrored.
    """
    k = mixture.k
    radii = [c.require_median_radius() for c in mixture.components]
    sigmas = [c.sigma_max for c in mixture.components]
    centers = np.array([c.center for c in mixture.components])
    margins = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(i + 1, k):
            d2 = float(np.sum((centers[i] - centers[j]) ** 2))
            m = pair_margin(radii[i], sigmas[i], radii[j], sigmas[j], d2, config)
            margins[i, j] = m
            margins[j, i] = m
    satisfied = bool(k == 1 or np.all(margins[~np.isnan(margins)] >= 0))
    return SeparationReport(margins=margins, satisfied=satisfied, config=config)


def _component_from_shape(n, shape, rng) -> tuple[np.ndarray, np.ndarray]:
    """Return (eigenvalues, rotation) for one shape spec entry.

    A (lo, hi) pair draws eigenvalues uniformly from [lo, hi] with a random
    rotation; an explicit length-n array is used as-is with a random rotation.
    """
    if isinstance(shape, tuple) and len(shape) == 2 and np.isscalar(shape[0]):
        lo, hi = float(shape[0]), float(shape[1])
        if not (0 < lo <= hi):
            raise ValueError(f"bad eigenvalue range ({lo}, {hi})")
        lam = rng.uniform(lo, hi, size=n)
    else:
        lam = np.asarray(shape, dtype=float).reshape(-1)
    return lam, random_rotation(n, rng)


def plant_separated_mixture(
    n: int,
    k: int,
    shape_spec,
    config: SeparationConfig,
    slack: float,
    rng: np.random.Generator,
    weights=None,
    radius_samples: int = 100_000,
) -> Mixture:
    """Build a mixture whose every pair is separated with the given slack.

    Shapes are drawn per ``shape_spec`` (one entry, or a list of k entries,
    each either a (lo, hi) eigenvalue range or an explicit spectrum).  Median
    radii are estimated up front (closed path when spherical).  For each pair
    the minimal center distance d_ij = sqrt(max(rhs, 0)) is computed, and
    centers go on mutually orthogonal axes at distances chosen so that every
    pairwise distance is >= slack * d_ij.  With slack = 1 the binding pairs
    sit exactly at the threshold.

    When k - 1 > n orthogonal axes are unavailable; placement falls back to
    random unit directions with a verification loop and raises
    InfeasiblePlacement after 100 rejected attempts.
    """
    if slack < 1.0:
        raise ValueError(f"slack must be >= 1, got {slack}")
    if k < 1:
        raise ValueError("k must be >= 1")
    specs = shape_spec if isinstance(shape_spec, list) else [shape_spec] * k
    if len(specs) != k:
        raise ValueError(f"shape_spec has {len(specs)} entries for k={k}")
    comps = []
    for spec in specs:
        lam, rot = _component_from_shape(n, spec, rng)
        comp = make_gaussian(np.zeros(n), lam, rot)
        if comp.is_spherical():
            median_radius(comp, method="exact")
        else:
            median_radius(comp, rng, num_samples=radius_samples, method="mc")
        comps.append(comp)
    if weights is None:
        weights = np.full(k, 1.0 / k)
    radii = [c.median_radius for c in comps]
    sigmas = [c.sigma_max for c in comps]
    need = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            rhs = pair_separation_rhs(radii[i], sigmas[i], radii[j], sigmas[j], config)
            need[i, j] = need[j, i] = math.sqrt(max(rhs, 0.0))

    pad = 1.0 + 1e-9  # keeps float roundoff from flipping a zero margin negative
    if k - 1 <= n:
        # component 0 at the origin, the rest on distinct axes: the (0, i)
        # distance is D_i and the (i, j) distance is sqrt(D_i^2 + D_j^2), so
        # D_i >= slack * max(d_0i, max_j d_ij / sqrt(2)) covers every pair.
        for i, comp in enumerate(comps):
            if i == 0:
                continue
            others = [need[i, j] / math.sqrt(2.0) for j in range(1, k) if j != i]
            d = slack * max([need[0, i]] + others) * pad
            comp.center = comp.center.copy()
            comp.center[i - 1] = d
        mixture = Mixture(components=comps, weights=weights)
        report = separation_margin(mixture, config)
        if not report.satisfied:
            raise InfeasiblePlacement(
                f"orthogonal placement failed verification: min margin "
                f"{report.min_margin:.3e}"
            )
        return mixture
    # random-direction fallback
    d_scale = slack * float(need.max()) * pad
    for attempt in range(100):
        centers = np.zeros((k, n))
        for i in range(1, k):
            u = rng.standard_normal(n)
            centers[i] = d_scale * u / np.linalg.norm(u)
        for i, comp in enumerate(comps):
            comp.center = centers[i]
        mixture = Mixture(components=comps, weights=weights)
        if separation_margin(mixture, config).satisfied:
            return mixture
        d_scale *= 1.5
    raise InfeasiblePlacement(f"no valid placement after 100 attempts (k={k}, n={n})")
