"""Monte Carlo validators for concentration claims about Gaussian geometry.

Each check draws seeded samples, measures how often an event holds, and
compares the observed fraction against a claimed probability with a
3-standard-deviation binomial slack:

    slack = max(3 * sqrt(p (1 - p) / trials), 3 / trials)
    pass  = observed >= claimed - slack

A claim can be vacuous (claimed <= 0, or a relative tolerance >= 1); that is
reported, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    GridTooCoarse,
    InvalidDelta,
    PairNotSeparated,
    TooFewSamples,
)
from .model import GaussianParams, sample
from .separation import SeparationConfig, pair_margin

# Coefficients of the cross-distance lower bound between separated components.
CROSS_C1 = 60.0
CROSS_C2 = 30.0


@dataclass(frozen=True)
class EmpiricalBound:
    """Observed frequency of an event against its claimed lower bound."""

    claimed: float
    observed: float
    num_trials: int
    slack: float
    passed: bool


def _bound(claimed: float, hits: int, trials: int) -> EmpiricalBound:
    p = min(max(claimed, 0.0), 1.0)
    slack = max(3.0 * math.sqrt(p * (1.0 - p) / trials), 3.0 / trials)
    observed = hits / trials
    return EmpiricalBound(
        claimed=claimed,
        observed=observed,
        num_trials=trials,
        slack=slack,
        passed=bool(observed >= claimed - slack),
    )


def _require_scale(params: GaussianParams) -> tuple[float, float]:
    return params.require_median_radius(), params.sigma_max


def shell_mass_check(
    params: GaussianParams, t: float, num_samples: int, rng: np.random.Generator
) -> EmpiricalBound:
    """Mass of the shell R +- t sigma_max around the center, claim 1 - e^-t.

    t = 0 is allowed; the claim is then vacuous (lower bound 0).
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if num_samples < 10_000:
        raise TooFewSamples(f"num_samples={num_samples} < 10000")
    radius, sigma = _require_scale(params)
    draws = sample(params, rng, num_samples)
    dist = np.linalg.norm(draws - params.center, axis=1)
    hits = int(np.count_nonzero((dist >= radius - t * sigma) & (dist <= radius + t * sigma)))
    return _bound(1.0 - math.exp(-t), hits, num_samples)


def point_distance_check(
    params: GaussianParams,
    z,
    t: float,
    num_samples: int,
    rng: np.random.Generator,
) -> EmpiricalBound:
    """Squared distance from a fixed point z, claim 1 - 2 e^-t (t >= 1).

    Event:  ((R - t s)+)^2 + |z-p|^2 - 2 sqrt(2 t) |z-p| s
              <= |x - z|^2 <=
            (R + t s)^2 + |z-p|^2 + 2 sqrt(2 t) |z-p| s
    """
    if t < 1:
        raise ValueError(f"stated for t >= 1, got {t}")
    if num_samples < 10_000:
        raise TooFewSamples(f"num_samples={num_samples} < 10000")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != params.dim:
        raise DimensionMismatch(f"z has dim {z.shape[0]}, component {params.dim}")
    radius, sigma = _require_scale(params)
    zp = float(np.linalg.norm(z - params.center))
    cross = 2.0 * math.sqrt(2.0 * t) * zp * sigma
    lo = max(radius - t * sigma, 0.0) ** 2 + zp * zp - cross
    hi = (radius + t * sigma) ** 2 + zp * zp + cross
    draws = sample(params, rng, num_samples)
    d2 = np.sum((draws - z) ** 2, axis=1)
    hits = int(np.count_nonzero((d2 >= lo) & (d2 <= hi)))
    return _bound(1.0 - 2.0 * math.exp(-t), hits, num_samples)


def pair_distance_check(
    params: GaussianParams, t: float, num_pairs: int, rng: np.random.Generator
) -> EmpiricalBound:
    """Squared distance of two independent draws, claim 1 - 3 e^-t (t >= 1).

    Event:  2 R^2 - 8 t s R <= |x - y|^2 <= 2 (R + 2 t s)^2.
    """
    if t < 1:
        raise ValueError(f"stated for t >= 1, got {t}")
    if num_pairs < 10_000:
        raise TooFewSamples(f"num_pairs={num_pairs} < 10000")
    radius, sigma = _require_scale(params)
    draws = sample(params, rng, 2 * num_pairs)
    d2 = np.sum((draws[:num_pairs] - draws[num_pairs:]) ** 2, axis=1)
    lo = 2.0 * radius * radius - 8.0 * t * sigma * radius
    hi = 2.0 * (radius + 2.0 * t * sigma) ** 2
    hits = int(np.count_nonzero((d2 >= lo) & (d2 <= hi)))
    return _bound(1.0 - 3.0 * math.exp(-t), hits, num_pairs)


def _spherical_cross_sq_dists(
    sigma_i: float,
    sigma_j: float,
    center_dist: float,
    n: int,
    num_pairs: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Exact scalar simulation of |x - y|^2 for a spherical pair.

    Writing x = p_i + s_i z1 and y = p_j + s_j z2 and splitting z1, z2 into
    the component along the center line and the orthogonal rest gives

        |x-y|^2 = d^2 + s_i^2 (g1^2 + W1) + s_j^2 (g2^2 + h^2 + W2)
                  + 2 d s_i g1 - 2 d s_j g2 - 2 s_i s_j (g1 g2 + sqrt(W1) h)

    with g1, g2, h standard normal, W1 ~ chi2(n-1), W2 ~ chi2(n-2); h is the
    coordinate of z2 along the unit vector z1_perp.  This reproduces the
    distribution exactly for any n >= 2 without materializing n-vectors, so
    the check stays exact in the million-dimension regime.
    """
    if n < 2:
        raise ValueError("scalar reduction needs n >= 2")
    g1 = rng.standard_normal(num_pairs)
    g2 = rng.standard_normal(num_pairs)
    h = rng.standard_normal(num_pairs)
    w1 = rng.chisquare(n - 1, size=num_pairs)
    w2 = rng.chisquare(n - 2, size=num_pairs) if n > 2 else np.zeros(num_pairs)
    d = center_dist
    return (
        d * d
        + sigma_i**2 * (g1**2 + w1)
        + sigma_j**2 * (g2**2 + h**2 + w2)
        + 2.0 * d * sigma_i * g1
        - 2.0 * d * sigma_j * g2
        - 2.0 * sigma_i * sigma_j * (g1 * g2 + np.sqrt(w1) * h)
    )


# Above this many scalar draws the direct path is not worth materializing.
_DIRECT_BUDGET = 50_000_000


def cross_pair_check(
    params_i: GaussianParams,
    params_j: GaussianParams,
    t: float,
    num_pairs: int,
    rng: np.random.Generator,
) -> EmpiricalBound:
    """Cross-pair squared distance for a separated pair, claim 1 - 6 e^-t.

    Requires the pair to satisfy the separation inequality with the (500,
    100) constants at this t; raises PairNotSeparated otherwise.  Event:

        |x-y|^2 >= 2 min(R_i, R_j)^2
                   + 60 t (s_i + s_j)(R_i + R_j) + 30 t^2 (s_i^2 + s_j^2).

    Spherical pairs whose direct simulation would exceed the draw budget use
    an exact scalar reduction instead (same distribution, different stream).
    """
    if t < 1:
        raise ValueError(f"stated for t >= 1, got {t}")
    if num_pairs < 10_000:
        raise TooFewSamples(f"num_pairs={num_pairs} < 10000")
    if params_i.dim != params_j.dim:
        raise DimensionMismatch("components live in different dimensions")
    r_i, s_i = _require_scale(params_i)
    r_j, s_j = _require_scale(params_j)
    d2_centers = float(np.sum((params_i.center - params_j.center) ** 2))
    margin = pair_margin(r_i, s_i, r_j, s_j, d2_centers, SeparationConfig(t=t, mode="paper"))
    if margin < 0:
        raise PairNotSeparated(f"margin {margin:.4g} < 0 at t={t}")
    bound = (
        2.0 * min(r_i, r_j) ** 2
        + CROSS_C1 * t * (s_i + s_j) * (r_i + r_j)
        + CROSS_C2 * t * t * (s_i * s_i + s_j * s_j)
    )
    n = params_i.dim
    spherical = params_i.is_spherical() and params_j.is_spherical()
    if spherical and 2 * n * num_pairs > _DIRECT_BUDGET:
        d2 = _spherical_cross_sq_dists(
            math.sqrt(float(params_i.eigenvalues[0])),
            math.sqrt(float(params_j.eigenvalues[0])),
            math.sqrt(d2_centers),
            n,
            num_pairs,
            rng,
        )
    else:
        x = sample(params_i, rng, num_pairs)
        y = sample(params_j, rng, num_pairs)
        d2 = np.sum((x - y) ** 2, axis=1)
    hits = int(np.count_nonzero(d2 >= bound))
    return _bound(1.0 - 6.0 * math.exp(-t), hits, num_pairs)


@dataclass
class GrowthCurve:
    """Empirical ball-mass curve and its log-growth rate checks.

    ``low_*`` covers consecutive grid intervals confidently below mass 1/2
    (rate of ln(mass) must be >= bound - slack); ``high_*`` covers intervals
    confidently above 1/2 (rate of ln(1 - mass) must be <= -bound + slack).
    Pair index i refers to the interval [radii[i], radii[i+1]].
    """

    radii: np.ndarray
    mass: np.ndarray
    bound: float
    low_pairs: list[int]
    low_rates: np.ndarray
    low_slacks: np.ndarray
    high_pairs: list[int]
    high_rates: np.ndarray
    high_slacks: np.ndarray

    @property
    def low_pass(self) -> np.ndarray:
        return self.low_rates >= self.bound - self.low_slacks

    @property
    def high_pass(self) -> np.ndarray:
        return self.high_rates <= -self.bound + self.high_slacks

    @property
    def satisfied(self) -> bool:
        return bool(np.all(self.low_pass) and np.all(self.high_pass))


def ball_growth_check(
    params: GaussianParams,
    x,
    radius_grid,
    num_samples: int,
    rng: np.random.Generator,
) -> GrowthCurve:
    """Check the isoperimetric growth rate 2 / (sqrt(pi) sigma_max).

    Estimates mass(r) = F(B(x, r)) on the grid from one set of draws, then
    forms secant slopes of ln(mass) below the half-mass radius and of
    ln(1 - mass) above it.  Grid points enter a regime only when they are
    confidently on its side of 1/2 (3 standard errors) and their log is
    finite.

    Raises:
        GridTooCoarse: fewer than 3 usable grid points in either regime.
    """
    if num_samples < 10_000:
        raise TooFewSamples(f"num_samples={num_samples} < 10000")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != params.dim:
        raise DimensionMismatch(f"x has dim {x.shape[0]}, component {params.dim}")
    radii = np.sort(np.asarray(radius_grid, dtype=float).reshape(-1))
    if radii.size < 2 or np.any(radii < 0):
        raise ValueError("radius grid needs >= 2 nonnegative radii")
    draws = sample(params, rng, num_samples)
    dist = np.sort(np.linalg.norm(draws - x, axis=1))
    counts = np.searchsorted(dist, radii, side="right")
    mass = counts / num_samples
    se = np.sqrt(np.maximum(mass * (1.0 - mass), 0.0) / num_samples)
    bound = 2.0 / (math.sqrt(math.pi) * params.sigma_max)

    low_ok = (mass > 0) & (mass + 3.0 * se <= 0.5)
    high_ok = (mass < 1) & (mass - 3.0 * se >= 0.5)
    if int(low_ok.sum()) < 3 or int(high_ok.sum()) < 3:
        raise GridTooCoarse(
            f"usable grid points: {int(low_ok.sum())} below half mass, "
            f"{int(high_ok.sum())} above; need >= 3 in each regime"
        )

    low_pairs, low_rates, low_slacks = [], [], []
    high_pairs, high_rates, high_slacks = [], [], []
    for i in range(radii.size - 1):
        dr = radii[i + 1] - radii[i]
        if dr <= 0:
            continue
        if low_ok[i] and low_ok[i + 1]:
            rate = (math.log(mass[i + 1]) - math.log(mass[i])) / dr
            # standard error of ln(mass) is se / mass
            slack = 3.0 * (se[i] / mass[i] + se[i + 1] / mass[i + 1]) / dr
            low_pairs.append(i)
            low_rates.append(rate)
            low_slacks.append(slack)
        if high_ok[i] and high_ok[i + 1]:
            rate = (math.log(1.0 - mass[i + 1]) - math.log(1.0 - mass[i])) / dr
            slack = 3.0 * (
                se[i] / (1.0 - mass[i]) + se[i + 1] / (1.0 - mass[i + 1])
            ) / dr
            high_pairs.append(i)
            high_rates.append(rate)
            high_slacks.append(slack)
    return GrowthCurve(
        radii=radii,
        mass=mass,
        bound=bound,
        low_pairs=low_pairs,
        low_rates=np.asarray(low_rates),
        low_slacks=np.asarray(low_slacks),
        high_pairs=high_pairs,
        high_rates=np.asarray(high_rates),
        high_slacks=np.asarray(high_slacks),
    )


@dataclass(frozen=True)
class CovarianceCheck:
    """Directional second-moment agreement at tolerance epsilon."""

    epsilon: float
    passed: bool
    vacuous: bool
    worst_rel_err: float
    num_directions: int


def covariance_concentration_check(
    params: GaussianParams,
    sample_size: int,
    delta: float,
    num_directions: int,
    rng: np.random.Generator,
) -> CovarianceCheck:
    """Directional second moments about the true mean within (1 +- epsilon).

    epsilon = 20 n (sqrt(ln n) + sqrt(ln(1/delta))) / sqrt(sample_size);
    epsilon >= 1 makes the claim vacuous, which is flagged.  Tested
    directions: ``num_directions`` random unit vectors, the n coordinate
    axes, and the top eigenvector.
    """
    if delta <= 0 or delta > 1:
        raise InvalidDelta(f"delta must be in (0, 1], got {delta}")
    if sample_size < 2:
        raise TooFewSamples("sample_size must be >= 2")
    n = params.dim
    eps = (
        20.0
        * n
        * (math.sqrt(math.log(n)) + math.sqrt(math.log(1.0 / delta)))
        / math.sqrt(sample_size)
    )
    dirs = rng.standard_normal((num_directions, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    top = np.zeros(n)
    top_idx = int(np.argmax(params.eigenvalues))
    if params.rotation is None:
        top[top_idx] = 1.0
    else:
        top = params.rotation[:, top_idx]
    w = np.vstack([dirs, np.eye(n), top[None, :]])
    draws = sample(params, rng, sample_size)
    proj = (draws - params.center) @ w.T
    sample_moment = np.mean(proj * proj, axis=0)
    if params.rotation is None:
        wr = w
    else:
        wr = w @ params.rotation
    true_moment = (wr * wr) @ params.eigenvalues
    rel_err = np.abs(sample_moment / true_moment - 1.0)
    worst = float(rel_err.max())
    return CovarianceCheck(
        epsilon=eps,
        passed=bool(worst <= eps),
        vacuous=bool(eps >= 1.0),
        worst_rel_err=worst,
        num_directions=w.shape[0],
    )
