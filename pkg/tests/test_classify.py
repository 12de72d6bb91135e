import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from sepmix.classify import (
    ClassifierConfig,
    classify_general,
    classify_spherical,
    find_gap,
    max_variance,
    pairwise_sq_dists,
    smallest_dense_ball,
)
from sepmix.errors import (
    EmptyPeel,
    NoGapWithinCap,
    ResidualPointsAfterKPeels,
    ThresholdTooLarge,
)
from sepmix.model import Mixture, make_gaussian, sample_mixture, spherical_median_radius
from sepmix.scoring import partition_compare
from sepmix.separation import SeparationConfig, plant_separated_mixture


def _column(vals):
    return np.asarray(vals, dtype=float)[:, None]


def _spherical_mixture(centers, sigma=1.0):
    comps = []
    n = len(centers[0])
    for c in centers:
        g = make_gaussian(np.asarray(c, dtype=float), np.full(n, sigma * sigma))
        g.median_radius = spherical_median_radius(sigma, n)
        comps.append(g)
    k = len(centers)
    return Mixture(components=comps, weights=np.full(k, 1.0 / k))


# ---------------------------------------------------------------------------
# pairwise_sq_dists
# ---------------------------------------------------------------------------


def test_pairwise_sq_dists_matches_loops():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(30, 4))
    d2 = pairwise_sq_dists(pts)
    for i in range(30):
        for j in range(30):
            assert d2[i, j] == pytest.approx(
                float(np.sum((pts[i] - pts[j]) ** 2)), rel=1e-9, abs=1e-9
            )


def test_pairwise_sq_dists_clips_negative_roundoff():
    pts = np.full((3, 2), 1e8)
    d2 = pairwise_sq_dists(pts)
    assert np.all(d2 >= 0.0)


# ---------------------------------------------------------------------------
# smallest_dense_ball
# ---------------------------------------------------------------------------


def test_dense_ball_line_example():
    pts = _column([0.0, 1.0, 2.0, 10.0])
    center, alpha = smallest_dense_ball(pts, np.arange(4), 3)
    assert center == 1
    assert alpha == pytest.approx(1.0)


def test_dense_ball_threshold_one_is_radius_zero():
    pts = _column([5.0, 7.0, 3.0])
    center, alpha = smallest_dense_ball(pts, np.arange(3), 1)
    assert alpha == 0.0
    assert center == 0  # lowest index wins the tie


def test_dense_ball_identical_points():
    pts = np.zeros((6, 3))
    for threshold in (1, 3, 6):
        center, alpha = smallest_dense_ball(pts, np.arange(6), threshold)
        assert alpha == 0.0
        assert center == 0


def test_dense_ball_brute_force_oracle():
    rng = np.random.default_rng(12)
    pts = rng.normal(size=(40, 3))
    T = np.arange(40)
    for threshold in (1, 5, 17, 40):
        center, alpha = smallest_dense_ball(pts, T, threshold)
        # oracle: for every candidate center the radius is the threshold-th
        # smallest distance; the reported alpha must be the global minimum
        d = np.sqrt(pairwise_sq_dists(pts))
        radii = np.sort(d, axis=1)[:, threshold - 1]
        assert alpha == pytest.approx(float(radii.min()), rel=1e-12)
        assert center == int(np.argmin(radii))


def test_dense_ball_respects_subset():
    pts = _column([0.0, 1.0, 2.0, 10.0, 10.5])
    center, alpha = smallest_dense_ball(pts, np.array([3, 4]), 2)
    assert center == 3
    assert alpha == pytest.approx(0.5)


def test_dense_ball_threshold_too_large():
    pts = _column([0.0, 1.0])
    with pytest.raises(ThresholdTooLarge):
        smallest_dense_ball(pts, np.arange(2), 3)


# ---------------------------------------------------------------------------
# max_variance
# ---------------------------------------------------------------------------


def test_max_variance_two_points():
    beta, direction = max_variance(np.array([[-1.0, 0.0], [1.0, 0.0]]))
    assert beta == pytest.approx(1.0, rel=1e-6)
    assert abs(direction[0]) == pytest.approx(1.0, rel=1e-4)


def test_max_variance_single_point():
    beta, direction = max_variance(np.array([[3.0, 4.0]]))
    assert beta == 0.0
    assert np.linalg.norm(direction) == pytest.approx(1.0)


def test_max_variance_matches_dense_eigensolver():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(200, 6)) @ np.diag([3.0, 2.0, 1.0, 1.0, 0.5, 0.1])
    beta, direction = max_variance(pts)
    centered = pts - pts.mean(axis=0)
    eigs = np.linalg.eigvalsh(centered.T @ centered / pts.shape[0])
    assert beta == pytest.approx(float(eigs[-1]), rel=1e-6)
    # direction quality: its Rayleigh quotient should match beta
    quad = float(direction @ (centered.T @ (centered @ direction))) / pts.shape[0]
    assert quad == pytest.approx(beta, rel=1e-6)


def test_max_variance_translation_invariant():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(80, 4))
    b1, _ = max_variance(pts)
    b2, _ = max_variance(pts + 1000.0)
    assert b1 == pytest.approx(b2, rel=1e-7)


# ---------------------------------------------------------------------------
# find_gap
# ---------------------------------------------------------------------------


def test_find_gap_immediate():
    pts = _column([0.0, 1.0, 2.0, 10.0])
    # B(0, 2) and B(0, 3) both hold {0,1,2}
    assert find_gap(pts, np.arange(4), 0, alpha=2.0, nu=1.0, step_cap=100) == 1


def test_find_gap_walks_until_stable():
    pts = _column([0.0, 1.0, 2.0, 3.0, 4.0, 20.0])
    # radii 2,3,4,5: counts grow 3,4,5,5 -> s=4
    assert find_gap(pts, np.arange(6), 0, alpha=1.0, nu=1.0, step_cap=100) == 4


def test_find_gap_everything_inside_alpha():
    pts = _column([0.0, 0.5, 0.9])
    assert find_gap(pts, np.arange(3), 0, alpha=1.0, nu=0.1, step_cap=10) == 1


def test_find_gap_cap_exceeded():
    pts = _column(np.arange(50, dtype=float))
    with pytest.raises(NoGapWithinCap):
        find_gap(pts, np.arange(50), 0, alpha=0.5, nu=1.0, step_cap=10)


def test_find_gap_requires_positive_nu():
    pts = _column([0.0, 1.0])
    with pytest.raises(ValueError):
        find_gap(pts, np.arange(2), 0, alpha=1.0, nu=0.0, step_cap=10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_find_gap_matches_direct_enumeration(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(25, 2)) * rng.uniform(0.5, 3.0)
    alpha = float(rng.uniform(0.0, 2.0))
    nu = float(rng.uniform(0.05, 1.0))
    d = np.sqrt(((pts - pts[0]) ** 2).sum(axis=1))
    want = None
    for s in range(1, 1000):
        inner = np.count_nonzero(d <= alpha + (s - 1) * nu)
        outer = np.count_nonzero(d <= alpha + s * nu)
        if inner == outer:
            want = s
            break
    assert find_gap(pts, np.arange(25), 0, alpha=alpha, nu=nu, step_cap=1000) == want


# ---------------------------------------------------------------------------
# classify_general
# ---------------------------------------------------------------------------


def test_classify_single_component_single_cluster():
    mix = _spherical_mixture([[0.0] * 6])
    samples = sample_mixture(mix, np.random.default_rng(2), 300)
    part = classify_general(samples, ClassifierConfig(k=1, w_min=1.0, t_override=10.0))
    assert part.k == 1
    assert np.array_equal(np.sort(part.clusters[0]), np.arange(300))


def test_classify_planted_three_components_exact():
    cfg = SeparationConfig(t=10.0, mode="practical")
    mix = plant_separated_mixture(
        n=16, k=3, shape_spec=(1.0, 1.0), config=cfg, slack=1.5,
        rng=np.random.default_rng(20),
    )
    samples = sample_mixture(mix, np.random.default_rng(21), 3000, seed=21)
    part = classify_general(
        samples, ClassifierConfig(k=3, w_min=1.0 / 3.0, delta=0.05, t_override=10.0)
    )
    match = partition_compare(part, samples.labels)
    assert match.exact_match
    assert part.trace is not None and len(part.trace.steps) == 3


def test_classify_trace_records_peel_quantities():
    cfg = SeparationConfig(t=10.0, mode="practical")
    mix = plant_separated_mixture(
        n=8, k=2, shape_spec=(1.0, 1.0), config=cfg, slack=1.5,
        rng=np.random.default_rng(30),
    )
    samples = sample_mixture(mix, np.random.default_rng(31), 1000, seed=31)
    part = classify_general(
        samples, ClassifierConfig(k=2, w_min=0.5, delta=0.05, t_override=10.0)
    )
    for step in part.trace.steps:
        assert step.alpha >= 0
        assert step.beta > 0
        assert step.nu == pytest.approx(np.sqrt(0.5 * step.beta / 8.0))
        assert step.s >= 1
        assert step.removal_radius > step.alpha
        assert step.removed.size > 0
    sizes = sorted(len(c) for c in part.clusters)
    assert sum(sizes) == 1000


def test_classify_permutation_invariance():
    cfg = SeparationConfig(t=10.0, mode="practical")
    mix = plant_separated_mixture(
        n=8, k=2, shape_spec=(1.0, 1.0), config=cfg, slack=1.5,
        rng=np.random.default_rng(40),
    )
    samples = sample_mixture(mix, np.random.default_rng(41), 800, seed=41)
    ccfg = ClassifierConfig(k=2, w_min=0.5, t_override=10.0)
    base = classify_general(samples, ccfg)
    perm = np.random.default_rng(42).permutation(800)
    shuffled = samples.points[perm]
    moved = classify_general(shuffled, ccfg)
    # map shuffled indices back and compare as sets of frozensets
    back = [frozenset(perm[c].tolist()) for c in moved.clusters]
    orig = [frozenset(c.tolist()) for c in base.clusters]
    assert set(back) == set(orig)


def test_classify_rigid_motion_invariance():
    from sepmix.model import random_rotation

    cfg = SeparationConfig(t=10.0, mode="practical")
    mix = plant_separated_mixture(
        n=8, k=2, shape_spec=(1.0, 1.0), config=cfg, slack=1.5,
        rng=np.random.default_rng(50),
    )
    samples = sample_mixture(mix, np.random.default_rng(51), 700, seed=51)
    ccfg = ClassifierConfig(k=2, w_min=0.5, t_override=10.0)
    base = classify_general(samples, ccfg)
    rot = random_rotation(8, np.random.default_rng(52))
    moved_pts = samples.points @ rot.T + np.full(8, 13.0)
    moved = classify_general(moved_pts, ccfg)
    assert set(frozenset(c.tolist()) for c in base.clusters) == set(
        frozenset(c.tolist()) for c in moved.clusters
    )


def test_classify_sample_size_precondition():
    # threshold is 1 here, so k * threshold = 4 exceeds the 3 samples
    pts = np.random.default_rng(0).normal(size=(3, 3))
    with pytest.raises(ValueError):
        classify_general(pts, ClassifierConfig(k=4, w_min=0.25, t_override=5.0))


def test_classify_unseparated_data_errors():
    # one blob asked to split into two: either no gap appears within the cap,
    # the first peel removes nearly everything (starving the second), or
    # points beyond k peels remain
    pts = np.random.default_rng(60).normal(size=(400, 4))
    with pytest.raises(
        (NoGapWithinCap, ResidualPointsAfterKPeels, EmptyPeel, ThresholdTooLarge)
    ):
        classify_general(
            pts, ClassifierConfig(k=2, w_min=0.5, t_override=10.0, step_cap=200)
        )


def test_classifier_config_validation():
    with pytest.raises(ValueError):
        ClassifierConfig(k=0, w_min=0.5)
    with pytest.raises(ValueError):
        ClassifierConfig(k=3, w_min=0.5)  # k * w_min > 1
    with pytest.raises(ValueError):
        ClassifierConfig(k=2, w_min=0.5, delta=0.0)


def test_classifier_refuses_nonpositive_t():
    pts = np.random.default_rng(0).normal(size=(40, 3))
    with pytest.raises(ValueError):
        classify_general(pts, ClassifierConfig(k=1, w_min=1.0, t_override=-1.0))


# ---------------------------------------------------------------------------
# classify_spherical
# ---------------------------------------------------------------------------


def test_spherical_single_cluster_covers_everything():
    mix = _spherical_mixture([[0.0] * 32])
    samples = sample_mixture(mix, np.random.default_rng(70), 500)
    part = classify_spherical(samples, k=1, t=5.0)
    assert np.array_equal(np.sort(part.clusters[0]), np.arange(500))


def test_spherical_planted_four_components():
    centers = np.zeros((4, 64))
    for i in range(1, 4):
        centers[i, i - 1] = 50.0
    mix = _spherical_mixture([c for c in centers])
    samples = sample_mixture(mix, np.random.default_rng(71), 2000, seed=71)
    part = classify_spherical(samples, k=4, t=5.0)
    assert partition_compare(part, samples.labels).exact_match


def test_spherical_coincident_pair_degenerate():
    # two identical points: min distance 0, first cluster is that ball of
    # radius 0 (all coincident copies)
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
    part = classify_spherical(pts, k=2, t=1.0)
    assert sorted(part.clusters[0].tolist()) == [0, 1]
    assert part.clusters[1].tolist() == [2]


def test_spherical_requires_positive_t():
    pts = np.random.default_rng(0).normal(size=(10, 3))
    with pytest.raises(ValueError):
        classify_spherical(pts, k=1, t=0.0)


def test_spherical_residual_error_when_ball_too_small():
    # clusters too diffuse for the low-dimensional radius factor: stragglers
    # are left over after k peels
    mix = _spherical_mixture([[0.0] * 2, [60.0, 0.0]])
    samples = sample_mixture(mix, np.random.default_rng(72), 600, seed=72)
    with pytest.raises(ResidualPointsAfterKPeels):
        classify_spherical(samples, k=2, t=9.0)


def test_spherical_ambient_dim_override():
    # embedded concentric data carries its true dimension in metadata; the
    # radius factor must use it rather than the matrix width
    from sepmix.model import sample_concentric_spherical_embedded

    s = sample_concentric_spherical_embedded(
        sigmas=[1.0, 40.0],
        weights=[0.5, 0.5],
        ambient_dim=4_000_000,
        rng=np.random.default_rng(73),
        count=300,
    )
    part = classify_spherical(s, k=2, t=5.0)
    assert partition_compare(part, s.labels).exact_match
