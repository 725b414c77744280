import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obsdiam import (
    FiniteMMSpace,
    InstanceTooLargeError,
    SepQuery,
    Target,
    WeightedCloud,
    concentration_function,
    partial_diameter_exact,
    pushforward,
    sep_exact,
    sep_lower_greedy,
)
from obsdiam.instances import random_coord_cloud, random_line_cloud, random_mmspace
from obsdiam.mmspace import from_points, lipschitz_constant

from . import oracles

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# -- construction and I/O -----------------------------------------------------------


def test_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        FiniteMMSpace([[0, 1], [2, 0]], [1, 1])


def test_rejects_triangle_violation():
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(ValueError, match="triangle"):
        FiniteMMSpace(d, [1, 1, 1])


def test_rejects_negative_weight_and_nonzero_diagonal():
    with pytest.raises(ValueError):
        FiniteMMSpace([[0, 1], [1, 0]], [1, -0.1])
    with pytest.raises(ValueError, match="diagonal"):
        FiniteMMSpace([[1, 1], [1, 0]], [1, 1])


def test_triangle_tolerance_absorbs_rounding():
    d = np.array([[0, 1, 2 + 5e-10], [1, 0, 1], [2 + 5e-10, 1, 0]])
    FiniteMMSpace(d, [1, 1, 1])


def test_instances_are_immutable(two_point):
    with pytest.raises(ValueError):
        two_point.dist[0, 1] = 3.0
    with pytest.raises(AttributeError):
        two_point.total_mass = 2.0


def test_total_mass_is_exact_sum():
    w = [0.1] * 10
    assert FiniteMMSpace(np.zeros((10, 10)), w).total_mass == math.fsum(w)


def test_json_round_trip(tmp_path, rng):
    X = random_mmspace(rng, 6)
    path = tmp_path / "x.json"
    X.to_json(path)
    Y = FiniteMMSpace.from_json(path)
    assert np.array_equal(X.dist, Y.dist) and np.array_equal(X.weights, Y.weights)
    Z = FiniteMMSpace.from_json(json.dumps({"dist": [[0, 2], [2, 0]], "weights": [1, 3]}))
    assert Z.total_mass == 4


def test_json_missing_key():
    with pytest.raises(ValueError, match="weights"):
        FiniteMMSpace.from_json('{"dist": [[0]]}')


def test_csv_round_trip(tmp_path, rng):
    X = random_mmspace(rng, 5)
    X.to_csv(tmp_path / "d.csv", tmp_path / "w.csv")
    Y = FiniteMMSpace.from_csv(tmp_path / "d.csv", tmp_path / "w.csv")
    assert np.array_equal(X.dist, Y.dist) and np.array_equal(X.weights, Y.weights)


def test_csv_single_row_weights(tmp_path):
    (tmp_path / "d.csv").write_text("0,1\n1,0\n")
    (tmp_path / "w.csv").write_text("0.25,0.75\n")
    X = FiniteMMSpace.from_csv(tmp_path / "d.csv", tmp_path / "w.csv")
    assert X.weights.tolist() == [0.25, 0.75]


def test_cloud_json_round_trip():
    c = WeightedCloud.in_coords([[0, 1], [2, 3]], [0.5, 0.5], math.inf)
    doc = json.loads(c.to_json())
    assert doc["target_kind"] == "coordinate-space" and doc["r"] == "inf"
    back = WeightedCloud.from_json(c.to_json())
    assert back.target == c.target and np.array_equal(back.points, c.points)
    line = WeightedCloud.on_line([1, 2], [1, 1])
    assert json.loads(line.to_json())["target_kind"] == "real-line"
    assert WeightedCloud.from_json(line.to_json()).target.is_line


def test_cloud_dimension_must_match_target():
    with pytest.raises(ValueError, match="dimension"):
        WeightedCloud(Target.coords(3, 2), [[0, 1]], [1])


# -- partial diameter ----------------------------------------------------------------------


def test_partial_diameter_two_point(two_point):
    assert partial_diameter_exact(two_point, 0.5) == 0.0
    assert partial_diameter_exact(two_point, 0.0) == 1.0


def test_partial_diameter_line4(line4):
    d = oracles.lr_matrix([0, 1, 2, 3], 1)
    assert oracles.partial_diameter(d, [0.25] * 4, 0.25) == 2.0
    assert partial_diameter_exact(line4, 0.25) == 2.0
    # same measure through the generic branch
    assert partial_diameter_exact(line4.to_mmspace(), 0.25) == 2.0


def test_partial_diameter_kappa_at_least_mass(rng):
    X = random_mmspace(rng, 5)
    assert partial_diameter_exact(X, X.total_mass) == 0.0
    assert partial_diameter_exact(X, 7.0) == 0.0


def test_partial_diameter_negative_kappa(two_point):
    with pytest.raises(ValueError):
        partial_diameter_exact(two_point, -0.1)


def test_partial_diameter_cap(rng):
    X = random_mmspace(rng, 9)
    with pytest.raises(InstanceTooLargeError, match="too large for exact mode"):
        partial_diameter_exact(X, 0.1, cap=8)
    big = random_line_cloud(rng, 500)
    partial_diameter_exact(big, 0.1)  # the line branch has no cap


@pytest.mark.parametrize("seed", range(25))
def test_partial_diameter_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    X = random_mmspace(rng, n)
    kappa = float(rng.uniform(0, 1))
    expect = oracles.partial_diameter(X.dist.tolist(), X.weights.tolist(), kappa)
    assert partial_diameter_exact(X, kappa) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_line_branch_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    c = random_line_cloud(rng, int(rng.integers(1, 10)), grid=seed % 2 == 0)
    kappa = float(rng.uniform(0, 1))
    d = oracles.lr_matrix(c.points, 1)
    expect = oracles.partial_diameter(d.tolist(), c.weights.tolist(), kappa)
    assert partial_diameter_exact(c, kappa) == pytest.approx(expect, abs=1e-12)


def test_coordinate_cloud_matches_bruteforce(rng):
    for r in (1.0, 2.0, math.inf):
        c = random_coord_cloud(rng, 7, 3, r)
        d = oracles.lr_matrix(c.points, r)
        expect = oracles.partial_diameter(d.tolist(), c.weights.tolist(), 0.3)
        assert partial_diameter_exact(c, 0.3) == pytest.approx(expect, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0, 1), st.floats(0, 1))
def test_partial_diameter_nonincreasing(seed, k1, k2):
    rng = np.random.default_rng(seed)
    X = random_mmspace(rng, int(rng.integers(1, 9)))
    lo, hi = sorted((k1, k2))
    assert partial_diameter_exact(X, hi) <= partial_diameter_exact(X, lo)


# -- separation distance ---------------------------------------------------------------------


def test_sep_two_point(two_point):
    assert sep_exact(two_point, SepQuery(0.5, 0.5)) == 1.0
    assert sep_exact(two_point, 0.5) == 1.0


def test_sep_line4(line4):
    d = oracles.lr_matrix([0, 1, 2, 3], 1)
    assert oracles.sep(d, [0.25] * 4, 0.25, 0.25) == 3.0
    assert sep_exact(line4, 0.25) == 3.0


def test_sep_infeasible_is_zero(rng):
    X = random_mmspace(rng, 6)
    assert sep_exact(X, X.total_mass + 0.1, 0.1) == 0.0
    assert sep_exact(X, 0.1, X.total_mass + 0.1) == 0.0


def test_sep_one_point_space():
    assert sep_exact(FiniteMMSpace([[0.0]], [1.0]), 0.1) == 0.0


def test_sep_query_validation():
    with pytest.raises(ValueError):
        SepQuery(-0.1, 0.2)


def test_sep_cap(rng):
    with pytest.raises(InstanceTooLargeError, match="sep_lower_greedy"):
        sep_exact(random_mmspace(rng, 15), 0.1)


@pytest.mark.parametrize("seed", range(30))
def test_sep_matches_bruteforce(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 8))
    X = random_mmspace(rng, n)
    k1, k2 = rng.uniform(0, 0.7, size=2)
    expect = oracles.sep(X.dist.tolist(), X.weights.tolist(), k1, k2)
    assert sep_exact(X, k1, k2) == expect


def test_sep_zero_thresholds_use_nonempty_sets(two_point):
    # A and B may not be empty, so kappa = 0 gives the largest distance
    assert sep_exact(two_point, 0.0, 0.0) == 1.0


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0, 0.8), st.floats(0, 0.8), st.floats(0, 0.8))
def test_sep_nonincreasing(seed, a, b, c):
    rng = np.random.default_rng(seed)
    X = random_mmspace(rng, int(rng.integers(2, 9)))
    lo, hi = sorted((a, b))
    assert sep_exact(X, hi, c) <= sep_exact(X, lo, c)
    assert sep_exact(X, c, hi) <= sep_exact(X, c, lo)


# -- greedy lower bound -------------------------------------------------------------------------


def test_greedy_examples(two_point, line4):
    assert sep_lower_greedy(two_point, 0.5) == 1.0
    assert sep_lower_greedy(two_point, 0.6) == 0.0
    assert sep_lower_greedy(line4, 0.25) == 3.0


@settings(max_examples=80, deadline=None)
@given(seeds, st.floats(0, 0.7), st.floats(0, 0.7))
def test_greedy_is_lower_bound(seed, k1, k2):
    rng = np.random.default_rng(seed)
    X = random_mmspace(rng, int(rng.integers(2, 10)))
    assert sep_lower_greedy(X, k1, k2) <= sep_exact(X, k1, k2)


def test_greedy_runs_beyond_exact_cap(rng):
    X = random_mmspace(rng, 40)
    assert sep_lower_greedy(X, 0.2) > 0


# -- pushforward ------------------------------------------------------------------------------------


def test_pushforward_identity(line4):
    X = line4.to_mmspace()
    c = pushforward(X, line4.points[:, 0])
    assert np.array_equal(c.points, line4.points)
    assert np.array_equal(c.weights, line4.weights)


def test_pushforward_constant(rng):
    X = random_mmspace(rng, 7)
    c = pushforward(X, lambda i: 3.0)
    assert c.size == 1 and c.points[0, 0] == 3.0
    assert c.total_mass == pytest.approx(X.total_mass, abs=1e-15)


def test_pushforward_two_point(two_point):
    c = pushforward(two_point, lambda i: [0.0, 1.0][i])
    assert c.points[:, 0].tolist() == [0.0, 1.0]
    assert c.weights.tolist() == [0.5, 0.5]


def test_pushforward_dimension_mismatch(two_point):
    with pytest.raises(ValueError, match="dimension"):
        pushforward(two_point, [[0, 1], [1, 0]], Target.coords(3, 2))
    with pytest.raises(ValueError):
        pushforward(two_point, [[0, 1], [1, 0]])
    c = pushforward(two_point, [[0, 1], [1, 0]], Target.coords(2, 1))
    assert c.distance_matrix()[0, 1] == 2.0


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_pushforward_preserves_mass(seed):
    rng = np.random.default_rng(seed)
    X = random_mmspace(rng, int(rng.integers(1, 12)))
    images = rng.integers(0, 3, size=X.n).astype(float)
    c = pushforward(X, images)
    assert c.total_mass == pytest.approx(X.total_mass, abs=1e-14)


# -- concentration function -----------------------------------------------------------------------


def test_concentration_two_point(two_point):
    assert concentration_function(two_point, 0.5) == 0.5


def test_concentration_equilateral(equilateral):
    d = equilateral.dist.tolist()
    assert oracles.concentration(d, [1 / 3] * 3, 0.5) == pytest.approx(1 / 3)
    assert concentration_function(equilateral, 0.5) == pytest.approx(1 / 3, abs=1e-15)


def test_concentration_beyond_diameter(rng):
    X = random_mmspace(rng, 8)
    assert concentration_function(X, X.diameter() + 1e-6) == 0.0


def test_concentration_open_neighbourhood(two_point):
    # d(x2, {x1}) = 1 is not < 1, so x2 stays outside the open 1-neighbourhood
    assert concentration_function(two_point, 1.0) == 0.5


def test_concentration_errors(two_point, rng):
    with pytest.raises(ValueError):
        concentration_function(two_point, 0.0)
    with pytest.raises(InstanceTooLargeError, match="Monte Carlo"):
        concentration_function(random_mmspace(rng, 23), 0.1)


@pytest.mark.parametrize("seed", range(20))
def test_concentration_matches_bruteforce(seed):
    rng = np.random.default_rng(500 + seed)
    X = random_mmspace(rng, int(rng.integers(1, 9)))
    r = float(rng.uniform(0.01, 1))
    expect = oracles.concentration(X.dist.tolist(), X.weights.tolist(), r)
    assert concentration_function(X, r) == pytest.approx(expect, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.001, 1.2), st.floats(0.001, 1.2))
def test_concentration_nonincreasing(seed, r1, r2):
    rng = np.random.default_rng(seed)
    X = random_mmspace(rng, int(rng.integers(1, 10)))
    lo, hi = sorted((r1, r2))
    assert concentration_function(X, hi) <= concentration_function(X, lo)


# -- the finite-space inequalities -----------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(seeds, st.floats(0.001, 0.6))
def test_line_diameter_below_separation(seed, kappa):
    rng = np.random.default_rng(seed)
    c = random_line_cloud(rng, int(rng.integers(1, 11)), grid=seed % 3 == 0)
    assert partial_diameter_exact(c, 2 * kappa) <= sep_exact(c, kappa) + 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4), st.sampled_from([1.0, 2.0, 3.0, math.inf]), st.floats(0.001, 1.0))
def test_coordinate_diameter_below_scaled_separation(seed, k, r, kappa):
    rng = np.random.default_rng(seed)
    c = random_coord_cloud(rng, int(rng.integers(1, 11)), k, r)
    factor = 1.0 if math.isinf(r) else k ** (1 / r)
    assert partial_diameter_exact(c, kappa) <= factor * sep_exact(c, kappa / (2 * k)) + 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(0.01, 0.6), st.floats(0.01, 0.6))
def test_lipschitz_image_separation(seed, k1, k2):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    pts = rng.uniform(size=(n, 3))
    X = from_points(pts, rng.dirichlet(np.ones(n)), r=math.inf)
    images = np.tanh(pts @ rng.normal(size=3))
    alpha = lipschitz_constant(X.dist, images)
    Y = pushforward(X, images)
    assert sep_exact(Y, k1, k2) <= alpha * sep_exact(X, k1, k2) + 1e-9


def test_lipschitz_constant_detects_non_lipschitz():
    d = np.array([[0.0, 0.0], [0.0, 0.0]])
    assert lipschitz_constant(d, [0.0, 1.0]) == math.inf
    assert lipschitz_constant(np.array([[0.0, 2.0], [2.0, 0.0]]), [0.0, 1.0]) == 0.5
