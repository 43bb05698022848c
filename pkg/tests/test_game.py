import json

import numpy as np
import pytest
from _oracles import grid_game_value, grid_game_value_bb

from mixedpath.action import HamiltonianModel, build_action_matrix
from mixedpath.errors import DimensionMismatch, NoConvergence
from mixedpath.game import (
    MixedPathPair,
    NormMode,
    Provenance,
    extremum_inertia,
    generalized_action,
    minimax_pair,
    solve_equal_component,
    solve_minimax,
    solve_stationary,
    stationarity_residual,
    total_probability,
)
from mixedpath.lattice import LatticeSpec, enumerate_paths

NORM = NormMode.NORM
SUM = NormMode.SUM


def pair(a, b, mode=SUM):
    return MixedPathPair(np.array(a, float), np.array(b, float), mode)


# generalized action

def test_generalized_action_selects_entry():
    assert generalized_action(pair([1, 0], [1, 0]), [[2, 3], [4, 5]]) == 2.0


def test_generalized_action_zero_alpha():
    assert generalized_action(pair([0, 0, 0], [0.2, -0.4, 0.9]), np.arange(9.0).reshape(3, 3)) == 0.0


def test_generalized_action_half_weights():
    assert generalized_action(pair([0.5, 0.5], [0.5, 0.5]), [[1, 2], [3, 4]]) == pytest.approx(2.5)


def test_generalized_action_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        generalized_action(pair([1, 0], [1, 0]), np.eye(3))


def test_bilinearity():
    rng = np.random.default_rng(3)
    s = rng.standard_normal((6, 6))
    a1, a2, b1, b2 = rng.standard_normal((4, 6)) * 0.2
    c1, c2 = 0.7, -1.9

    def f(a, b):
        return generalized_action(MixedPathPair(a, b, NORM), s)

    assert f(c1 * a1 + c2 * a2, b1) == pytest.approx(c1 * f(a1, b1) + c2 * f(a2, b1), rel=1e-12)
    assert f(a1, c1 * b1 + c2 * b2) == pytest.approx(c1 * f(a1, b1) + c2 * f(a1, b2), rel=1e-12)


# normalization

def test_total_probability_examples():
    assert total_probability(pair([0.6], [0.8])) == pytest.approx(1.0)
    assert total_probability(pair([0.3, 0.3], [0.4, 0.4])) == pytest.approx(1.0)


def test_bounds_and_serialization():
    p = pair([0.3, -0.3], [0.9, -0.2])
    assert p.within_bounds()
    assert not pair([1.5], [0.0]).within_bounds()
    back = MixedPathPair.from_dict(json.loads(json.dumps(p.to_dict())))
    assert np.array_equal(back.alpha, p.alpha) and back.norm_mode is SUM and back.provenance is Provenance.MANUAL


# equal component

def test_equal_component_n2_sum():
    p = solve_equal_component(np.ones((2, 2)), SUM)
    assert np.allclose(p.alpha, 1 / (2 * np.sqrt(2))) and np.allclose(p.beta, 1 / (2 * np.sqrt(2)))
    assert p.provenance is Provenance.EQUAL_COMPONENT


def test_equal_component_n1_sum():
    p = solve_equal_component([[3.0]], SUM)
    assert p.alpha[0] == pytest.approx(1 / np.sqrt(2)) and p.beta[0] == pytest.approx(1 / np.sqrt(2))


def test_equal_component_n3_norm():
    p = solve_equal_component(np.eye(3), NORM)
    assert np.allclose(p.alpha, 1 / np.sqrt(6)) and np.allclose(p.beta, 1 / np.sqrt(6))


def test_equal_component_sign_follows_sum():
    p = solve_equal_component(-np.ones((2, 2)), SUM)
    assert np.all(p.alpha > 0) and np.all(p.beta < 0)
    q = solve_equal_component(np.array([[1.0, -1.0], [-1.0, 1.0]]), SUM)
    assert np.all(q.beta > 0)


def test_equal_component_extremizes_along_equal_line():
    # a*b*sum(S) on 4a^2 + 4b^2 = 1 peaks at a = b; scan by hand
    s = np.array([[1.0, 2.0], [0.5, 3.0]])
    t = np.linspace(0, np.pi / 2, 2001)
    a, b = np.cos(t) / 2, np.sin(t) / 2
    best = (a * b * s.sum()).max()
    p = solve_equal_component(s, SUM)
    assert generalized_action(p, s) == pytest.approx(best, rel=1e-6)


# stationary

def test_stationary_identity_norm():
    res = solve_stationary(np.eye(2), norm_mode=NORM)
    assert np.allclose(res.pair.alpha, res.pair.beta)
    assert np.allclose(res.pair.alpha, 0.5)
    assert res.residual <= 1e-10
    assert res.degenerate


def test_stationary_diag_2_1():
    res = solve_stationary(np.diag([2.0, 1.0]), norm_mode=NORM)
    assert np.allclose(np.abs(res.pair.alpha), [1 / np.sqrt(2), 0], atol=1e-8)
    assert np.allclose(res.pair.alpha, res.pair.beta, atol=1e-8)
    assert not res.degenerate


def test_equal_sums_equal_component_is_stationary():
    s = np.array([[1.0, 2.0, 3.0], [3.0, 1.0, 2.0], [2.0, 3.0, 1.0]])
    for mode in (SUM, NORM):
        assert stationarity_residual(s, solve_equal_component(s, mode)) <= 1e-12


def test_three_path_matrix_equal_component_stationary():
    ps = enumerate_paths(LatticeSpec(num_steps=2, dt=1.0, dq=1.0, endpoint_end=0))
    s = build_action_matrix(ps, HamiltonianModel()).entries
    p = solve_equal_component(s, SUM)
    rows, cols = s.sum(1), s.sum(0)
    r = stationarity_residual(s, p)
    if np.ptp(rows) == 0 and np.ptp(cols) == 0:
        assert r <= 1e-12
    else:
        assert r > 0


def test_residual_hand_value():
    assert stationarity_residual(np.eye(2), pair([1, 0], [0, 1], NORM)) == pytest.approx(np.sqrt(2) / 2)


def test_residual_zero_matrix():
    assert stationarity_residual(np.zeros((3, 3)), pair([0.1, 0.5, -0.2], [0.3, 0.3, 0.1], NORM)) == 0.0


@pytest.mark.parametrize("mode", [SUM, NORM])
def test_stationary_random(mode):
    rng = np.random.default_rng(11)
    for _ in range(10):
        s = rng.standard_normal((7, 7))
        res = solve_stationary(s, norm_mode=mode, tol=1e-9)
        assert res.residual <= 1e-9
        assert res.pair.is_normalized()


def test_stationary_norm_is_dominant_singular_pair():
    rng = np.random.default_rng(5)
    s = rng.standard_normal((6, 6))
    res = solve_stationary(s, norm_mode=NORM)
    u, sv, vt = np.linalg.svd(s)
    val = generalized_action(res.pair, s)
    assert abs(val) == pytest.approx(sv[0] / 2, rel=1e-9)


def test_stationary_sum_conditions():
    rng = np.random.default_rng(8)
    s = rng.standard_normal((5, 5))
    p = solve_stationary(s, norm_mode=SUM).pair
    # S beta and S^T alpha are constant vectors
    assert np.ptp(s @ p.beta) < 1e-10 and np.ptp(s.T @ p.alpha) < 1e-10
    assert total_probability(p) == pytest.approx(1.0, abs=1e-12)


def test_all_equal_entries_agree_with_equal_component():
    s = np.full((4, 4), 2.5)
    for mode in (SUM, NORM):
        v = generalized_action(solve_stationary(s, norm_mode=mode).pair, s)
        e = generalized_action(solve_equal_component(s, mode), s)
        assert v == pytest.approx(e, abs=1e-10)


def test_singular_sum_form_raises_when_not_stationary():
    s = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(NoConvergence) as info:
        solve_stationary(s, norm_mode=SUM)
    assert info.value.result.degenerate


def test_negative_components_not_clipped():
    s = np.array([[10.0, -1.0, 0.0], [-1.0, 0.5, 0.2], [0.0, 0.2, -3.0]])
    p = solve_stationary(s, norm_mode=SUM).pair
    assert (p.alpha < 0).any() or (p.beta < 0).any()


def test_no_convergence_carries_result():
    rng = np.random.default_rng(0)
    s = rng.standard_normal((8, 8))
    with pytest.raises(NoConvergence) as info:
        solve_stationary(s, norm_mode=NORM, tol=1e-300, max_iter=3)
    assert info.value.result is not None
    assert not info.value.result.converged


def test_inertia_dominant_pair_is_maximum():
    # the dominant singular pair with positive value is the global constrained maximum
    res = solve_stationary(np.diag([2.0, 1.0]), norm_mode=NORM)
    inertia = extremum_inertia(np.diag([2.0, 1.0]), res.pair)
    assert (inertia.positive, inertia.negative, inertia.zero) == (0, 3, 0)
    assert inertia.kind == "maximum"
    flipped = MixedPathPair(res.pair.alpha, -res.pair.beta, NORM)
    assert extremum_inertia(np.diag([2.0, 1.0]), flipped).kind == "minimum"


# minimax

def test_matching_pennies():
    r = solve_minimax([[1.0, -1.0], [-1.0, 1.0]])
    assert np.allclose(r.row_strategy, 0.5) and np.allclose(r.col_strategy, 0.5)
    assert r.value == pytest.approx(0.0, abs=1e-12)
    assert grid_game_value([[1.0, -1.0], [-1.0, 1.0]], 1000) == pytest.approx(0.0, abs=1e-12)


def test_saddle_point():
    r = solve_minimax([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(r.row_strategy, [0, 1]) and np.allclose(r.col_strategy, [1, 0])
    assert r.value == pytest.approx(3.0)


def test_one_by_one():
    assert solve_minimax([[-2.5]]).value == pytest.approx(-2.5)


@pytest.mark.parametrize("seed", range(5))
def test_minimax_against_grid(seed):
    rng = np.random.default_rng(seed)
    s2 = rng.uniform(-1, 1, (2, 2))
    assert solve_minimax(s2).value == pytest.approx(grid_game_value(s2, 1000), abs=2e-3)
    s3 = rng.uniform(-1, 1, (3, 3))
    assert solve_minimax(s3).value == pytest.approx(grid_game_value(s3, 200), abs=1e-2)


def test_branch_and_bound_equals_full_grid():
    rng = np.random.default_rng(21)
    for _ in range(5):
        s = rng.uniform(-1, 1, (3, 4))
        assert grid_game_value_bb(s, 60) == pytest.approx(grid_game_value(s, 60), abs=1e-12)


def test_minimax_value_between_pure_bounds():
    rng = np.random.default_rng(2)
    for _ in range(20):
        s = rng.integers(-5, 6, (4, 4)).astype(float)
        v = solve_minimax(s).value
        assert s.min(axis=1).max() - 1e-9 <= v <= s.max(axis=0).min() + 1e-9


def test_minimax_shift_invariance():
    rng = np.random.default_rng(4)
    for _ in range(10):
        s = rng.integers(-4, 5, (4, 4)).astype(float)
        a = solve_minimax(s)
        b = solve_minimax(s + 7.0)
        assert np.array_equal(a.row_strategy, b.row_strategy)
        assert np.array_equal(a.col_strategy, b.col_strategy)
        assert b.value == pytest.approx(a.value + 7.0, abs=1e-9)


def test_minimax_pair_sum_normalized():
    p = minimax_pair(solve_minimax([[1.0, -1.0], [-1.0, 1.0]]))
    assert total_probability(p) == pytest.approx(1.0, abs=1e-12)
    assert p.provenance is Provenance.MINIMAX_LP
