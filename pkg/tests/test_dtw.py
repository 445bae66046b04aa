import numpy as np
import pytest
from hypothesis import given, strategies as st

from framewarp.core import TimeSeries
from framewarp.dtw import dtw_align, frame_distance, pairwise_distances, transition_penalty, warp_costs
from oracles import brute_dtw, brute_dtw_paths, path_cost


def test_frame_distance_values():
    a = np.array([1.0, 0.0])
    assert frame_distance(a, a) == 0.0
    assert frame_distance(a, np.array([0.0, 1.0])) == pytest.approx(2.0)
    assert frame_distance(a, -a) == pytest.approx(4.0)
    assert frame_distance(a, np.zeros(2), b_empty=True) == 2.0


def test_frame_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        frame_distance(np.ones(2), np.ones(3))


def test_transition_penalty():
    assert transition_penalty(1, 1) == 2
    assert transition_penalty(0, 1) == 1
    assert transition_penalty(1, 0) == 1
    assert transition_penalty(2, 0) == np.inf
    assert transition_penalty(0, 0) == np.inf


def test_identical_series_diagonal(rng):
    Z = TimeSeries.from_array(rng.random((5, 3)))
    path, score = dtw_align(Z, Z)
    assert score == 0.0
    assert path.steps() == [(t, t, 0) for t in range(1, 6)]


def test_repeated_frame_example():
    # Z=(a,a,b), Y=(a,b) under a 0/1 mismatch cost
    C = np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    path, score, _ = warp_costs(C)
    assert score == 0.0
    assert list(zip(path.t.tolist(), path.t_prime.tolist())) == [(1, 1), (2, 1), (3, 2)]


def test_path_shape_is_legal(rng):
    Z = TimeSeries.from_array(rng.random((5, 3)))
    Y = TimeSeries.from_array(rng.random((4, 3)))
    path, _ = dtw_align(Z, Y)
    steps = list(zip(path.t.tolist(), path.t_prime.tolist()))
    assert steps[0] == (1, 1) and steps[-1] == (5, 4)
    for (a, b), (c, d) in zip(steps, steps[1:]):
        assert (c - a, d - b) in {(0, 1), (1, 0), (1, 1)}


def test_score_is_mean_along_argmin_path(rng):
    C = rng.random((4, 3))
    path, score, D = warp_costs(C)
    cells = list(zip(path.t - 1, path.t_prime - 1))
    assert D == pytest.approx(path_cost(C, cells))
    assert score == pytest.approx(np.mean([C[c] for c in cells]))


def test_tie_prefers_diagonal():
    path, _, _ = warp_costs(np.zeros((3, 3)))
    assert path.steps() == [(1, 1, 0), (2, 2, 0), (3, 3, 0)]


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_matches_exhaustive_enumeration(tz, ty, seed):
    C = np.random.default_rng(seed).random((tz, ty))
    _, _, D = warp_costs(C)
    assert abs(D - brute_dtw(C)) <= 1e-9


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_swapping_sequences_keeps_cost(tz, ty, seed):
    rng = np.random.default_rng(seed)
    Z = TimeSeries.from_array(rng.random((tz, 3)))
    Y = TimeSeries.from_array(rng.random((ty, 3)))
    _, _, D = warp_costs(pairwise_distances(Z, Y))
    _, _, Dt = warp_costs(pairwise_distances(Y, Z))
    assert abs(D - Dt) <= 1e-9


def test_reversal_changes_cost_but_matches_oracle():
    # the start cell weighs 1 while a diagonal step into a cell weighs 2,
    # so reading both sequences backwards is a different problem
    C = np.array([[0.0, 1.0], [1.0, 0.5]])
    _, _, D = warp_costs(C)
    _, _, Dr = warp_costs(C[::-1, ::-1].copy())
    assert D == pytest.approx(1.0) and Dr == pytest.approx(0.5)
    assert Dr == pytest.approx(brute_dtw(C[::-1, ::-1]))


def test_returned_path_is_an_optimal_path(rng):
    C = rng.random((4, 4))
    path, _, D = warp_costs(C)
    best = min(c for c, _ in brute_dtw_paths(C))
    assert path_cost(C, list(zip(path.t - 1, path.t_prime - 1))) == pytest.approx(best)


def test_self_alignment_zero(rng):
    Z = TimeSeries.from_array(rng.random((8, 4)))
    assert dtw_align(Z, Z)[1] == 0.0


def test_empty_frames_cost_two():
    Z = TimeSeries(np.zeros((2, 2)))
    Y = TimeSeries(np.array([[1.0, 0.0]]))
    np.testing.assert_array_equal(pairwise_distances(Z, Y), [[2.0], [2.0]])
