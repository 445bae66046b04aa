import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from framewarp.core import DimensionError
from framewarp.metaframe import DistanceConfig, frame_to_metaframe, metaframe_distance, pooled_distance, sparse_code
from framewarp.templates import ClassTemplate, Metaframe
from conftest import unit_rows
from oracles import grid_search_distance


def test_omp_exact_column(rng):
    X = unit_rows(rng, 5, 6)
    code = sparse_code(X[2], X, gamma=1e-9)
    assert code.support.tolist() == [2]
    assert code.coefficients[2] == pytest.approx(1.0)
    assert code.residual == pytest.approx(0.0, abs=1e-12)
    assert np.count_nonzero(code.coefficients) == 1


def test_omp_orthogonal_target():
    X = np.eye(4)[:2]
    z = np.eye(4)[3]
    code = sparse_code(z, X, gamma=0.0)
    assert code.support.size >= 1
    assert code.residual == pytest.approx(1.0)
    assert frame_to_metaframe(z, X[code.support]) == 2.0


def test_omp_skips_zero_columns():
    X = np.vstack([np.zeros(3), [1.0, 0, 0]])
    code = sparse_code(np.array([1.0, 0, 0]), X)
    assert code.support.tolist() == [1]
    empty = sparse_code(np.array([1.0, 0, 0]), np.zeros((2, 3)))
    assert empty.support.size == 0 and empty.residual == 1.0


def test_omp_bounded_by_best_pair(rng):
    X = unit_rows(rng, 4, 6, nonneg=False)
    z = unit_rows(rng, 1, 6, nonneg=False)[0]
    code = sparse_code(z, X, gamma=0.0, max_support=2)
    assert code.support.size == 2
    best = min(
        np.linalg.norm(z - X[list(p)].T @ np.linalg.lstsq(X[list(p)].T, z, rcond=None)[0])
        for p in itertools.combinations(range(4), 2)
    )
    assert code.residual >= best - 1e-12


def test_omp_support_limits(rng):
    X = unit_rows(rng, 10, 4)
    z = unit_rows(rng, 1, 4)[0]
    assert sparse_code(z, X, gamma=0.0, max_support=8).support.size <= 4
    assert sparse_code(z, X, gamma=0.0, max_support=2).support.size <= 2


def test_omp_dimension_mismatch():
    with pytest.raises(DimensionError):
        sparse_code(np.ones(3) / np.sqrt(3), np.eye(4))


@given(st.integers(0, 2**31))
def test_omp_residual_non_increasing(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 9))
    X = unit_rows(rng, int(rng.integers(1, 12)), K, nonneg=bool(seed % 2))
    z = unit_rows(rng, 1, K, nonneg=bool(seed % 2))[0]
    hist = sparse_code(z, X, gamma=0.0).residual_history
    assert np.all(np.diff(hist) <= 1e-12)


def test_distance_zero_on_selected_column(rng):
    X = unit_rows(rng, 3, 5)
    assert frame_to_metaframe(X[1], X) == pytest.approx(0.0, abs=1e-9)


def test_single_column_formula(rng):
    z, x = unit_rows(rng, 2, 5)
    assert frame_to_metaframe(z, x[None]) == pytest.approx(2 - 2 * z @ x)


def test_single_column_opposite_direction_clamps():
    z = np.array([1.0, 0.0])
    assert frame_to_metaframe(z, np.array([[-0.6, 0.8]])) == 2.0


def test_plane_containing_and_orthogonal():
    X = np.eye(3)[:2]
    z_in = np.array([0.6, 0.8, 0.0])
    assert frame_to_metaframe(z_in, X) == pytest.approx(0.0, abs=1e-9)
    assert frame_to_metaframe(np.array([0.0, 0.0, 1.0]), X) == pytest.approx(2.0)
    assert grid_search_distance(z_in, X) == pytest.approx(0.0, abs=1e-3)


def test_zero_iff_in_span(rng):
    X = unit_rows(rng, 2, 5, nonneg=False)
    w = np.array([0.3, 0.7])
    z = w @ X
    z /= np.linalg.norm(z)
    assert frame_to_metaframe(z, X) == pytest.approx(0.0, abs=1e-9)
    assert frame_to_metaframe(unit_rows(rng, 1, 5)[0], X) > 1e-6


@given(st.integers(0, 2**31))
def test_matches_grid_search(seed):
    rng = np.random.default_rng(seed)
    K, m = int(rng.integers(2, 7)), int(rng.integers(1, 3))
    X = unit_rows(rng, m, K, nonneg=bool(seed % 2))
    z = unit_rows(rng, 1, K, nonneg=bool(seed % 2))[0]
    d = frame_to_metaframe(z, X)
    assert 0.0 <= d <= 2.0
    assert abs(d - min(grid_search_distance(z, X), 2.0)) <= 2e-3


def test_empty_frame_is_far(rng):
    assert metaframe_distance(np.zeros(3), unit_rows(rng, 2, 3), z_empty=True) == 2.0


def _template(frames_per_mf):
    return ClassTemplate(1, tuple(Metaframe(f) for f in frames_per_mf))


def test_pooled_w1_equals_single(rng):
    mfs = [unit_rows(rng, 3, 5) for _ in range(4)]
    z = unit_rows(rng, 1, 5)[0]
    t = _template(mfs)
    for tp in range(1, 5):
        assert pooled_distance(z, t, tp, 1) == metaframe_distance(z, mfs[tp - 1])


def test_pooled_saturates(rng):
    t = _template([unit_rows(rng, 2, 5) for _ in range(3)])
    z = unit_rows(rng, 1, 5)[0]
    vals = {pooled_distance(z, t, tp, 7) for tp in (1, 2, 3)}
    assert len(vals) == 1


@given(st.integers(0, 2**31))
def test_pooling_never_hurts_exact_projection(seed):
    rng = np.random.default_rng(seed)
    K = 8
    t = _template([unit_rows(rng, 1, K) for _ in range(3)])
    z = unit_rows(rng, 1, K)[0]
    single = pooled_distance(z, t, 2, 1, gamma=0.0, max_support=8)
    pooled = pooled_distance(z, t, 2, 3, gamma=0.0, max_support=8)
    assert pooled <= single + 1e-9


def test_distance_config_validation():
    with pytest.raises(ValueError):
        DistanceConfig(w_meta=2)
    with pytest.raises(ValueError):
        DistanceConfig(gamma=-1)
