import numpy as np
import pytest

from framewarp.core import TimeSeries
from framewarp.dtw import dtw_align
from framewarp.isolated import classify_isolated, dfw_align
from framewarp.metaframe import DistanceConfig
from framewarp.templates import ClassTemplate, Metaframe, SuperTemplate, build_class_template, build_null_template, train

E = np.eye(4)


def _ts(rows):
    return TimeSeries.from_array(np.asarray(rows, dtype=float))


def test_single_frame_metaframes_match_dtw(rng):
    # with one frame per metaframe the distance is 2 - 2 cos, i.e. plain DTW
    x = _ts(rng.random((6, 4)))
    y = _ts(rng.random((5, 4)))
    t = ClassTemplate(1, tuple(Metaframe(f) for f in y.frames))
    p1, s1 = dfw_align(x, t)
    p2, s2 = dtw_align(x, y)
    assert s1 == pytest.approx(s2, abs=1e-9)
    np.testing.assert_array_equal(p1.t, p2.t)
    np.testing.assert_array_equal(p1.t_prime, p2.t_prime)


def test_training_example_scores_zero():
    ex = [_ts([E[0], E[1], E[2]]), _ts([E[0], E[0], E[1], E[2]])]
    t = build_class_template(1, ex)
    for x in ex:
        _, s = dfw_align(x, t)
        assert s == pytest.approx(0.0, abs=1e-9)


def test_classify_picks_matching_class():
    m = train({1: [_ts([E[0], E[1]])], 2: [_ts([E[2], E[3]])]})
    label, scores = classify_isolated(_ts([E[2], E[2], E[3]]), m)
    assert label == 2
    assert set(scores) == {1, 2} and scores[2] < scores[1]


def test_ties_go_to_lowest_label():
    m = train({5: [_ts([E[0]])], 3: [_ts([E[0]])]})
    assert classify_isolated(_ts([E[0]]), m)[0] == 3


def test_null_excluded(small_model, small_corpus):
    seq = small_corpus.sequences[0]
    seg = seq.segmentation().segments[0]
    label, scores = classify_isolated(seq.series.slice(seg.begin, seg.end), small_model)
    assert 0 not in scores
    with pytest.raises(ValueError):
        dfw_align(seq.series, build_null_template(seq.series.frames))


def test_threads_do_not_change_scores(small_model, small_corpus):
    Z = small_corpus.sequences[0].series
    a = classify_isolated(Z, small_model, DistanceConfig(), threads=1)
    b = classify_isolated(Z, small_model, DistanceConfig(), threads=3)
    assert a == b
