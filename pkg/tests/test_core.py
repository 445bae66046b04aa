import json

import numpy as np
import pytest

from framewarp.core import (
    AlignmentPath, DimensionError, FormatError, InvariantError, Segment, Segmentation, TimeSeries, concatenate,
    read_label_track, read_segmentation, read_time_series, write_label_track, write_segmentation,
    write_time_series,
)


def test_csv_unit_rows(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("1,0\n0,1\n")
    ts = read_time_series(p)
    assert len(ts) == 2 and ts.dim == 2
    np.testing.assert_array_equal(ts.frames, [[1, 0], [0, 1]])


def test_csv_renormalizes(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("3,4\n")
    np.testing.assert_allclose(read_time_series(p).frames, [[0.6, 0.8]])


def test_zero_row_is_flagged(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("0,0\n1,0\n")
    ts = read_time_series(p)
    assert ts.empty.tolist() == [True, False]
    np.testing.assert_array_equal(ts.frames[0], [0, 0])


def test_bad_row_reports_row_number(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("1,0\n0,x\n")
    with pytest.raises(FormatError, match="row 2"):
        read_time_series(p)


def test_ragged_rows(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("1,0\n0,1,0\n")
    with pytest.raises(DimensionError, match="row 2"):
        read_time_series(p)


def test_json_series(tmp_path):
    p = tmp_path / "z.json"
    p.write_text(json.dumps({"dim": 2, "frames": [[3, 4], [0, 2]]}))
    np.testing.assert_allclose(read_time_series(p).frames, [[0.6, 0.8], [0, 1]])


def test_json_parse_error_location(tmp_path):
    p = tmp_path / "z.json"
    p.write_text('{"dim": 2,\n "frames": [[1, 0],]}')
    with pytest.raises(FormatError, match="line 2"):
        read_time_series(p)


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_series_round_trip_is_exact(tmp_path, rng, suffix):
    x = rng.standard_normal((7, 5))
    x[3] = 0
    ts = TimeSeries.from_array(x)
    p = tmp_path / f"z{suffix}"
    write_time_series(ts, p)
    back = read_time_series(p)
    assert back == ts
    assert back.frames.tobytes() == ts.frames.tobytes()


def test_time_series_rejects_non_unit_rows():
    with pytest.raises(InvariantError):
        TimeSeries(np.array([[1.0, 1.0]]))


def test_slice_and_concatenate(rng):
    ts = TimeSeries.from_array(rng.random((6, 3)))
    assert ts.slice(2, 4) == TimeSeries(ts.frames[1:4])
    assert concatenate([ts.slice(1, 2), ts.slice(3, 6)]) == ts


def test_segmentation_single():
    assert Segmentation(((1, 5, 2),)).frame_labels().tolist() == [2] * 5


def test_segmentation_two():
    seg = Segmentation(((1, 3, 1), (4, 6, 2)))
    assert seg.frame_labels().tolist() == [1, 1, 1, 2, 2, 2]
    assert seg.boundaries() == [4]


@pytest.mark.parametrize("segs", [((1, 3, 1), (5, 6, 2)), ((2, 3, 1),), ((1, 3, 1), (4, 3, 2))])
def test_segmentation_rejects_non_tiling(segs):
    with pytest.raises(InvariantError):
        Segmentation(segs)


def test_segmentation_round_trip(tmp_path):
    seg = Segmentation(((1, 3, 1), (4, 4, 0), (5, 9, 1)))
    p = tmp_path / "s.json"
    write_segmentation(seg, p)
    obj = json.loads(p.read_text())
    assert obj["format_version"] == 1
    assert obj["frame_labels"] == seg.frame_labels().tolist()
    assert read_segmentation(p) == seg


def test_from_labels_collapses_runs():
    seg = Segmentation.from_labels([1, 1, 2, 2, 2, 0, 1])
    assert seg.segments == (Segment(1, 2, 1), Segment(3, 5, 2), Segment(6, 6, 0), Segment(7, 7, 1))


def test_label_track_formats(tmp_path):
    write_label_track([1, 1, 2], tmp_path / "a.csv")
    assert read_label_track(tmp_path / "a.csv").tolist() == [1, 1, 2]
    (tmp_path / "b.csv").write_text("begin,end,label\n1,2,3\n3,3,0\n")
    assert read_label_track(tmp_path / "b.csv").tolist() == [3, 3, 0]
    write_segmentation(Segmentation(((1, 2, 5),)), tmp_path / "c.json")
    assert read_label_track(tmp_path / "c.json").tolist() == [5, 5]


def test_alignment_path_jumps():
    p = AlignmentPath([1, 2, 3, 4], [1, 2, 1, 1], [1, 1, 2, 2], [0, 0, 1, 2])
    assert p.jumps() == [2, 3]
    assert len(p) == 4


def test_atomic_write_leaves_no_temp_files(tmp_path):
    write_label_track([1], tmp_path / "x.csv")
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]
