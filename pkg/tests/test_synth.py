import json

import numpy as np
import pytest

from framewarp.features import featurize
from framewarp.isolated import classify_isolated
from framewarp.synth import SynthConfig, generate_corpus, training_examples, word_dictionary, write_corpus
from framewarp.templates import train


def _tiny(**kw):
    base = dict(n_actors=2, sequences_per_actor=1, actions_per_sequence=(3, 4), mean_action_length=14)
    base.update(kw)
    return SynthConfig(**base)


def _isolated_accuracy(corpus):
    train_seqs, test_seqs = corpus.split(2)
    model = train(training_examples(train_seqs)[0])
    hits = total = 0
    for s in test_seqs:
        for b, e, label in s.ground_truth().segments:
            total += 1
            hits += classify_isolated(s.series.slice(b, e), model)[0] == label
    return hits / total


def test_determinism(tmp_path):
    cfg = _tiny(seed=4, keypoint_rate=3, null_gap_prob=0.3)
    write_corpus(generate_corpus(cfg), tmp_path / "a")
    write_corpus(generate_corpus(cfg), tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_no_null_without_gaps():
    c = generate_corpus(_tiny(n_actors=3, null_gap_prob=0.0))
    assert all(np.all(s.labels != 0) for s in c.sequences)
    assert generate_corpus(_tiny(null_gap_prob=0.9, seed=1)).sequences[0].labels.min() == 0


def test_noise_free_signatures_separate():
    c = generate_corpus(_tiny(kind="jitter", signature_noise=0.0, n_classes=4, actor_speed_spread=0.0))
    assert _isolated_accuracy(c) == 1.0


def test_more_noise_does_not_help():
    means = [np.mean([_isolated_accuracy(generate_corpus(_tiny(seed=s, background_noise=n))) for s in range(20)])
             for n in (0.0, 0.5, 1.0)]
    assert all(b <= a + 0.05 for a, b in zip(means, means[1:]))
    assert means[-1] < means[0]


def test_parts_tile_sequences():
    c = generate_corpus(_tiny(kind="periodic", seed=2))
    for s in c.sequences:
        ends = [p.end for p in s.parts]
        begins = [p.begin for p in s.parts]
        assert begins[0] == 1 and ends[-1] == len(s.series)
        assert all(b == e + 1 for b, e in zip(begins[1:], ends))
        for b, e, label in s.parts:
            assert set(s.labels[b - 1:e].tolist()) == {c.alias[label]}
    assert c.patterns == (101,)


def test_consecutive_actions_differ():
    for s in generate_corpus(_tiny(n_actors=3, seed=9)).sequences:
        labels = [seg.label for seg in s.ground_truth().segments]
        assert all(a != b for a, b in zip(labels, labels[1:]))


def test_keypoints_follow_frames():
    c = generate_corpus(_tiny(keypoint_rate=12, seed=3))
    s = c.sequences[0]
    assert s.stream.video_length == len(s.series)
    ts = featurize(s.stream, word_dictionary(c), Q=30, cap=3, use_idf=False)
    cos = np.sum(ts.frames * s.series.frames, axis=1)
    assert np.median(cos[~ts.empty]) > 0.8


def test_config_validation_and_round_trip():
    cfg = SynthConfig(seed=3, kind="periodic")
    assert SynthConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))).to_dict() == cfg.to_dict()
    with pytest.raises(ValueError):
        SynthConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        SynthConfig(signature_noise=-1)
    with pytest.raises(ValueError):
        SynthConfig(null_gap_prob=1.5)
    with pytest.raises(ValueError):
        SynthConfig(kind="zigzag")


def test_manifest(tmp_path):
    m = write_corpus(generate_corpus(_tiny(kind="periodic")), tmp_path)
    obj = json.loads(m.read_text())
    assert obj["alias"]["101"] == 1 and obj["patterns"] == [101]
    assert (tmp_path / "annotations.csv").read_text().startswith("series_path,begin,end,label")
