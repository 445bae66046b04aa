"""
Segmenting unsegmented sequences
================================

The one-pass and two-pass recognizers label every frame of a sequence of
back-to-back actions, with background gaps between some of them.
"""
import time

import numpy as np

from framewarp import (SynthConfig, frame_accuracy, generate_corpus, op_dfw_segment, tp_dfw_segment, train,
                       training_examples)

cfg = SynthConfig(null_gap_prob=0.4, seed=3)
corpus = generate_corpus(cfg)
train_seqs, test_seqs = corpus.split(5)
model = train(*training_examples(train_seqs))
print("templates:", model.labels, "(0 is background)")

s = test_seqs[0]
print("truth   :", [(seg.begin, seg.end, seg.label) for seg in s.ground_truth().segments])

t0 = time.perf_counter()
op = op_dfw_segment(s.series, model)
t1 = time.perf_counter()
tp_seg, _ = tp_dfw_segment(s.series, model.without_null())
t2 = time.perf_counter()

print("one-pass:", [(seg.begin, seg.end, seg.label) for seg in op.segmentation.segments])
print("two-pass:", [(seg.begin, seg.end, seg.label) for seg in tp_seg.segments])

for name, seg, dt in (("one-pass", op.segmentation, t1 - t0), ("two-pass", tp_seg, t2 - t1)):
    rep = frame_accuracy(seg, s.labels)
    print(f"{name}: {rep.frame_accuracy:.1f}% of frames, boundary error {rep.boundary_mae:.1f} frames, {dt:.2f} s")

# the two-pass model has no background template, so gaps count as errors there
print("background frames:", int(np.sum(s.labels == 0)), "of", len(s.labels))
