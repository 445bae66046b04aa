"""
From keypoints to frame descriptors
===================================

Raw keypoint descriptors are clustered into a dictionary; every frame is
then described by the word histogram of the keypoints around it.
"""
import numpy as np

from framewarp import SynthConfig, build_dictionary, compute_idf, featurize, generate_corpus
from framewarp.features import histograms

corpus = generate_corpus(SynthConfig(n_actors=2, sequences_per_actor=1, keypoint_rate=6, seed=4))
streams = [s.stream for s in corpus.sequences]
print("keypoints per sequence:", [len(st) for st in streams])

d = build_dictionary(streams, K=corpus.config.dim, seed=0)
d = d.with_idf(compute_idf([histograms(st, d, Q=12) for st in streams]))
print("idf range:", d.idf.min().round(3), "-", d.idf.max().round(3))

s = corpus.sequences[0]
for Q in (3, 12, 48):
    ts = featurize(s.stream, d, Q=Q)
    smooth = np.mean(np.sum(ts.frames[1:] * ts.frames[:-1], axis=1))
    print(f"Q={Q:2d}: {int(ts.empty.sum())} empty frames, mean cosine of neighbouring frames {smooth:.3f}")
