"""
Warping two frame series
========================

Two series of unit-norm frames, one played slower than the other.
"""
import numpy as np

from framewarp import TimeSeries, dtw_align

rng = np.random.default_rng(0)

# a short "motion": five random directions in a 6-word space
motion = rng.random((5, 6))
fast = TimeSeries.from_array(motion)

# the same motion, with frames 2 and 4 held three times as long
slow = TimeSeries.from_array(np.repeat(motion, [1, 3, 1, 3, 1], axis=0))

path, score = dtw_align(slow, fast)
print("score:", round(score, 6))
print("path (t, t'):")
for t, tp in zip(path.t, path.t_prime):
    print(f"  {t:2d} -> {tp}")

# scramble the slow version and the score goes up
scrambled = TimeSeries.from_array(slow.frames[rng.permutation(len(slow))])
print("scrambled score:", round(dtw_align(scrambled, fast)[1], 4))
