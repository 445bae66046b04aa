"""
Class templates and isolated recognition
========================================

Train one template per class from a small synthetic corpus, then label
held-out actions one at a time.
"""
import numpy as np

from framewarp import SynthConfig, classify_isolated, generate_corpus, train, training_examples

corpus = generate_corpus(SynthConfig(n_actors=3, sequences_per_actor=2, seed=1))
train_seqs, test_seqs = corpus.split(3)

examples, background = training_examples(train_seqs)
model = train(examples, background)
for t in model:
    sizes = [len(mf) for mf in t.metaframes]
    print(f"class {t.label}: {len(t)} metaframes, {min(sizes)}-{max(sizes)} frames each, "
          f"duration bounds {t.t_min}..{t.t_max}")

hits = total = 0
for s in test_seqs:
    for b, e, label in s.ground_truth().segments:
        guess, scores = classify_isolated(s.series.slice(b, e), model)
        hits += guess == label
        total += 1
        print(f"frames {b:3d}-{e:3d}  true {label}  guess {guess}  "
              + "  ".join(f"{k}:{v:.3f}" for k, v in scores.items()))
print(f"accuracy {hits}/{total}")
