"""
Repeated motion patterns
========================

One class is a short pattern repeated a few times. Training on single
repetitions and letting the one-pass recognizer jump back to the start of
the same template finds each repetition.
"""
from framewarp import SynthConfig, alias_segmentation, generate_corpus, op_dfw_segment, train, training_examples

corpus = generate_corpus(SynthConfig(kind="periodic", seed=2))
print("pattern labels:", corpus.patterns, "alias:", corpus.alias)

train_seqs, test_seqs = corpus.split(1)
examples, background = training_examples(train_seqs)
model = train(examples, background, patterns=corpus.patterns)

s = test_seqs[0]
res = op_dfw_segment(s.series, model)
print("annotated units:")
print(" ", [(p.begin, p.end, p.label) for p in s.parts])
print("recognized visits:")
print(" ", [(p.begin, p.end, p.label) for p in res.segmentation.segments])

merged = alias_segmentation(res.segmentation, corpus.alias)
print("after aliasing:")
print(" ", [(p.begin, p.end, p.label) for p in merged.segments])
print("ground truth:")
print(" ", [(p.begin, p.end, p.label) for p in s.ground_truth().segments])
