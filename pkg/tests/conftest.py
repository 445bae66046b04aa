import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")


def unit_rows(rng, n, k, nonneg=True):
    x = rng.random((n, k)) if nonneg else rng.standard_normal((n, k))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_corpus():
    from framewarp.synth import SynthConfig, generate_corpus
    return generate_corpus(SynthConfig(n_actors=2, sequences_per_actor=1, actions_per_sequence=(3, 4),
                                       mean_action_length=16, seed=7))


@pytest.fixture(scope="session")
def small_model(small_corpus):
    from framewarp.synth import training_examples
    from framewarp.templates import train
    ex, bg = training_examples(small_corpus.sequences)
    return train(ex, bg)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
