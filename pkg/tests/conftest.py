import numpy as np
import pytest

from exstab.blackbox import train
from exstab.corpus import build_vocab, encode, load_dataset
from exstab.datagen import make_examples, write_tsv


class GameModel:
    """Test double: class-1 probability is an arbitrary function of the mask."""

    num_classes = 2

    def __init__(self, fn):
        self.fn = fn

    def predict_proba_batch(self, token_ids, masks):
        masks = np.asarray(masks, dtype=float)
        v = np.array([self.fn(row) for row in masks], dtype=float)
        return np.stack([1.0 - v, v], axis=1)

    def predict_proba(self, token_ids, mask=None):
        if mask is None:
            mask = np.ones(len(np.asarray(token_ids)))
        return self.predict_proba_batch(token_ids, np.asarray(mask)[None, :])[0]


def table_game(rng, l, low=0.0, high=1.0):
    """Random coalition game: every subset gets an independent value."""
    values = {}

    def fn(row):
        key = tuple(int(b) for b in row)
        if key not in values:
            values[key] = float(rng.uniform(low, high))
        return values[key]

    return GameModel(fn)


def additive_game(coefs, base=0.0):
    coefs = np.asarray(coefs, dtype=float)

    def fn(row):
        return float(base + coefs @ row)

    return GameModel(fn)


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.tsv"
    write_tsv(make_examples(400, seed=11), path)
    return path


@pytest.fixture(scope="session")
def toy_corpus(toy_dataset):
    examples = load_dataset(toy_dataset)
    vocab = build_vocab(examples, threshold=0)
    docs = [encode(ex, vocab, max_length=50) for ex in examples]
    return examples, vocab, docs


@pytest.fixture(scope="session")
def toy_model(toy_corpus):
    _, _, docs = toy_corpus
    return train(docs[:300], epochs=120, lr=0.5, seed=0, dim=32)
