"""Built-in black-box classifier: mean-pooled embeddings + linear head.

Any object exposing ``predict_proba(token_ids, mask=None)`` and
``predict_proba_batch(token_ids, masks)`` can stand in for this model;
the explainers only rely on that query surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Document, PAD_ID

CHECKPOINT_VERSION = 1


class TrainingError(RuntimeError):
    pass


def validate_probability_vector(p: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    """Check simplex membership; returns the vector as a float array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.shape[0] < 2:
        raise ValueError(f"probability vector must be 1-d with C >= 2, got shape {p.shape}")
    if np.any(p < -atol) or np.any(p > 1 + atol):
        raise ValueError(f"entries outside [0, 1]: {p}")
    if abs(float(p.sum()) - 1.0) > atol:
        raise ValueError(f"entries sum to {p.sum()!r}, not 1")
    return p


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class EmbeddingClassifier:
    """|V| x d embedding table with a d x C linear head.

    The pad row is all zeros and never enters the mean pool. Instances are
    immutable by convention after training; prediction is side-effect free
    and safe for concurrent callers.
    """

    embeddings: np.ndarray
    weights: np.ndarray
    bias: np.ndarray
    pad_id: int = PAD_ID

    def __post_init__(self):
        if self.embeddings.shape[1] != self.weights.shape[0]:
            raise ValueError("embedding dim does not match weight rows")
        if self.weights.shape[1] != self.bias.shape[0]:
            raise ValueError("weight columns do not match bias length")
        if np.any(self.embeddings[self.pad_id] != 0.0):
            raise ValueError("pad embedding row must be all zeros")

    @property
    def vocab_size(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    @property
    def num_classes(self) -> int:
        return self.bias.shape[0]

    def _check_ids(self, token_ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(token_ids, dtype=np.int64)
        if ids.ndim != 1 or ids.size == 0:
            raise ValueError("token_ids must be a non-empty 1-d sequence")
        if ids.min() < 0 or ids.max() >= self.vocab_size:
            raise ValueError(
                f"token id out of range [0, {self.vocab_size}): {ids.min()}..{ids.max()}"
            )
        return ids

    def predict_proba_batch(self, token_ids, masks: np.ndarray) -> np.ndarray:
        """Class probabilities for many masked variants of one document.

        ``masks`` is an (m, l) binary matrix; a zero drops the token from
        the mean pool entirely. A row of zeros falls back to the zero
        vector, i.e. softmax of the bias alone.
        """
        ids = self._check_ids(token_ids)
        masks = np.asarray(masks, dtype=float)
        if masks.ndim != 2 or masks.shape[1] != ids.shape[0]:
            raise ValueError(f"masks shape {masks.shape} does not match {ids.shape[0]} tokens")
        emb = self.embeddings[ids]
        keep = masks * (ids != self.pad_id)
        counts = keep.sum(axis=1, keepdims=True)
        pooled = (keep @ emb) / np.maximum(counts, 1.0)
        return _softmax(pooled @ self.weights + self.bias)

    def predict_proba(self, token_ids, mask=None) -> np.ndarray:
        ids = self._check_ids(token_ids)
        if mask is None:
            mask = np.ones(ids.shape[0])
        mask = np.asarray(mask, dtype=float)
        if mask.shape != ids.shape:
            raise ValueError("mask length must equal token_ids length")
        return self.predict_proba_batch(ids, mask[None, :])[0]

    def save(self, path: str | Path) -> None:
        """Checkpoint as an .npz archive with a format version marker."""
        np.savez(
            path,
            format_version=np.array([CHECKPOINT_VERSION]),
            embeddings=self.embeddings,
            weights=self.weights,
            bias=self.bias,
            pad_id=np.array([self.pad_id]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingClassifier":
        with np.load(path) as data:
            version = int(data["format_version"][0])
            if version != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {version}")
            return cls(
                embeddings=data["embeddings"],
                weights=data["weights"],
                bias=data["bias"],
                pad_id=int(data["pad_id"][0]),
            )


def _pack(documents: list[Document]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(documents)
    maxlen = max(len(d) for d in documents)
    ids = np.full((n, maxlen), PAD_ID, dtype=np.int64)
    present = np.zeros((n, maxlen))
    labels = np.zeros(n, dtype=np.int64)
    for i, doc in enumerate(documents):
        ids[i, : len(doc)] = doc.token_ids
        present[i, : len(doc)] = 1.0
        labels[i] = doc.label
    return ids, present, labels


def train(
    documents: list[Document],
    epochs: int = 300,
    lr: float = 0.5,
    seed: int = 0,
    dim: int = 64,
    vocab_size: int | None = None,
    embedding_decay: float = 0.0,
) -> EmbeddingClassifier:
    """Full-batch cross-entropy gradient descent; deterministic given seed.

    ``embedding_decay`` applies plain weight decay to the embedding table
    only, trading embedding norm against head norm without changing the
    decision function the model converges towards.
    """
    if not documents:
        raise TrainingError("no training documents")
    ids, present, labels = _pack(documents)
    classes = np.unique(labels)
    if classes.size < 2:
        raise TrainingError(f"training data contains a single class: {classes}")
    num_classes = int(labels.max()) + 1
    if vocab_size is None:
        vocab_size = int(ids.max()) + 1

    rng = np.random.default_rng(seed)
    emb = rng.normal(0.0, 0.1, size=(vocab_size, dim))
    emb[PAD_ID] = 0.0
    weights = rng.normal(0.0, 0.1, size=(dim, num_classes))
    bias = np.zeros(num_classes)

    n = len(documents)
    onehot = np.eye(num_classes)[labels]
    counts = present.sum(axis=1, keepdims=True)
    pool_coef = present / counts

    for epoch in range(epochs):
        pooled = np.einsum("nl,nld->nd", pool_coef, emb[ids])
        probs = _softmax(pooled @ weights + bias)
        loss = -np.log(np.maximum(probs[np.arange(n), labels], 1e-300)).mean()
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        grad_logits = (probs - onehot) / n
        grad_w = pooled.T @ grad_logits
        grad_b = grad_logits.sum(axis=0)
        grad_pooled = grad_logits @ weights.T
        grad_emb = np.zeros_like(emb)
        np.add.at(grad_emb, ids, grad_pooled[:, None, :] * pool_coef[:, :, None])
        grad_emb[PAD_ID] = 0.0
        weights -= lr * grad_w
        bias -= lr * grad_b
        emb -= lr * grad_emb
        if embedding_decay:
            emb[PAD_ID + 1 :] *= 1.0 - lr * embedding_decay

    return EmbeddingClassifier(embeddings=emb, weights=weights, bias=bias)


def training_accuracy(model: EmbeddingClassifier, documents: list[Document]) -> float:
    hits = 0
    for doc in documents:
        probs = model.predict_proba(np.asarray(doc.token_ids))
        hits += int(np.argmax(probs) == doc.label)
    return hits / len(documents)


@dataclass
class PerturbedModel:
    """Copy of a classifier with one Gaussian draw added to its embeddings.

    The draw happens once per (seed, sigma2) pair, so the perturbed model
    is an ordinary deterministic function; sigma2 = 0 reproduces the base
    model bit for bit. The pad row stays zero.
    """

    base: EmbeddingClassifier
    sigma2: float
    seed: int
    _model: EmbeddingClassifier = field(init=False, repr=False)

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError(f"variance must be >= 0, got {self.sigma2}")
        rng = np.random.default_rng(self.seed)
        noise = rng.normal(0.0, 1.0, size=self.base.embeddings.shape) * math.sqrt(self.sigma2)
        emb = self.base.embeddings + noise
        emb[self.base.pad_id] = 0.0
        self._model = EmbeddingClassifier(
            embeddings=emb,
            weights=self.base.weights,
            bias=self.base.bias,
            pad_id=self.base.pad_id,
        )

    @property
    def num_classes(self) -> int:
        return self.base.num_classes

    def predict_proba(self, token_ids, mask=None) -> np.ndarray:
        return self._model.predict_proba(token_ids, mask)

    def predict_proba_batch(self, token_ids, masks) -> np.ndarray:
        return self._model.predict_proba_batch(token_ids, masks)


def perturb_model(model: EmbeddingClassifier, sigma2_input: float, seed: int) -> PerturbedModel:
    return PerturbedModel(base=model, sigma2=sigma2_input, seed=seed)
