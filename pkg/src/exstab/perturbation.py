"""Gaussian perturbation schedule and the output-probability wrapper.

Input-side noise goes into the model's embedding table (see
``blackbox.perturb_model``); output-side noise is added directly to each
queried probability vector and renormalized onto the simplex, leaving the
model itself untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INPUT_SOURCE = "input"
OUTPUT_SOURCE = "output"
SOURCES = (INPUT_SOURCE, OUTPUT_SOURCE)

# variance schedule per perturbation level 0..4
INPUT_SIGMA2 = (0.0, 0.05, 0.1, 0.15, 0.2)
OUTPUT_SIGMA2 = (0.0, 0.25, 0.5, 0.75, 1.0)

NUMERATOR_FLOOR = 1e-6


def level_to_sigma2(source: str, level: int) -> float:
    """Tabulated Gaussian variance for a (source, level) pair."""
    if source not in SOURCES:
        raise ValueError(f"unknown perturbation source {source!r}")
    table = INPUT_SIGMA2 if source == INPUT_SOURCE else OUTPUT_SIGMA2
    if not 0 <= level < len(table):
        raise ValueError(f"level must be in [0, {len(table) - 1}], got {level}")
    return table[level]


@dataclass(frozen=True)
class PerturbationSpec:
    source: str
    level: int
    sigma2: float
    seed: int

    def __post_init__(self):
        expected = level_to_sigma2(self.source, self.level)
        if self.sigma2 != expected:
            raise ValueError(
                f"sigma2 {self.sigma2} does not match the level table "
                f"({self.source}, level {self.level}) -> {expected}"
            )

    @classmethod
    def from_level(cls, source: str, level: int, seed: int) -> "PerturbationSpec":
        return cls(source=source, level=level, sigma2=level_to_sigma2(source, level), seed=seed)


def perturb_probs(p: np.ndarray, sigma2: float, noise: np.ndarray) -> np.ndarray:
    """Add noise to a probability vector and renormalize.

    Numerators are floored at a small positive value before dividing, so
    the result stays on the simplex even when the noise drives an entry
    negative. sigma2 = 0 short-circuits to the input unchanged.
    """
    p = np.asarray(p, dtype=float)
    if sigma2 == 0.0:
        return p
    noise = np.asarray(noise, dtype=float)
    if noise.shape != p.shape:
        raise ValueError(f"noise shape {noise.shape} does not match {p.shape}")
    numerators = np.maximum(p + noise, NUMERATOR_FLOOR)
    return numerators / numerators.sum()


class OutputPerturbedSource:
    """Model wrapper that perturbs every emitted probability vector.

    Each query consumes the next noise vector of a stream seeded by the
    spec, so one wrapper instance serves one explanation run at a time;
    replaying the same spec reproduces the stream exactly. Level 0 passes
    the model's output through bit for bit.
    """

    def __init__(self, model, spec: PerturbationSpec):
        if spec.source != OUTPUT_SOURCE:
            raise ValueError(f"spec source must be {OUTPUT_SOURCE!r}, got {spec.source!r}")
        self.model = model
        self.spec = spec
        self._rng = np.random.default_rng(spec.seed)

    @property
    def num_classes(self) -> int:
        return self.model.num_classes

    def predict_proba_batch(self, token_ids, masks) -> np.ndarray:
        probs = self.model.predict_proba_batch(token_ids, masks)
        if self.spec.sigma2 == 0.0:
            return probs
        scale = math.sqrt(self.spec.sigma2)
        noise = self._rng.normal(0.0, 1.0, size=probs.shape) * scale
        numerators = np.maximum(probs + noise, NUMERATOR_FLOOR)
        return numerators / numerators.sum(axis=1, keepdims=True)

    def predict_proba(self, token_ids, mask=None) -> np.ndarray:
        if mask is None:
            mask = np.ones(len(np.asarray(token_ids)))
        return self.predict_proba_batch(token_ids, np.asarray(mask)[None, :])[0]


def wrap_output_perturbed(model, spec: PerturbationSpec) -> OutputPerturbedSource:
    return OutputPerturbedSource(model, spec)
