"""Discrepancy metrics between two explanations of the same document."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConstantScoresError(ValueError):
    """Rank correlation is undefined when one side has no score variation."""


def kendall_tau(scores_a, scores_b) -> float:
    """Tie-corrected Kendall tau (tau-b) over all position pairs."""
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"score vectors must be 1-d and equal length, got {a.shape}, {b.shape}")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two scores")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ConstantScoresError("all scores equal on one side; tau is undefined")

    sign_a = np.sign(a[:, None] - a[None, :]).astype(np.int64)
    sign_b = np.sign(b[:, None] - b[None, :]).astype(np.int64)
    iu = np.triu_indices(n, k=1)
    pa = sign_a[iu]
    pb = sign_b[iu]
    concordant_minus_discordant = int((pa * pb).sum())
    n0 = n * (n - 1) // 2
    ties_a = n0 - int(np.count_nonzero(pa))
    ties_b = n0 - int(np.count_nonzero(pb))
    return concordant_minus_discordant / math.sqrt((n0 - ties_a) * (n0 - ties_b))


def topk_overlap(ranking_a, ranking_b, k: int) -> float:
    """Fraction of shared positions among the k top-ranked of each side."""
    ra = tuple(ranking_a)
    rb = tuple(ranking_b)
    if len(ra) != len(rb):
        raise ValueError("rankings must have equal length")
    if not 1 <= k <= len(ra):
        raise ValueError(f"k must be in [1, {len(ra)}], got {k}")
    return len(set(ra[:k]) & set(rb[:k])) / k


@dataclass(frozen=True)
class DiscrepancyRecord:
    """One measured comparison between a baseline and a perturbed explanation."""

    doc_id: int
    explainer: str
    source: str
    level: int
    sigma2: float
    seed: int
    kendall_tau: float
    topk_overlap: float
    k: int
    argmax_flipped: bool
    k_truncated: bool = False

    def __post_init__(self):
        if not -1.0 <= self.kendall_tau <= 1.0:
            raise ValueError(f"tau out of range: {self.kendall_tau}")
        if not 0.0 <= self.topk_overlap <= 1.0:
            raise ValueError(f"overlap out of range: {self.topk_overlap}")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class SummaryRow:
    explainer: str
    source: str
    level: int
    metric: str
    mean: float
    stderr: float
    n: int


def aggregate(records) -> list[SummaryRow]:
    """Group means and standard errors per (explainer, source, level, metric)."""
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list] = {}
    for rec in records:
        groups.setdefault((rec.explainer, rec.source, rec.level), []).append(rec)

    rows = []
    for key in sorted(groups):
        explainer, source, level = key
        members = groups[key]
        for metric in ("kendall_tau", "topk_overlap"):
            values = np.array([getattr(r, metric) for r in members], dtype=float)
            mean = float(values.mean())
            stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
            rows.append(
                SummaryRow(
                    explainer=explainer,
                    source=source,
                    level=level,
                    metric=metric,
                    mean=mean,
                    stderr=stderr,
                    n=len(values),
                )
            )
    return rows
