"""Condition-number study of the cosine-weighted mask matrix.

The weighted least squares core solves a system whose design matrix is
each mask row scaled by its cosine weight. This module draws such
matrices at various sentence lengths and characterizes the distribution
of their condition number kappa = sigma_max / sigma_min; kappa below 30
is treated as well-conditioned.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attribution import _sample_mask_rows

WELL_CONDITIONED_BOUND = 30.0
JACOBI_TOL = 1e-12
RANK_TOL = 1e-12


class RankDeficientError(ValueError):
    """Raised when the kernel matrix loses full column rank."""


def build_kernel_matrix(l: int, m: int, seed: int) -> np.ndarray:
    """Draw m mask rows over l positions, each scaled by its cosine weight.

    Uses the explainers' mask sampler without the prepended all-ones row;
    a sampled full row is legitimate here and keeps weight one.
    """
    if l < 2:
        raise ValueError(f"need l >= 2, got {l}")
    if m < l:
        raise ValueError(f"need m >= l for full column rank, got m={m}, l={l}")
    rng = np.random.default_rng(seed)
    rows = _sample_mask_rows(l, m, rng, allow_full=True)
    pi = np.sqrt(rows.sum(axis=1) / l)
    return pi[:, None] * rows


def jacobi_eigenvalues(sym: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below ``tol``
    relative to the matrix norm. Fine for the small Gram matrices used
    here; not meant for large n.
    """
    a = np.array(sym, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    if not np.allclose(a, a.T, atol=1e-12 * max(1.0, abs(a).max())):
        raise ValueError("matrix must be symmetric")
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy()
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n)

    for _ in range(max_sweeps):
        off = math.sqrt(max(np.linalg.norm(a) ** 2 - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * norm / (n * n):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
    return np.sort(np.diag(a))


def condition_number(matrix: np.ndarray) -> float:
    """kappa = sigma_max / sigma_min via the Gram matrix's eigenvalues.

    A rectangular design has singular values rather than eigenvalues, so
    the ratio is computed from eigenvalues of A^T A, which this module
    obtains with its own Jacobi iteration rather than a library SVD.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"matrix must be 2-d, got shape {a.shape}")
    if a.shape[0] < a.shape[1]:
        raise ValueError("matrix must have at least as many rows as columns")
    gram = a.T @ a
    eigenvalues = np.clip(jacobi_eigenvalues(gram), 0.0, None)
    singular = np.sqrt(eigenvalues)
    smax = float(singular[-1])
    smin = float(singular[0])
    if smax == 0.0 or smin < RANK_TOL * smax:
        effective_rank = int(np.sum(singular >= RANK_TOL * smax)) if smax > 0 else 0
        raise RankDeficientError(
            f"matrix is rank deficient: effective rank {effective_rank} of {a.shape[1]}"
        )
    return smax / smin


@dataclass(frozen=True)
class ConditionReport:
    lengths: tuple[int, ...]
    iterations: int
    m: int
    seed: int
    kappas: dict[int, np.ndarray]
    bins: dict[int, list[tuple[int, int, int]]]

    def fraction_below(self, l: int, bound: float) -> float:
        return float(np.mean(self.kappas[l] < bound))

    def mean_kappa(self, l: int) -> float:
        return float(self.kappas[l].mean())


def _iteration_seed(seed: int, l: int, iteration: int) -> int:
    return int(np.random.SeedSequence((seed, l, iteration)).generate_state(1)[0])


def _bin_kappas(kappas: np.ndarray) -> list[tuple[int, int, int]]:
    lows = np.floor(kappas).astype(int)
    return [(int(lo), int(lo) + 1, int(count)) for lo, count in
            sorted(zip(*np.unique(lows, return_counts=True)))]


def run_simulation(
    lengths=(20, 30, 40), iterations: int = 500, m: int = 200, seed: int = 0
) -> ConditionReport:
    """Draw kernel matrices per length and collect their condition numbers.

    Every iteration derives its own seed from (seed, length, iteration),
    so results do not depend on evaluation order.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    kappas = {}
    bins = {}
    for l in lengths:
        values = np.array([
            condition_number(build_kernel_matrix(l, m, _iteration_seed(seed, l, i)))
            for i in range(iterations)
        ])
        kappas[int(l)] = values
        bins[int(l)] = _bin_kappas(values)
    return ConditionReport(
        lengths=tuple(int(l) for l in lengths),
        iterations=iterations,
        m=m,
        seed=seed,
        kappas=kappas,
        bins=bins,
    )


def write_kappa_csv(report: ConditionReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["length", "iteration", "kappa"])
        for l in report.lengths:
            for i, kappa in enumerate(report.kappas[l]):
                writer.writerow([l, i, repr(float(kappa))])


def write_bins_csv(report: ConditionReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["length", "bin_lo", "bin_hi", "count"])
        for l in report.lengths:
            for lo, hi, count in report.bins[l]:
                writer.writerow([l, lo, hi, count])
