"""Post-hoc explainers: LIME, Kernel Shapley, Sample Shapley, exact Shapley.

All three estimators share the same recipe: draw presence/absence masks
over token positions, query the black box on each masked variant, and
reduce the (mask, probability) pairs to per-token scores. LIME and Kernel
Shapley solve a weighted least squares system and differ only in the row
weights; Sample Shapley averages marginal contributions over random token
orderings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Document

DEFAULT_SAMPLES = 200
DEFAULT_PERMUTATIONS = 200
FULL_MASK_WEIGHT = 1e6
RIDGE = 1e-8
EXACT_SHAPLEY_MAX_TOKENS = 12

# per-position keep probability for sampled masks; slightly sparser than
# balanced coalitions, which keeps the cosine-weighted design matrix
# comfortably well-conditioned across sentence lengths
MASK_KEEP_PROB = 0.45


class SolverError(RuntimeError):
    """Raised when the least squares solve produces non-finite values."""


@dataclass(frozen=True)
class MaskMatrix:
    """Binary (m, l) matrix of pseudo examples; row 0 is the original input."""

    masks: np.ndarray
    includes_full_mask: bool = True

    def __post_init__(self):
        masks = np.asarray(self.masks, dtype=float)
        object.__setattr__(self, "masks", masks)
        if masks.ndim != 2:
            raise ValueError(f"masks must be 2-d, got shape {masks.shape}")
        if masks.shape[0] < 2:
            raise ValueError("need at least 2 mask rows")
        if not np.isin(masks, (0.0, 1.0)).all():
            raise ValueError("masks must be binary")
        sums = masks.sum(axis=1)
        if np.any(sums < 1):
            raise ValueError("every mask row needs at least one token present")
        if self.includes_full_mask:
            full = sums == masks.shape[1]
            if not full[0]:
                raise ValueError("full mask must be the first row")
            if masks.shape[1] > 1 and full.sum() != 1:
                raise ValueError("the all-ones row must appear exactly once")

    @property
    def num_samples(self) -> int:
        return self.masks.shape[0]

    @property
    def num_tokens(self) -> int:
        return self.masks.shape[1]


def _sample_mask_rows(
    l: int, count: int, rng: np.random.Generator, allow_full: bool
) -> np.ndarray:
    """Draw iid Bernoulli(MASK_KEEP_PROB) rows, resampling degenerate ones.

    All-zero rows are always resampled; all-ones rows are resampled too
    unless ``allow_full``, so the caller can keep the original input as
    the unique full row.
    """
    rows = (rng.random(size=(count, l)) < MASK_KEEP_PROB).astype(float)
    while True:
        sums = rows.sum(axis=1)
        bad = sums == 0
        if not allow_full and l > 1:
            bad |= sums == l
        if not bad.any():
            return rows
        rows[bad] = (rng.random(size=(int(bad.sum()), l)) < MASK_KEEP_PROB).astype(float)


def generate_masks(l: int, m: int, seed: int) -> MaskMatrix:
    """Sample ``m`` masks over ``l`` positions; the full mask is prepended."""
    if l < 1:
        raise ValueError(f"need at least one token, got l={l}")
    if m < 2:
        raise ValueError(f"need at least two masks, got m={m}")
    rng = np.random.default_rng(seed)
    rows = _sample_mask_rows(l, m - 1, rng, allow_full=False)
    return MaskMatrix(np.vstack([np.ones((1, l)), rows]))


def lime_weights(masks: MaskMatrix) -> np.ndarray:
    """Cosine similarity of each mask row to the all-ones row.

    For a binary row with s of l positions present this reduces to
    sqrt(s / l); the full row gets weight one.
    """
    m = masks.masks
    s = m.sum(axis=1)
    return np.sqrt(s / m.shape[1])


def shapley_kernel_weights(masks: MaskMatrix, full_weight: float = FULL_MASK_WEIGHT) -> np.ndarray:
    """Shapley kernel (l-1) / (C(l,s) * s * (l-s)) per row.

    The s = l endpoint would have infinite weight; it gets the large
    finite surrogate ``full_weight`` instead, which bounds the induced
    error by roughly 1 / full_weight.
    """
    m = masks.masks
    l = m.shape[1]
    s = m.sum(axis=1).astype(int)
    weights = np.empty(len(s), dtype=float)
    for j, sj in enumerate(s):
        if sj == l:
            weights[j] = full_weight
        else:
            weights[j] = (l - 1) / (math.comb(l, sj) * sj * (l - sj))
    return weights


def _solve_wls(
    design: np.ndarray,
    targets: np.ndarray,
    weights: np.ndarray,
    fit_intercept: bool,
    ridge: float,
) -> tuple[np.ndarray, float]:
    n_features = design.shape[1]
    if fit_intercept:
        design = np.hstack([design, np.ones((design.shape[0], 1))])
    a = design.T @ (weights[:, None] * design)
    a[np.arange(n_features), np.arange(n_features)] += ridge
    b = design.T @ (weights * targets)
    solution = np.linalg.solve(a, b)
    if not np.all(np.isfinite(solution)):
        diag = np.diag(a)
        raise SolverError(
            "non-finite weighted least squares solution; "
            f"normal matrix diagonal range [{diag.min():g}, {diag.max():g}]"
        )
    if fit_intercept:
        return solution[:-1], float(solution[-1])
    return solution, 0.0


def weighted_least_squares(
    masks: MaskMatrix | np.ndarray,
    targets: np.ndarray,
    weights: np.ndarray,
    fit_intercept: bool = True,
    ridge: float = RIDGE,
) -> tuple[np.ndarray, float]:
    """Minimize sum_j w_j (t_j - coef . mask_j - intercept)^2.

    Solved by normal equations with a Tikhonov term on the feature block
    only; returns (coefficients, intercept). Under-determined systems are
    regularized towards the minimum-norm solution by the same ridge.
    """
    design = masks.masks if isinstance(masks, MaskMatrix) else np.asarray(masks, dtype=float)
    targets = np.asarray(targets, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if design.shape[0] != targets.shape[0] or design.shape[0] != weights.shape[0]:
        raise ValueError("masks, targets and weights must agree in length")
    if not np.all(np.isfinite(targets)):
        raise ValueError("targets must be finite")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be positive and finite")
    return _solve_wls(design, targets, weights, fit_intercept, ridge)


def rank_by_score(scores: np.ndarray) -> tuple[int, ...]:
    """Positions ordered by descending score, ties broken by position."""
    order = np.argsort(-np.asarray(scores), kind="stable")
    return tuple(int(i) for i in order)


@dataclass(frozen=True)
class Explanation:
    """Per-token importance scores for one (document, class) pair."""

    scores: np.ndarray
    ranking: tuple[int, ...]
    explainer: str
    target: int

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", scores)
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if self.ranking != rank_by_score(scores):
            raise ValueError("ranking is inconsistent with scores")

    def __len__(self) -> int:
        return len(self.scores)

    def to_record(self, doc_id, seed: int, m: int) -> dict:
        return {
            "doc_id": doc_id,
            "explainer": self.explainer,
            "target": self.target,
            "scores": [float(s) for s in self.scores],
            "ranking": list(self.ranking),
            "seed": seed,
            "m": m,
        }


def _make_explanation(scores: np.ndarray, explainer: str, target: int) -> Explanation:
    return Explanation(
        scores=scores, ranking=rank_by_score(scores), explainer=explainer, target=target
    )


def _check_target(model, target: int) -> None:
    if not 0 <= target < model.num_classes:
        raise ValueError(f"target {target} out of range for {model.num_classes} classes")


def _query(model, doc: Document, masks: np.ndarray, target: int) -> np.ndarray:
    probs = model.predict_proba_batch(np.asarray(doc.token_ids), masks)
    return probs[:, target]


def explain_lime(
    model,
    doc: Document,
    target: int,
    m: int = DEFAULT_SAMPLES,
    seed: int = 0,
    masks: MaskMatrix | None = None,
) -> Explanation:
    """Local linear fit: cosine row weights, intercept kept out of ranking."""
    _check_target(model, target)
    if masks is None:
        masks = generate_masks(len(doc), m, seed)
    targets = _query(model, doc, masks.masks, target)
    scores, _ = weighted_least_squares(masks, targets, lime_weights(masks))
    return _make_explanation(scores, "lime", target)


def explain_kernel_shap(
    model,
    doc: Document,
    target: int,
    m: int = DEFAULT_SAMPLES,
    seed: int = 0,
    masks: MaskMatrix | None = None,
) -> Explanation:
    """Shapley-kernel weighted fit, anchored at both coalition endpoints.

    The sampled full row carries the large endpoint weight from the
    kernel; the empty coalition cannot appear as a mask row, so its
    prediction (queried once with an all-zero mask) is appended as an
    equally weighted anchor. Both anchors together pin the intercept at
    f(empty) and the score total at f(full) - f(empty), which is what
    makes the estimator agree with exact Shapley values under exhaustive
    mask enumeration.
    """
    _check_target(model, target)
    if masks is None:
        masks = generate_masks(len(doc), m, seed)
    l = masks.num_tokens
    design = np.vstack([masks.masks, np.zeros((1, l))])
    targets = _query(model, doc, design, target)
    weights = np.append(shapley_kernel_weights(masks), FULL_MASK_WEIGHT)
    scores, _ = weighted_least_squares(design, targets, weights)
    return _make_explanation(scores, "kernel_shap", target)


def _all_permutations(l: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(l))), dtype=np.int64)


def explain_sample_shapley(
    model,
    doc: Document,
    target: int,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
) -> Explanation:
    """Monte-Carlo Shapley: average marginal gains over token orderings.

    Each permutation contributes f(prefix + token) - f(prefix) for every
    position; the empty prefix is queried through the all-zero mask.
    Passing exactly l! permutations enumerates each ordering once instead
    of sampling, which makes the estimate exact.
    """
    _check_target(model, target)
    if permutations < 1:
        raise ValueError(f"need at least one permutation, got {permutations}")
    l = len(doc)
    rng = np.random.default_rng(seed)
    if l <= 8 and permutations == math.factorial(l):
        perms = _all_permutations(l)
    else:
        perms = np.array([rng.permutation(l) for _ in range(permutations)])
    n_perms = perms.shape[0]

    # prefix masks of every permutation, flattened into one batched query
    prefixes = np.zeros((n_perms, l + 1, l))
    for j in range(n_perms):
        for i, pos in enumerate(perms[j]):
            prefixes[j, i + 1] = prefixes[j, i]
            prefixes[j, i + 1, pos] = 1.0
    values = _query(model, doc, prefixes.reshape(n_perms * (l + 1), l), target)
    values = values.reshape(n_perms, l + 1)
    gains = np.diff(values, axis=1)

    scores = np.zeros(l)
    for j in range(n_perms):
        scores[perms[j]] += gains[j]
    scores /= n_perms
    return _make_explanation(scores, "sample_shapley", target)


def exact_shapley(model, doc: Document, target: int) -> np.ndarray:
    """Textbook Shapley values over all 2^l coalitions; the oracle route."""
    _check_target(model, target)
    l = len(doc)
    if l > EXACT_SHAPLEY_MAX_TOKENS:
        raise ValueError(
            f"exact Shapley needs 2^l coalition queries; l={l} exceeds "
            f"{EXACT_SHAPLEY_MAX_TOKENS}, use an estimator instead"
        )
    coalitions = np.array(list(itertools.product((0.0, 1.0), repeat=l)))
    values = _query(model, doc, coalitions, target)
    value_of = {tuple(int(b) for b in row): v for row, v in zip(coalitions, values)}

    scores = np.zeros(l)
    for i in range(l):
        for subset in itertools.product((0, 1), repeat=l - 1):
            without = subset[:i] + (0,) + subset[i:]
            with_i = subset[:i] + (1,) + subset[i:]
            s = sum(subset)
            weight = math.factorial(s) * math.factorial(l - s - 1) / math.factorial(l)
            scores[i] += weight * (value_of[with_i] - value_of[without])
    return scores
