"""End-to-end comparison experiment.

For every evaluation document and explainer, a baseline explanation of
the model's predicted class is compared against counterparts computed
under input-side (embedding) and output-side (probability) Gaussian noise
at each perturbation level. Baseline and counterpart always share the
same mask seed, so a measured discrepancy isolates the perturbation
instead of mixing in Monte-Carlo variation.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .attribution import (
    explain_kernel_shap,
    explain_lime,
    explain_sample_shapley,
)
from .blackbox import EmbeddingClassifier, perturb_model, train
from .corpus import Document, EmptyDocumentError, build_vocab, encode, load_dataset
from .metrics import ConstantScoresError, DiscrepancyRecord, aggregate, kendall_tau, topk_overlap
from .perturbation import (
    INPUT_SOURCE,
    OUTPUT_SOURCE,
    PerturbationSpec,
    level_to_sigma2,
    wrap_output_perturbed,
)

EXPLAINERS = ("lime", "kernel_shap", "sample_shapley")

# stream ids for hierarchical seed derivation; adding a branch never
# shifts the randomness of existing ones
_STREAM_MASK = 1
_STREAM_NOISE = 2
_STREAM_FLIP = 3


@dataclass
class ExperimentConfig:
    dataset: str
    out_dir: str = "results"
    max_length: int = 50
    vocab_threshold: int = 0
    train_docs: int = 2000
    eval_docs: int = 50
    sample_seed: int = 0
    model_dim: int = 64
    model_epochs: int = 300
    model_lr: float = 0.5
    model_seed: int = 0
    embedding_decay: float = 0.0
    explainers: tuple = EXPLAINERS
    m: int = 200
    permutations: int = 200
    levels: tuple = (0, 1, 2, 3, 4)
    seeds: tuple = (0,)
    k: int = 5
    workers: int = 1

    def __post_init__(self):
        self.explainers = tuple(self.explainers)
        self.levels = tuple(int(l) for l in self.levels)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.explainers:
            raise ValueError("need at least one explainer")
        unknown = set(self.explainers) - set(EXPLAINERS)
        if unknown:
            raise ValueError(f"unknown explainers: {sorted(unknown)}")
        if not self.levels:
            raise ValueError("need at least one level")
        for level in self.levels:
            level_to_sigma2(INPUT_SOURCE, level)
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.eval_docs < 1 or self.train_docs < 1:
            raise ValueError("document counts must be >= 1")

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass
class ResultsTable:
    records: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    skipped_undefined_tau: int = 0
    flagged_short_docs: int = 0
    config_digest: str = ""
    version: str = __version__


def _derive_seed(*entropy) -> int:
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _explain(name, model, doc, target, m, permutations, seed):
    if name == "lime":
        return explain_lime(model, doc, target, m=m, seed=seed)
    if name == "kernel_shap":
        return explain_kernel_shap(model, doc, target, m=m, seed=seed)
    if name == "sample_shapley":
        return explain_sample_shapley(model, doc, target, permutations=permutations, seed=seed)
    raise ValueError(f"unknown explainer {name!r}")


def _branch_model(model, source, level, noise_seed):
    sigma2 = level_to_sigma2(source, level)
    if source == INPUT_SOURCE:
        return perturb_model(model, sigma2, noise_seed)
    spec = PerturbationSpec.from_level(OUTPUT_SOURCE, level, noise_seed)
    return wrap_output_perturbed(model, spec)


def _argmax_flipped(model, doc, target, source, level, flip_seed) -> bool:
    """Whether this level's perturbation flips the predicted class."""
    ids = np.asarray(doc.token_ids)
    branch = _branch_model(model, source, level, flip_seed)
    return int(np.argmax(branch.predict_proba(ids))) != target


def _compare_document(doc_id, doc, model, config):
    """All records for one document; returns (records, skipped, flagged)."""
    records = []
    skipped = 0
    l = len(doc)
    k = min(config.k, l)
    k_truncated = k < config.k
    target = int(np.argmax(model.predict_proba(np.asarray(doc.token_ids))))

    for explainer in config.explainers:
        for rep in config.seeds:
            mask_seed = _derive_seed(rep, doc_id, _STREAM_MASK)
            baseline = _explain(
                explainer, model, doc, target, config.m, config.permutations, mask_seed
            )
            for source in (INPUT_SOURCE, OUTPUT_SOURCE):
                source_id = 0 if source == INPUT_SOURCE else 1
                # one noise draw per (doc, source): levels scale a common
                # draw, giving a smooth dose response per document
                noise_seed = _derive_seed(rep, doc_id, _STREAM_NOISE, source_id)
                flip_seed = _derive_seed(rep, doc_id, _STREAM_FLIP, source_id)
                for level in config.levels:
                    branch = _branch_model(model, source, level, noise_seed)
                    counterpart = _explain(
                        explainer, branch, doc, target, config.m, config.permutations, mask_seed
                    )
                    try:
                        tau = kendall_tau(baseline.scores, counterpart.scores)
                    except ConstantScoresError:
                        skipped += 1
                        continue
                    records.append(
                        DiscrepancyRecord(
                            doc_id=doc_id,
                            explainer=explainer,
                            source=source,
                            level=level,
                            sigma2=level_to_sigma2(source, level),
                            seed=rep,
                            kendall_tau=tau,
                            topk_overlap=topk_overlap(baseline.ranking, counterpart.ranking, k),
                            k=k,
                            argmax_flipped=_argmax_flipped(
                                model, doc, target, source, level, flip_seed
                            ),
                            k_truncated=k_truncated,
                        )
                    )
    return records, skipped, int(k_truncated)


def prepare_documents(config: ExperimentConfig):
    """Load, split and encode the dataset; returns (train, eval) documents."""
    examples = load_dataset(config.dataset)
    if not examples:
        raise ValueError(f"dataset {config.dataset} is empty")
    order = np.random.default_rng(config.sample_seed).permutation(len(examples))
    shuffled = [examples[i] for i in order]
    needed = config.train_docs + config.eval_docs
    if len(shuffled) < needed:
        raise ValueError(
            f"dataset has {len(shuffled)} usable examples, need {needed} "
            "(train_docs + eval_docs)"
        )
    vocab = build_vocab(examples, config.vocab_threshold)

    def encode_all(rows):
        docs = []
        for ex in rows:
            try:
                docs.append(encode(ex, vocab, config.max_length))
            except EmptyDocumentError:
                continue
        return docs

    train_docs = encode_all(shuffled[: config.train_docs])
    eval_docs = encode_all(shuffled[config.train_docs : config.train_docs + config.eval_docs])
    return train_docs, eval_docs, vocab


def run_comparison(config: ExperimentConfig, model: EmbeddingClassifier | None = None) -> ResultsTable:
    train_docs, eval_docs, vocab = prepare_documents(config)
    if model is None:
        model = train(
            train_docs,
            epochs=config.model_epochs,
            lr=config.model_lr,
            seed=config.model_seed,
            dim=config.model_dim,
            vocab_size=len(vocab),
            embedding_decay=config.embedding_decay,
        )

    table = ResultsTable(config_digest=config.digest())
    jobs = [(doc_id, doc) for doc_id, doc in enumerate(eval_docs) if len(doc) >= 2]
    table.skipped_undefined_tau += (len(eval_docs) - len(jobs)) * (
        len(config.explainers) * 2 * len(config.levels) * len(config.seeds)
    )

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(
                pool.map(lambda job: _compare_document(job[0], job[1], model, config), jobs)
            )
    else:
        results = [_compare_document(doc_id, doc, model, config) for doc_id, doc in jobs]

    for records, skipped, flagged in results:
        table.records.extend(records)
        table.skipped_undefined_tau += skipped
        table.flagged_short_docs += flagged
    table.records.sort(key=lambda r: (r.doc_id, r.explainer, r.source, r.level, r.seed))
    table.summaries = aggregate(table.records) if table.records else []
    return table


RECORD_COLUMNS = (
    "doc_id",
    "explainer",
    "source",
    "level",
    "sigma2",
    "seed",
    "kendall_tau",
    "topk_overlap",
    "k",
    "argmax_flipped",
)
SUMMARY_COLUMNS = ("explainer", "source", "level", "metric", "mean", "stderr", "n")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(table: ResultsTable, out_dir: str | Path, config: ExperimentConfig | None = None):
    """Write records.csv, summary.csv and a config echo; byte-deterministic."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    records_path = out / "records.csv"
    with records_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for rec in table.records:
            writer.writerow([_fmt(getattr(rec, col)) for col in RECORD_COLUMNS])
    paths.append(records_path)

    summary_path = out / "summary.csv"
    with summary_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in table.summaries:
            writer.writerow([_fmt(getattr(row, col)) for col in SUMMARY_COLUMNS])
    paths.append(summary_path)

    if config is not None:
        config_path = out / "config.json"
        config_path.write_text(config.to_json() + "\n", encoding="utf-8")
        paths.append(config_path)
    return paths
