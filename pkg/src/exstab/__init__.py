"""exstab: a desk-scale lab for probing post-hoc explanation stability.

Three model-agnostic explainers (LIME, Kernel Shapley, Sample Shapley)
are run against a small trainable text classifier while Gaussian noise is
injected either into the model's input embeddings or directly into its
output probabilities. Rank correlation and top-K overlap between baseline
and perturbed explanations quantify which side of the pipeline is fragile.
"""

__version__ = "0.1.0"

from .attribution import (
    Explanation,
    MaskMatrix,
    exact_shapley,
    explain_kernel_shap,
    explain_lime,
    explain_sample_shapley,
    generate_masks,
    lime_weights,
    shapley_kernel_weights,
    weighted_least_squares,
)
from .blackbox import EmbeddingClassifier, PerturbedModel, perturb_model, train
from .conditioning import build_kernel_matrix, condition_number, run_simulation
from .corpus import Document, RawExample, Vocabulary, build_vocab, encode, load_dataset, tokenize
from .harness import ExperimentConfig, ResultsTable, emit_results, run_comparison
from .metrics import DiscrepancyRecord, aggregate, kendall_tau, topk_overlap
from .perturbation import (
    PerturbationSpec,
    level_to_sigma2,
    perturb_probs,
    wrap_output_perturbed,
)

__all__ = [
    "__version__",
    "Document",
    "DiscrepancyRecord",
    "EmbeddingClassifier",
    "ExperimentConfig",
    "Explanation",
    "MaskMatrix",
    "PerturbationSpec",
    "PerturbedModel",
    "RawExample",
    "ResultsTable",
    "Vocabulary",
    "aggregate",
    "build_kernel_matrix",
    "build_vocab",
    "condition_number",
    "emit_results",
    "encode",
    "exact_shapley",
    "explain_kernel_shap",
    "explain_lime",
    "explain_sample_shapley",
    "generate_masks",
    "kendall_tau",
    "level_to_sigma2",
    "lime_weights",
    "load_dataset",
    "perturb_model",
    "perturb_probs",
    "run_comparison",
    "run_simulation",
    "shapley_kernel_weights",
    "tokenize",
    "topk_overlap",
    "train",
    "weighted_least_squares",
    "wrap_output_perturbed",
]
