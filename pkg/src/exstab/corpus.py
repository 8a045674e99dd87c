"""Dataset loading, vocabulary construction and document encoding.

Datasets are UTF-8 TSV files with one ``label<TAB>text`` pair per line.
Vocabulary ids are assigned deterministically (descending frequency,
lexicographic tie-break) with two reserved slots: pad and unknown.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class DatasetFormatError(ValueError):
    """Raised when a dataset file violates the label<TAB>text format."""


class EmptyDocumentError(ValueError):
    """Raised when an example has no tokens left to explain."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace and punctuation boundaries."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RawExample:
    label: int
    text: str

    def __post_init__(self):
        if self.label < 0:
            raise ValueError(f"label must be a class index, got {self.label}")
        if not self.text.strip():
            raise ValueError("text is empty after whitespace trim")


@dataclass(frozen=True)
class Document:
    """An encoded example: parallel token ids and surface tokens, unpadded."""

    token_ids: tuple[int, ...]
    tokens: tuple[str, ...]
    label: int
    all_unknown: bool = False

    def __post_init__(self):
        if len(self.token_ids) < 1:
            raise ValueError("document must contain at least one token")
        if len(self.token_ids) != len(self.tokens):
            raise ValueError("token_ids and tokens must have equal length")

    def __len__(self) -> int:
        return len(self.token_ids)


class Vocabulary:
    """Frequency-thresholded token table with reserved pad/unk ids."""

    def __init__(self, kept_tokens: list[str], freqs: dict[str, int], threshold: int):
        self.threshold = threshold
        self.id_to_token = [PAD_TOKEN, UNK_TOKEN] + list(kept_tokens)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")
        self.freqs = dict(freqs)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    @property
    def pad_id(self) -> int:
        return PAD_ID

    @property
    def unk_id(self) -> int:
        return UNK_ID

    def id_for(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def dump(self, path: str | Path) -> None:
        """Write a ``token<TAB>id<TAB>freq`` table, sorted by id."""
        lines = []
        for i, tok in enumerate(self.id_to_token):
            lines.append(f"{tok}\t{i}\t{self.freqs.get(tok, 0)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        vocab = cls.__new__(cls)
        vocab.threshold = -1
        vocab.id_to_token = []
        vocab.freqs = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            tok, idx, freq = line.split("\t")
            if int(idx) != len(vocab.id_to_token):
                raise ValueError(f"non-contiguous id {idx} in vocabulary file")
            vocab.id_to_token.append(tok)
            vocab.freqs[tok] = int(freq)
        if vocab.id_to_token[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("vocabulary file missing reserved pad/unk entries")
        vocab.token_to_id = {t: i for i, t in enumerate(vocab.id_to_token)}
        return vocab


def load_dataset(path: str | Path) -> list[RawExample]:
    """Parse a TSV dataset file into examples, preserving file order."""
    path = Path(path)
    examples = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise DatasetFormatError(f"{path}:{lineno}: expected label<TAB>text")
            label_str, text = parts
            try:
                label = int(label_str)
            except ValueError:
                raise DatasetFormatError(
                    f"{path}:{lineno}: non-integer label {label_str!r}"
                ) from None
            if label < 0:
                raise DatasetFormatError(f"{path}:{lineno}: negative label {label}")
            if not text.strip():
                raise DatasetFormatError(f"{path}:{lineno}: empty text")
            examples.append(RawExample(label=label, text=text))
    if not examples:
        warnings.warn(f"dataset {path} contains no examples", stacklevel=2)
    return examples


def build_vocab(examples: list[RawExample], threshold: int = 0) -> Vocabulary:
    """Keep tokens with corpus frequency strictly above ``threshold``."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    counts = Counter()
    for ex in examples:
        counts.update(tokenize(ex.text))
    kept = [t for t, c in counts.items() if c > threshold]
    if not kept:
        raise ValueError(f"no token has frequency > {threshold}; vocabulary is empty")
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(kept, {t: counts[t] for t in kept}, threshold)


def encode(example: RawExample, vocab: Vocabulary, max_length: int) -> Document:
    """Encode one example, truncating to ``max_length`` tokens.

    Out-of-vocabulary tokens map to the unknown id; a document made
    entirely of unknowns is flagged but still explainable. No padding is
    added here: pad ids exist only for model-side batching.
    """
    if max_length < 1:
        raise ValueError(f"max_length must be >= 1, got {max_length}")
    tokens = tokenize(example.text)[:max_length]
    if not tokens:
        raise EmptyDocumentError(f"no tokens survive encoding: {example.text!r}")
    ids = tuple(vocab.id_for(t) for t in tokens)
    return Document(
        token_ids=ids,
        tokens=tuple(tokens),
        label=example.label,
        all_unknown=all(i == UNK_ID for i in ids),
    )
