"""Synthetic sentiment-style corpus generator.

Tokens carry a latent polarity theta laid out in evenly spaced bands
between -1 and 1; a document draws one token from each of six distinct
bands and its label is the sign of the mean polarity. The banded layout
guarantees that the tokens of any single document have well separated
effects on a trained classifier, which keeps explanation rankings crisp.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from .corpus import RawExample

NUM_BANDS = 16
TOKENS_PER_BAND = 4
DOC_BANDS = 6
MIN_ABS_MEAN = 0.08

_BAND_CENTERS = np.linspace(-1.0, 1.0, NUM_BANDS)
_JITTER = np.linspace(-0.02, 0.02, TOKENS_PER_BAND)

TOKEN_POLARITY = np.concatenate([c + _JITTER for c in _BAND_CENTERS])


def token_name(index: int) -> str:
    band, slot = divmod(index, TOKENS_PER_BAND)
    polarity = "pos" if _BAND_CENTERS[band] > 0 else "neg"
    return f"{polarity}{band:02d}{chr(ord('a') + slot)}"


def make_examples(n: int, seed: int = 0) -> list[RawExample]:
    """Generate ``n`` labeled documents of six tokens each."""
    rng = np.random.default_rng(seed)
    examples = []
    while len(examples) < n:
        bands = rng.choice(NUM_BANDS, size=DOC_BANDS, replace=False)
        tokens = [int(b) * TOKENS_PER_BAND + int(rng.integers(TOKENS_PER_BAND)) for b in bands]
        mean_theta = TOKEN_POLARITY[tokens].mean()
        if abs(mean_theta) < MIN_ABS_MEAN:
            continue
        order = rng.permutation(DOC_BANDS)
        text = " ".join(token_name(tokens[i]) for i in order)
        examples.append(RawExample(label=int(mean_theta > 0), text=text))
    return examples


def write_tsv(examples: list[RawExample], path: str | Path) -> None:
    lines = [f"{ex.label}\t{ex.text}" for ex in examples]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="generate a synthetic polarity corpus")
    parser.add_argument("--docs", type=int, default=1264)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    write_tsv(make_examples(args.docs, args.seed), args.out)
    print(f"wrote {args.docs} documents to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
