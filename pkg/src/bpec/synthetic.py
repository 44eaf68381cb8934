"""Synthetic aligned multi-text with controllable inflection.

The base language ``en`` draws Zipf-distributed stems. Every other
language ``k<n>`` re-spells each stem through a fixed letter cipher and
attaches one of ``n`` endings. Consecutive words in an agreement span
share an ending, chosen at random per span. The lemma track of an
inflected language is the bare ciphered stems; the lemma track of ``en``
is its form track. The lexicon of ``k<n>`` attests ``n`` feature bundles.
"""

import string
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

ONSETS = "bdfgklmnprstvz"
VOWELS = "aeiou"
ENDING_POOL = ["a", "os", "em", "ik", "u", "ar", "et", "in", "o", "es", "um", "il"]


def _stems(rng, n: int) -> List[str]:
    stems = set()
    while len(stems) < n:
        syl = rng.integers(1, 4)
        stems.add("".join(rng.choice(list(ONSETS)) + rng.choice(list(VOWELS)) for _ in range(syl)))
    return sorted(stems)


def _cipher(shift: int):
    letters = string.ascii_lowercase
    return str.maketrans(letters, letters[shift:] + letters[:shift])


def generate(n_utterances: int = 400, vocab_size: int = 60, inflections: Sequence[int] = (2, 4),
             agree_span: int = 2, min_len: int = 4, max_len: int = 9, seed: int = 0) -> Dict[str, dict]:
    """Return ``{lang: {"forms": [(id, text)], "lemmas": [...], "lexicon": [lines]}}``."""
    rng = np.random.default_rng(seed)
    stems = _stems(rng, vocab_size)
    weights = 1.0 / np.arange(1, vocab_size + 1)
    weights /= weights.sum()

    sentences = []
    for _ in range(n_utterances):
        length = int(rng.integers(min_len, max_len + 1))
        sentences.append([int(i) for i in rng.choice(vocab_size, size=length, p=weights)])

    out = {"en": {"forms": [], "lemmas": [], "lexicon": [f"{s}\t{s}\tN" for s in stems]}}
    for n in inflections:
        out[f"k{n}"] = {"forms": [], "lemmas": [], "lexicon": []}

    for idx, words in enumerate(sentences):
        uid = f"s{idx:05d}"
        en = " ".join(stems[w] for w in words)
        out["en"]["forms"].append((uid, en))
        out["en"]["lemmas"].append((uid, en))
        for shift, n in enumerate(inflections, 1):
            table = _cipher(shift)
            endings = ENDING_POOL[:n]
            lemmas = [stems[w].translate(table) for w in words]
            forms = []
            for pos, lemma in enumerate(lemmas):
                if pos % agree_span == 0:
                    agreement = int(rng.integers(n))
                forms.append(lemma + endings[agreement])
            out[f"k{n}"]["forms"].append((uid, " ".join(forms)))
            out[f"k{n}"]["lemmas"].append((uid, " ".join(lemmas)))

    for shift, n in enumerate(inflections, 1):
        table = _cipher(shift)
        out[f"k{n}"]["lexicon"] = [f"{s.translate(table)}\t{s.translate(table)}{e}\tN;AGR{j}"
                                   for s in stems for j, e in enumerate(ENDING_POOL[:n])]
    return out


def write(data: Dict[str, dict], root) -> Dict[str, Path]:
    """Write ``forms/``, ``lemmas/`` and ``lexicons/`` files under ``root``."""
    root = Path(root)
    paths = {}
    for kind in ("forms", "lemmas", "lexicons"):
        (root / kind).mkdir(parents=True, exist_ok=True)
        paths[kind] = root / kind
    for lang, tracks in data.items():
        for kind in ("forms", "lemmas"):
            text = "".join(f"{uid}\t{line}\n" for uid, line in tracks[kind])
            (root / kind / f"{lang}.tsv").write_text(text, encoding="utf-8")
        (root / "lexicons" / f"{lang}.tsv").write_text("\n".join(tracks["lexicon"]) + "\n", encoding="utf-8")
    return paths
