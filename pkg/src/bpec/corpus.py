"""Multi-text ingestion: tokenization, id alignment, splits and character alphabets."""

import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import CorpusError

logger = logging.getLogger(__name__)

UNK_CHAR = "\u2605"  # ★
SPLITS = ("train", "dev", "test")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(raw: str) -> List[str]:
    """Split on whitespace runs and detach every punctuation character.

    >>> tokenize("Hi, there!")
    ['Hi', ',', 'there', '!']
    """
    tokens = []
    for chunk in raw.split():
        buf = []
        for ch in chunk:
            if _is_punct(ch):
                if buf:
                    tokens.append("".join(buf))
                    buf = []
                tokens.append(ch)
            else:
                buf.append(ch)
        if buf:
            tokens.append("".join(buf))
    return tokens


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class Utterance:
    id: str
    lang: str
    raw: str
    tokens: Tuple[str, ...]

    @classmethod
    def from_raw(cls, id: str, lang: str, raw: str) -> "Utterance":
        return cls(id, lang, raw, tuple(tokenize(raw)))

    @property
    def text(self) -> str:
        """The tokenized form the models see: tokens joined by single spaces."""
        return detokenize(self.tokens)


@dataclass
class AlignedCorpus:
    languages: Tuple[str, ...]
    utterances: Dict[str, Dict[str, Utterance]]
    dropped: Dict[str, int] = field(default_factory=dict)
    split: Dict[str, str] = field(default_factory=dict)

    @property
    def ids(self) -> List[str]:
        return sorted(self.utterances)

    def __len__(self):
        return len(self.utterances)

    def restrict(self, ids: Iterable[str]) -> "AlignedCorpus":
        keep = set(ids)
        return AlignedCorpus(
            self.languages,
            {i: u for i, u in self.utterances.items() if i in keep},
            dict(self.dropped),
            {i: s for i, s in self.split.items() if i in keep},
        )

    def with_split(self, ratios=(0.8, 0.1, 0.1), seed: int = 0) -> "AlignedCorpus":
        return AlignedCorpus(self.languages, self.utterances, dict(self.dropped),
                             split(self.utterances.keys(), ratios, seed))

    def portion(self, lang: str, which: str) -> List[Utterance]:
        """Utterances of one language in one split, in sorted-id order."""
        if not self.split:
            raise CorpusError("corpus has no split assignment")
        return [self.utterances[i][lang] for i in self.ids if self.split[i] == which]


def align(files: Mapping[str, Iterable[Tuple[str, str]]]) -> AlignedCorpus:
    """Join per-language (id, raw) lists on their ids.

    Only ids present in every language survive; ``dropped`` counts the
    discarded ids per language.
    """
    per_lang: Dict[str, Dict[str, Utterance]] = {}
    for lang in sorted(files):
        table: Dict[str, Utterance] = {}
        for uid, raw in files[lang]:
            if uid in table:
                raise CorpusError(f"duplicate utterance id {uid!r} in language {lang!r}")
            table[uid] = Utterance.from_raw(uid, lang, raw)
        per_lang[lang] = table

    langs = tuple(sorted(per_lang))
    common = set.intersection(*(set(t) for t in per_lang.values())) if per_lang else set()
    dropped = {lang: len(t) - len(common) for lang, t in per_lang.items()}
    for lang, n in dropped.items():
        if n:
            logger.warning("%s: dropped %d utterances without full alignment", lang, n)
    utterances = {uid: {lang: per_lang[lang][uid] for lang in langs} for uid in sorted(common)}
    return AlignedCorpus(langs, utterances, dropped)


def split(ids: Iterable[str], ratios=(0.8, 0.1, 0.1), seed: int = 0) -> Dict[str, str]:
    """Seeded shuffle of the sorted ids, cut into contiguous train/dev/test blocks."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise CorpusError(f"split ratios must be three positive numbers summing to 1, got {ratios}")
    ordered = sorted(ids)
    n = len(ordered)
    if n < 3:
        raise CorpusError(f"need at least 3 utterances to split, got {n}")

    n_train = max(1, int(round(n * ratios[0])))
    n_dev = max(1, int(round(n * ratios[1])))
    while n_train + n_dev > n - 1:
        if n_train >= n_dev and n_train > 1:
            n_train -= 1
        else:
            n_dev -= 1

    perm = np.random.default_rng(seed).permutation(n)
    labels = {}
    for pos, idx in enumerate(perm):
        if pos < n_train:
            labels[ordered[idx]] = "train"
        elif pos < n_train + n_dev:
            labels[ordered[idx]] = "dev"
        else:
            labels[ordered[idx]] = "test"
    return labels


@dataclass(frozen=True)
class CharAlphabet:
    chars: frozenset
    counts: Mapping[str, int]
    threshold: int = 1

    def __contains__(self, ch):
        return ch in self.chars

    def encode(self, text: str) -> str:
        chars = self.chars
        return "".join(ch if ch in chars else UNK_CHAR for ch in text)

    def encode_tokens(self, tokens: Iterable[str]) -> List[str]:
        return [self.encode(t) for t in tokens]


def build_alphabet(texts: Iterable[str], threshold: int = 100, keep: str = "") -> CharAlphabet:
    """Characters seen at least ``threshold`` times, plus ★ and anything in ``keep``."""
    if threshold < 1:
        raise CorpusError("alphabet threshold must be >= 1")
    counts = Counter()
    for t in texts:
        counts.update(t)
    chars = {c for c, n in counts.items() if n >= threshold}
    chars.update(keep)
    chars.add(UNK_CHAR)
    kept = {c: counts.get(c, 0) for c in sorted(chars)}
    return CharAlphabet(frozenset(chars), kept, threshold)


def read_multitext(path) -> List[Tuple[str, str]]:
    """Read an ``id<TAB>text`` file. Undecodable or malformed lines raise."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, bline in enumerate(data.split(b"\n"), 1):
        try:
            line = bline.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid UTF-8 ({exc.reason})") from exc
        line = line.rstrip("\r")
        if not line.strip():
            continue
        if "\t" not in line:
            raise CorpusError(f"{path}:{lineno}: expected id<TAB>text")
        uid, text = line.split("\t", 1)
        rows.append((uid, text))
    return rows


def format_manifest(labels: Mapping[str, str]) -> str:
    return "".join(f"{uid}\t{labels[uid]}\n" for uid in sorted(labels))


def parse_manifest(text: str) -> Dict[str, str]:
    labels = {}
    for line in text.splitlines():
        if line:
            uid, lab = line.split("\t")
            if lab not in SPLITS:
                raise CorpusError(f"bad split label {lab!r} for id {uid!r}")
            labels[uid] = lab
    return labels
