"""UniMorph-style lexicons and morphological counting complexity (MCC)."""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List

from .errors import CorpusError


@dataclass(frozen=True)
class LexiconEntry:
    lemma: str
    form: str
    features: tuple

    @classmethod
    def make(cls, lemma, form, tags: Iterable[str]) -> "LexiconEntry":
        features = tuple(sorted({t for t in tags if t}))
        if not features:
            raise ValueError("a lexicon entry needs at least one feature tag")
        return cls(lemma, form, features)


def parse_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> List[LexiconEntry]:
    """Parse ``lemma<TAB>form<TAB>TAG;TAG;...`` lines; blank lines are skipped."""
    entries = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise CorpusError(f"{source}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
        try:
            entries.append(LexiconEntry.make(fields[0], fields[1], fields[2].split(";")))
        except ValueError as exc:
            raise CorpusError(f"{source}:{lineno}: {exc}") from None
    return entries


def read_lexicon(path) -> List[LexiconEntry]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read lexicon {path}: {exc}") from exc
    return parse_lexicon(text.splitlines(), str(path))


def counting_complexity(entries: Iterable[LexiconEntry]) -> int:
    """Number of distinct feature bundles attested in the lexicon."""
    return len({e.features for e in entries})


def format_mcc(values: Dict[str, int]) -> str:
    return "lang,mcc\n" + "".join(f"{lang},{values[lang]}\n" for lang in sorted(values))


def parse_mcc(text: str) -> Dict[str, int]:
    return {row["lang"]: int(row["mcc"]) for row in csv.DictReader(io.StringIO(text))}
