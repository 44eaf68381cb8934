"""Bits per character (BPC) and bits per English character (BPEC).

Both metrics divide the same total -log2 p(utterance); BPC by the
utterance's own character count, BPEC by the character count of the
aligned original English utterance. Counts include spaces and one EOS
position per utterance. Corpus figures sum numerators and denominators
separately before dividing.
"""

import csv
import io
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .corpus import CharAlphabet, detokenize
from .errors import EvaluationError
from .hybrid_ngram import NgramModel, utterance_logprob


@dataclass(frozen=True)
class UtteranceScore:
    id: str
    bits: float
    own_len: int
    en_len: int

    def __post_init__(self):
        if self.own_len < 1 or self.en_len < 1:
            raise EvaluationError(f"utterance {self.id}: lengths must be >= 1")

    @property
    def bpc(self):
        return self.bits / self.own_len

    @property
    def bpec(self):
        return self.bits / self.en_len


@dataclass(frozen=True)
class EvalRecord:
    lang: str
    model_kind: str
    variant: str
    bits_total: float
    own_chars: int
    en_chars: int

    @property
    def bpc(self) -> float:
        return self.bits_total / self.own_chars

    @property
    def bpec(self) -> float:
        return self.bits_total / self.en_chars

    @property
    def delta_bpc(self) -> float:
        return self.bpec - self.bpc


class NgramScorer:
    """Bits from the derivation-summed hybrid n-gram probability."""

    def __init__(self, model: NgramModel, alphabet: CharAlphabet):
        self.model = model
        self.alphabet = alphabet

    def bits(self, tokens: Sequence[str]) -> float:
        return -utterance_logprob(self.model, self.alphabet.encode_tokens(tokens))


class LstmScorer:
    def __init__(self, model, alphabet: CharAlphabet):
        self.model = model
        self.alphabet = alphabet

    def bits(self, tokens: Sequence[str]) -> float:
        return self.model.nll(self.alphabet.encode(detokenize(tokens)))


def char_length(tokens: Sequence[str]) -> int:
    """Characters of the space-joined tokens plus the EOS position."""
    return len(detokenize(tokens)) + 1


def utterance_bits(scorer, uid: str, tokens: Sequence[str], english_tokens) -> UtteranceScore:
    if english_tokens is None:
        raise EvaluationError(f"utterance {uid} has no aligned English reference")
    return UtteranceScore(uid, scorer.bits(tokens), char_length(tokens), char_length(english_tokens))


def aggregate(scores: Iterable[UtteranceScore], lang="", model_kind="", variant="") -> EvalRecord:
    scores = list(scores)
    if not scores:
        raise EvaluationError("cannot aggregate an empty score list")
    bits = sum(s.bits for s in scores)
    if bits < 0:
        raise EvaluationError(f"negative total bits {bits}")
    return EvalRecord(lang, model_kind, variant, bits,
                      sum(s.own_len for s in scores), sum(s.en_len for s in scores))


def delta_bpc_report(record: EvalRecord) -> Tuple[int, str]:
    """ΔBPC in hundredths of a bit, with its sign class."""
    value = int(round(record.delta_bpc * 100))
    cls = "positive" if value > 0 else "negative" if value < 0 else "zero"
    return value, cls


CSV_FIELDS = ["lang", "model", "variant", "bits_total", "own_chars", "en_chars", "bpc", "bpec", "delta_bpc_e2"]


def format_records(records: Iterable[EvalRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in sorted(records, key=lambda r: (r.lang, r.model_kind, r.variant)):
        writer.writerow([r.lang, r.model_kind, r.variant, f"{r.bits_total:.6f}", r.own_chars, r.en_chars,
                         f"{r.bpc:.6f}", f"{r.bpec:.6f}", f"{r.delta_bpc * 100:.6f}"])
    return out.getvalue()


def parse_records(text: str) -> List[EvalRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and set(CSV_FIELDS) - set(rows[0]):
        raise EvaluationError(f"evaluation CSV is missing columns {sorted(set(CSV_FIELDS) - set(rows[0]))}")
    return [EvalRecord(r["lang"], r["model"], r["variant"], float(r["bits_total"]),
                       int(r["own_chars"]), int(r["en_chars"])) for r in rows]
