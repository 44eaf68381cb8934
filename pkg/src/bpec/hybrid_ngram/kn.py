"""Interpolated modified Kneser-Ney estimation over hybrid symbol streams.

Two things distinguish this from a textbook KN trainer:

* Histories ending in a character symbol are word-internal and may only
  predict characters or EOW; every other history (including the empty
  one at utterance start) may not predict EOW. Above the unigram level
  the training streams already respect this, so the constraint is applied
  by renormalizing the unigram base distribution over the allowed set.
* N-grams whose history is five or more word symbols are never stored.
  Scoring such a history falls through to its longest stored suffix.

Streams carry no begin-of-sentence padding. For continuation counts the
utterance start acts as one extra left-context type, so n-grams seen only
at the start still receive a positive count.
"""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, Sequence, Tuple

from ..errors import ModelError
from .vocab import EOS, HybridVocabulary

logger = logging.getLogger(__name__)

MAX_ORDER = 7
FALLBACK_DISCOUNT = 0.75
_START = -1

Context = Tuple[int, ...]


def kn_discounts(count_of_counts, fallback=FALLBACK_DISCOUNT):
    """Chen & Goodman discounts (D1, D2, D3+) from counts-of-counts.

    Falls back to a single absolute discount when the estimate is
    undefined or leaves the valid range.
    """
    n1, n2, n3, n4 = (count_of_counts.get(i, 0) for i in (1, 2, 3, 4))
    if n1 and n2 and n3:
        y = n1 / (n1 + 2 * n2)
        d = (1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3)
        if 0 < d[0] < 1 and 0 < d[1] < 2 and 0 < d[2] < 3:
            return d
    return (fallback, fallback, fallback)


def _discount(d, c):
    return d[0] if c == 1 else d[1] if c == 2 else d[2]


def _log2_sum(values):
    total = math.fsum(2.0 ** v for v in values)
    return math.log2(total) if total > 0 else -math.inf


class NgramModel:
    """Backoff-form hybrid n-gram model with log2 probabilities.

    ``probs[context][symbol]`` holds interpolated log2 probabilities for
    every stored n-gram, ``backoff[context]`` the log2 interpolation weight
    of each stored context of length >= 1.
    """

    def __init__(self, vocab: HybridVocabulary, order: int, prune_words: int,
                 probs: Dict[Context, Dict[int, float]], backoff: Dict[Context, float]):
        self.vocab = vocab
        self.order = order
        self.prune_words = prune_words
        self.probs = probs
        self.backoff = backoff
        self._update_normalizers()

    def _update_normalizers(self):
        uni = self.probs.get((), {})
        self._logz_b = _log2_sum(uni[s] for s in self.vocab.boundary_allowed if s in uni)
        self._logz_i = _log2_sum(uni[s] for s in self.vocab.internal_allowed if s in uni)

    def _lookup(self, sym: int, ctx: Context, internal: bool) -> float:
        bo = 0.0
        probs, backoff = self.probs, self.backoff
        while ctx:
            row = probs.get(ctx)
            if row is not None:
                lp = row.get(sym)
                if lp is not None:
                    return bo + lp
                bo += backoff[ctx]
            ctx = ctx[1:]
        lp = probs[()].get(sym)
        if lp is None:
            return -math.inf
        return bo + lp - (self._logz_i if internal else self._logz_b)

    def logprob(self, sym: int, history: Sequence[int]) -> float:
        """log2 p(sym | history); -inf for symbols outside the history's allowed set."""
        internal = self.vocab.is_internal(history)
        allowed = self.vocab.internal_allowed if internal else self.vocab.boundary_allowed
        if sym not in allowed:
            return -math.inf
        n = self.order - 1
        ctx = tuple(history[max(0, len(history) - n):]) if n else ()
        return self._lookup(sym, ctx, internal)

    def contexts(self):
        return [c for c in self.probs if c]

    def num_entries(self):
        return sum(len(r) for r in self.probs.values())


def is_pruned(ngram_history: Sequence[int], vocab: HybridVocabulary, prune_words: int) -> bool:
    return len(ngram_history) > prune_words and all(vocab.is_word(s) for s in ngram_history)


def _collect_counts(streams, order):
    """Raw counts at the top order, continuation counts below it."""
    top = Counter()
    extensions = [set() for _ in range(order)]
    for stream in streams:
        s = tuple(stream)
        for j in range(len(s)):
            for k in range(1, order + 1):
                p = j - k + 1
                if p < 0:
                    break
                if k == order:
                    top[s[p:j + 1]] += 1
                else:
                    extensions[k].add(s[p - 1:j + 1] if p > 0 else (_START,) + s[p:j + 1])
    counts = [None]
    for k in range(1, order):
        counts.append(Counter(e[1:] for e in extensions[k]))
    counts.append(top)
    return counts


def train_kn(streams: Iterable[Sequence[int]], vocab: HybridVocabulary, order: int = MAX_ORDER,
             prune_words: int = 4, fallback_discount: float = FALLBACK_DISCOUNT) -> NgramModel:
    if not 1 <= order <= MAX_ORDER:
        raise ModelError(f"order must be between 1 and {MAX_ORDER}, got {order}")
    streams = [tuple(s) for s in streams]
    if not streams:
        raise ModelError("no training streams")
    for s in streams:
        if not s or s[-1] != EOS:
            raise ModelError("training streams must end with EOS")

    counts = _collect_counts(streams, order)
    for k in range(prune_words + 2, order + 1):
        counts[k] = Counter({g: c for g, c in counts[k].items()
                             if not is_pruned(g[:-1], vocab, prune_words)})

    model = NgramModel(vocab, order, prune_words, {(): {}}, {})

    # unigram: discounted continuation counts interpolated with a uniform floor
    uni = counts[1]
    d = kn_discounts(Counter(uni.values()), fallback_discount)
    total = sum(uni.values())
    kept = sum(_discount(d, c) for c in uni.values())
    floor = kept / total / len(vocab)
    row = {}
    for s in range(len(vocab)):
        c = uni.get((s,), 0)
        row[s] = math.log2((c - _discount(d, c)) / total + floor if c else floor)
    model.probs[()] = row
    model._update_normalizers()
    logger.debug("order 1: D=%s, %d symbols", d, len(vocab))

    for k in range(2, order + 1):
        d = kn_discounts(Counter(counts[k].values()), fallback_discount)
        by_ctx = defaultdict(list)
        for g, c in counts[k].items():
            by_ctx[g[:-1]].append((g[-1], c))
        new_probs = {}
        new_backoff = {}
        for ctx in sorted(by_ctx):
            rows = by_ctx[ctx]
            total = sum(c for _, c in rows)
            gamma = sum(_discount(d, c) for _, c in rows) / total
            internal = vocab.is_char(ctx[-1])
            lower = ctx[1:]
            entry = {}
            for sym, c in sorted(rows):
                p = (c - _discount(d, c)) / total + gamma * 2.0 ** model._lookup(sym, lower, internal)
                entry[sym] = math.log2(p)
            new_probs[ctx] = entry
            new_backoff[ctx] = math.log2(gamma)
        model.probs.update(new_probs)
        model.backoff.update(new_backoff)
        logger.debug("order %d: D=%s, %d contexts", k, d, len(by_ctx))
    return model


def score(model: NgramModel, stream: Sequence[int]) -> float:
    """log2 probability of one symbol stream (a single derivation)."""
    keep = max(1, model.order - 1)
    total = 0.0
    for i, sym in enumerate(stream):
        lp = model.logprob(sym, stream[max(0, i - keep):i])
        if lp == -math.inf:
            hist = model.vocab.describe(stream[max(0, i - keep):i])
            raise ModelError(f"zero probability for {model.vocab.token(sym)} after [{hist}]")
        total += lp
    return total
