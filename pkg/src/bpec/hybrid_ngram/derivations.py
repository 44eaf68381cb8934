"""Utterance probability summed over all word/character derivations."""

import math
from typing import Dict, Sequence, Tuple

from ..errors import ModelError
from .kn import NgramModel
from .vocab import EOS


def _logaddexp2(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(2.0 ** (b - a)) / math.log(2)


def utterance_logprob(model: NgramModel, tokens: Sequence[str]) -> float:
    """log2 of the total probability of ``tokens`` under the hybrid model.

    Forward pass over tokens. The state is the last ``order - 1`` symbols
    (at least one, so the history class survives truncation); derivations
    reaching the same state are merged.
    """
    vocab = model.vocab
    keep = max(1, model.order - 1)
    states: Dict[Tuple[int, ...], float] = {(): 0.0}
    for tok in tokens:
        realizations = [vocab.spell(tok)]
        wid = vocab.word_ids.get(tok)
        if wid is not None:
            realizations.append([wid])
        nxt: Dict[Tuple[int, ...], float] = {}
        for hist, lp in states.items():
            for symbols in realizations:
                h = hist
                total = lp
                for sym in symbols:
                    total += model.logprob(sym, h)
                    h = (h + (sym,))[-keep:]
                nxt[h] = _logaddexp2(nxt[h], total) if h in nxt else total
        states = nxt

    result = -math.inf
    for hist, lp in states.items():
        result = _logaddexp2(result, lp + model.logprob(EOS, hist))
    if result == -math.inf:
        raise ModelError(f"utterance has zero probability: {' '.join(tokens)!r}")
    return result
