"""Hybrid word/character symbol inventory and the token -> symbol stream encoding.

Symbols are small integers. Ids 0 and 1 are the specials EOS and EOW; the
character symbols follow in sorted order, then the word symbols. A
single-character word and the same character are distinct ids.
"""

from collections import Counter
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from ..corpus import UNK_CHAR
from ..errors import ModelError

EOS = 0
EOW = 1
EOS_TEXT = "</s>"
EOW_TEXT = "</w>"

WORD, CHAR, SPECIAL = "W", "C", "S"


class HybridVocabulary:
    """Disjoint word, character and special symbol sets."""

    def __init__(self, words: Iterable[str], chars: Iterable[str]):
        self.chars = tuple(sorted(set(chars)))
        self.words = tuple(sorted(set(words)))
        self.texts: List[str] = [EOS_TEXT, EOW_TEXT, *self.chars, *self.words]
        self.classes: List[str] = [SPECIAL, SPECIAL] + [CHAR] * len(self.chars) + [WORD] * len(self.words)
        self.char_ids: Dict[str, int] = {c: i + 2 for i, c in enumerate(self.chars)}
        self.word_ids: Dict[str, int] = {w: i + 2 + len(self.chars) for i, w in enumerate(self.words)}
        self.first_word = 2 + len(self.chars)
        # symbols allowed after a word-boundary / word-internal history
        self.boundary_allowed = frozenset([EOS, *self.char_ids.values(), *self.word_ids.values()])
        self.internal_allowed = frozenset([EOW, *self.char_ids.values()])

    def __len__(self):
        return len(self.texts)

    def __eq__(self, other):
        return isinstance(other, HybridVocabulary) and self.texts == other.texts and self.classes == other.classes

    def is_char(self, sym: int) -> bool:
        return 2 <= sym < self.first_word

    def is_word(self, sym: int) -> bool:
        return sym >= self.first_word

    def is_internal(self, history: Sequence[int]) -> bool:
        """Word-internal histories end in a character symbol."""
        return bool(history) and 2 <= history[-1] < self.first_word

    def allowed(self, history: Sequence[int]) -> frozenset:
        return self.internal_allowed if self.is_internal(history) else self.boundary_allowed

    def token(self, sym: int) -> str:
        """Unambiguous printable spelling, e.g. ``W:foo`` versus ``C:f``."""
        return f"{self.classes[sym]}:{self.texts[sym]}"

    def spell(self, word: str) -> List[int]:
        try:
            return [self.char_ids[c] for c in word] + [EOW]
        except KeyError as exc:
            raise ModelError(f"character {exc.args[0]!r} of {word!r} is not in the model alphabet") from None

    def describe(self, stream: Sequence[int]) -> str:
        return " ".join(self.token(s) for s in stream)


def build_vocab(token_streams: Sequence[Sequence[str]], extra_chars: Iterable[str] = (UNK_CHAR,)
                ) -> Tuple[HybridVocabulary, List[Tuple[int, ...]]]:
    """Build W and C from training tokens and emit the training symbol streams.

    Word types seen at least twice form W. The first occurrence of every
    type (in stream order) is spelled out character by character, so
    every type contributes character-level training evidence and
    singletons never enter W.
    """
    token_streams = [list(t) for t in token_streams]
    if not token_streams:
        raise ModelError("cannot build a vocabulary from an empty training set")
    counts = Counter(tok for toks in token_streams for tok in toks)
    chars = set(extra_chars)
    for tok in counts:
        chars.update(tok)
    vocab = HybridVocabulary((w for w, n in counts.items() if n >= 2), chars)

    seen = set()
    streams = []
    for toks in token_streams:
        flags = []
        for tok in toks:
            flags.append(tok not in seen)
            seen.add(tok)
        streams.append(encode(toks, vocab, flags))
    return vocab, streams


def encode(tokens: Sequence[str], vocab: HybridVocabulary,
           force_chars: Union[bool, Sequence[bool]] = False) -> Tuple[int, ...]:
    """Symbol stream for one utterance.

    ``force_chars`` is either one flag for the whole utterance or one flag
    per token; a set flag spells the word out even when it is in W.
    """
    if isinstance(force_chars, bool):
        force_chars = [force_chars] * len(tokens)
    elif len(force_chars) != len(tokens):
        raise ValueError("force_chars needs one flag per token")
    out: List[int] = []
    for tok, spell in zip(tokens, force_chars):
        wid = vocab.word_ids.get(tok)
        if wid is not None and not spell:
            out.append(wid)
        else:
            out.extend(vocab.spell(tok))
    out.append(EOS)
    return tuple(out)


def check_stream(stream: Sequence[int], vocab: HybridVocabulary) -> None:
    """Raise unless every character run is closed by EOW and EOS ends the stream."""
    if not stream or stream[-1] != EOS or EOS in stream[:-1]:
        raise ModelError("stream must end with its only EOS")
    inside = False
    for sym in stream:
        if vocab.is_char(sym):
            inside = True
        elif sym == EOW:
            if not inside:
                raise ModelError("EOW outside a character span")
            inside = False
        elif inside:
            raise ModelError(f"character span not closed before {vocab.token(sym)}")
        elif not 0 <= sym < len(vocab):
            raise ModelError(f"unknown symbol id {sym}")
