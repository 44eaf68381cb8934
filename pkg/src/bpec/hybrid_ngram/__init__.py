"""Flat hybrid word/character open-vocabulary n-gram language model."""

from .arpa import format_model, parse_model, read_model, write_model
from .derivations import utterance_logprob
from .kn import NgramModel, kn_discounts, score, train_kn
from .vocab import EOS, EOW, HybridVocabulary, build_vocab, check_stream, encode

__all__ = [
    "EOS", "EOW", "HybridVocabulary", "NgramModel", "build_vocab", "check_stream", "encode",
    "format_model", "kn_discounts", "parse_model", "read_model", "score", "train_kn",
    "utterance_logprob", "write_model",
]
