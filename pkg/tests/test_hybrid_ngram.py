import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from bpec.errors import ModelError
from bpec.hybrid_ngram import (EOS, EOW, build_vocab, check_stream, encode, format_model,
                               kn_discounts, parse_model, score, train_kn, utterance_logprob)
from bpec.hybrid_ngram.vocab import HybridVocabulary

from kn_oracle import BruteKN


def toy_corpus(rng, n_utts=8, n_types=6, letters="abc", max_len=5):
    types = sorted({"".join(rng.choice(letters) for _ in range(rng.randint(1, 3)))
                    for _ in range(n_types)})
    return [[rng.choice(types) for _ in range(rng.randint(0, max_len))] for _ in range(n_utts)]


def oracle_for(vocab, streams, order, prune_words=4):
    return BruteKN(streams, len(vocab), vocab.is_char, vocab.is_word, EOS, EOW, order, prune_words)


def reachable_histories(streams, order):
    keep = max(1, order - 1)
    hs = {()}
    for s in streams:
        for i in range(len(s)):
            hs.add(tuple(s[max(0, i - keep):i]))
    return sorted(hs)


# -- vocabulary and encoding -------------------------------------------------

def test_build_vocab_spells_first_instance():
    vocab, streams = build_vocab([["a", "b", "a"]])
    assert vocab.words == ("a",)
    a_c, b_c, a_w = vocab.char_ids["a"], vocab.char_ids["b"], vocab.word_ids["a"]
    assert streams == [(a_c, EOW, b_c, EOW, a_w, EOS)]


def test_build_vocab_all_singletons():
    vocab, streams = build_vocab([["x", "yy"], ["zzz"]])
    assert vocab.words == ()
    assert all(not vocab.is_word(s) for st_ in streams for s in st_)


def test_build_vocab_empty_raises():
    with pytest.raises(ModelError):
        build_vocab([])


def test_encode_foo_bar_baz():
    vocab = HybridVocabulary(["foo", "baz"], "fobarz")
    c = vocab.char_ids
    got = encode(["foo", "bar", "baz"], vocab)
    assert got == (vocab.word_ids["foo"], c["b"], c["a"], c["r"], EOW, vocab.word_ids["baz"], EOS)
    assert vocab.describe(got) == "W:foo C:b C:a C:r S:</w> W:baz S:</s>"


def test_encode_forced_and_empty():
    vocab = HybridVocabulary(["foo"], "fo")
    c = vocab.char_ids
    assert encode(["foo"], vocab, True) == (c["f"], c["o"], c["o"], EOW, EOS)
    assert encode([], vocab) == (EOS,)


def test_single_char_word_distinct_from_char():
    vocab = HybridVocabulary(["a"], "a")
    assert vocab.word_ids["a"] != vocab.char_ids["a"]
    assert vocab.is_word(vocab.word_ids["a"]) and vocab.is_char(vocab.char_ids["a"])


def test_check_stream():
    vocab = HybridVocabulary(["foo"], "fo")
    check_stream(encode(["foo", "of"], vocab), vocab)
    with pytest.raises(ModelError):
        check_stream((vocab.char_ids["f"], EOS), vocab)
    with pytest.raises(ModelError):
        check_stream((EOS, EOS), vocab)


# -- discounts ---------------------------------------------------------------

def test_discount_fallback_when_undefined():
    assert kn_discounts({1: 5}) == (0.75, 0.75, 0.75)
    assert kn_discounts({1: 5, 2: 0, 3: 1}) == (0.75, 0.75, 0.75)


def test_discount_formula():
    d1, d2, d3 = kn_discounts({1: 10, 2: 5, 3: 3, 4: 2})
    y = 10 / 20
    assert d1 == pytest.approx(1 - 2 * y * 5 / 10)
    assert d2 == pytest.approx(2 - 3 * y * 3 / 5)
    assert d3 == pytest.approx(3 - 4 * y * 2 / 3)


# -- training against the brute-force recursion -------------------------------

def test_order_out_of_range():
    vocab, streams = build_vocab([["a", "a"]])
    with pytest.raises(ModelError):
        train_kn(streams, vocab, order=0)
    with pytest.raises(ModelError):
        train_kn(streams, vocab, order=8)


def test_unigram_normalizes():
    vocab = HybridVocabulary([], "ab")
    a, b = vocab.char_ids["a"], vocab.char_ids["b"]
    model = train_kn([(a, a, b, EOW, EOS)], vocab, order=1)
    for hist in [(), (a,)]:
        total = sum(2.0 ** model.logprob(s, hist) for s in vocab.allowed(hist))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_bigram_toy_matches_oracle():
    # "ab ab b b a" -> a b </w> ab b </w> b a </w> </s>: ten symbols
    vocab, streams = build_vocab([["ab", "ab", "b", "b", "a"]])
    assert sum(len(s) for s in streams) == 10
    model = train_kn(streams, vocab, order=2)
    oracle = oracle_for(vocab, streams, 2)
    for ctx, row in model.probs.items():
        if not ctx:
            continue
        for sym, lp in row.items():
            assert 2.0 ** lp == pytest.approx(oracle.prob(sym, ctx), rel=1e-12)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("order", [1, 2, 3])
def test_random_corpora_match_oracle(seed, order):
    rng = random.Random(seed * 31 + order)
    vocab, streams = build_vocab(toy_corpus(rng))
    model = train_kn(streams, vocab, order=order)
    oracle = oracle_for(vocab, streams, order)
    for hist in reachable_histories(streams, order):
        for sym in range(len(vocab)):
            expected = oracle.prob(sym, hist)
            got = model.logprob(sym, hist)
            if expected == 0:
                assert got == -math.inf
            else:
                assert 2.0 ** got == pytest.approx(expected, rel=1e-10)


def test_pruning_matches_oracle_with_small_prune_depth():
    rng = random.Random(5)
    tokens = [[rng.choice(["ab", "b", "ca"]) for _ in range(6)] for _ in range(6)]
    vocab, streams = build_vocab(tokens)
    model = train_kn(streams, vocab, order=4, prune_words=1)
    oracle = oracle_for(vocab, streams, 4, prune_words=1)
    for hist in reachable_histories(streams, 4):
        for sym in vocab.allowed(hist):
            assert 2.0 ** model.logprob(sym, hist) == pytest.approx(oracle.prob(sym, hist), rel=1e-10)


def test_support_constraints():
    rng = random.Random(1)
    vocab, streams = build_vocab(toy_corpus(rng, n_utts=12))
    model = train_kn(streams, vocab, order=3)
    for hist in reachable_histories(streams, 3):
        for sym in range(len(vocab)):
            lp = model.logprob(sym, hist)
            if vocab.is_internal(hist):
                ok = vocab.is_char(sym) or sym == EOW
            else:
                ok = sym != EOW
            assert (lp > -math.inf) == ok


def test_normalization_over_reachable_histories():
    rng = random.Random(2)
    vocab, streams = build_vocab(toy_corpus(rng, n_utts=15))
    model = train_kn(streams, vocab, order=4)
    for hist in reachable_histories(streams, 4):
        total = math.fsum(2.0 ** model.logprob(s, hist) for s in vocab.allowed(hist))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_normalization_over_unseen_histories():
    rng = random.Random(3)
    vocab, streams = build_vocab(toy_corpus(rng, n_utts=10))
    model = train_kn(streams, vocab, order=3)
    symbols = [s for s in range(len(vocab)) if s != EOS]
    for hist in itertools.product(symbols, repeat=2):
        total = math.fsum(2.0 ** model.logprob(s, hist) for s in vocab.allowed(hist))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_pruning_rule_order7():
    words = ["w%d" % i for i in range(8)]
    utts = [[words[(i + j) % 8] for j in range(9)] for i in range(8)] * 2
    vocab, streams = build_vocab(utts)
    model = train_kn(streams, vocab, order=7)
    for ctx in model.probs:
        assert not (len(ctx) > 4 and all(vocab.is_word(s) for s in ctx))
    assert any(len(ctx) == 4 and all(vocab.is_word(s) for s in ctx) for ctx in model.probs)


# -- scoring -----------------------------------------------------------------

def test_score_eos_only():
    vocab, streams = build_vocab([["ab", "ab"], []])
    model = train_kn(streams, vocab, order=3)
    assert score(model, (EOS,)) == model.logprob(EOS, ())


def test_score_bigram_backoff_chain():
    vocab, streams = build_vocab([["ab", "ab", "b", "b", "a"]])
    model = train_kn(streams, vocab, order=2)
    a, b = vocab.char_ids["a"], vocab.char_ids["b"]
    stream = (b, a, EOW, EOS)
    # hand chain from stored tables
    uni = {s: 2.0 ** lp for s, lp in model.probs[()].items()}
    z_b = sum(uni[s] for s in vocab.boundary_allowed)
    z_i = sum(uni[s] for s in vocab.internal_allowed)
    p1 = uni[b] / z_b                                   # b | <start>
    row_b = model.probs[(b,)]
    p2 = (2.0 ** row_b[a] if a in row_b
          else 2.0 ** model.backoff[(b,)] * uni[a] / z_i)  # a | b
    row_a = model.probs[(a,)]
    p3 = 2.0 ** row_a[EOW]                              # EOW | a, seen
    p4 = (2.0 ** model.probs[(EOW,)][EOS] if EOS in model.probs.get((EOW,), {})
          else 2.0 ** model.backoff[(EOW,)] * uni[EOS] / z_b)
    expected = math.log2(p1) + math.log2(p2) + math.log2(p3) + math.log2(p4)
    assert score(model, stream) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_score_nonpositive_and_zero_prob_error():
    rng = random.Random(4)
    vocab, streams = build_vocab(toy_corpus(rng))
    model = train_kn(streams, vocab, order=3)
    for s in streams:
        assert score(model, s) <= 0
    with pytest.raises(ModelError):
        score(model, (EOW, EOS))


# -- derivation sum ----------------------------------------------------------

def enumerate_logprob(model, tokens):
    in_vocab = [i for i, t in enumerate(tokens) if t in model.vocab.word_ids]
    total = 0.0
    for flags in itertools.product([False, True], repeat=len(in_vocab)):
        force = [True] * len(tokens)
        for i, f in zip(in_vocab, flags):
            force[i] = f
        total += 2.0 ** score(model, encode(tokens, model.vocab, force))
    return math.log2(total)


def test_all_oov_equals_single_derivation():
    vocab, streams = build_vocab([["ab", "ab", "c"]])
    model = train_kn(streams, vocab, order=3)
    toks = ["ba", "cc"]
    assert utterance_logprob(model, toks) == pytest.approx(score(model, encode(toks, vocab)), rel=1e-12)


def test_one_word_two_derivations():
    vocab, streams = build_vocab([["ab", "ab", "c"]])
    model = train_kn(streams, vocab, order=3)
    as_word = score(model, encode(["ab"], vocab))
    as_chars = score(model, encode(["ab"], vocab, True))
    assert utterance_logprob(model, ["ab"]) == pytest.approx(
        math.log2(2.0 ** as_word + 2.0 ** as_chars), rel=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 5, 7])
def test_derivation_dp_equals_enumeration(order):
    rng = random.Random(order)
    vocab, streams = build_vocab(toy_corpus(rng, n_utts=20, n_types=8))
    model = train_kn(streams, vocab, order=order)
    words = list(vocab.words) + ["cab", "b"]
    for _ in range(15):
        toks = [rng.choice(words) for _ in range(rng.randint(0, 6))]
        dp = utterance_logprob(model, toks)
        assert dp == pytest.approx(enumerate_logprob(model, toks), rel=1e-10)
        assert dp >= score(model, encode(toks, vocab)) - 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["a", "ab", "ba", "c", "cab"]), max_size=6))
def test_derivation_sum_dominates_each_derivation(toks):
    vocab, streams = build_vocab([["a", "ab", "a", "ab", "c"], ["ba", "c", "a"]])
    model = train_kn(streams, vocab, order=4)
    total = utterance_logprob(model, toks)
    assert total >= score(model, encode(toks, vocab, True)) - 1e-12
    assert total >= score(model, encode(toks, vocab, False)) - 1e-12


# -- serialization -----------------------------------------------------------

def test_roundtrip_bit_exact():
    rng = random.Random(9)
    vocab, streams = build_vocab(toy_corpus(rng, n_utts=20) + [["a:b", "a"], ["a:b"]])
    model = train_kn(streams, vocab, order=7)
    text = format_model(model)
    back = parse_model(text)
    assert back.vocab == vocab
    assert back.order == 7 and back.prune_words == 4
    assert back.probs == model.probs
    assert back.backoff == model.backoff
    assert format_model(back) == text


def test_roundtrip_with_orphan_context():
    # five words then a spelled word: the 6-gram history (w^5, c) is kept
    # while its own 6-gram entry is pruned
    utts = [["p", "q", "r", "s", "t", "zz"]] * 3 + [["p", "q", "r", "s", "t", "yy"]]
    vocab, streams = build_vocab(utts)
    model = train_kn(streams, vocab, order=7)
    orphans = [c for c in model.backoff if c[:-1] not in model.probs or c[-1] not in model.probs[c[:-1]]]
    text = format_model(model)
    back = parse_model(text)
    assert back.probs == model.probs and back.backoff == model.backoff
    assert orphans
    assert "\n-\t" in text


def test_parse_rejects_garbage():
    with pytest.raises(ModelError):
        parse_model("hello\n")
