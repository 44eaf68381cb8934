import pytest

from bpec.analysis import load_published
from bpec.errors import CorpusError
from bpec.morphology import LexiconEntry, counting_complexity, format_mcc, parse_lexicon, parse_mcc, read_lexicon


def test_parse_entry():
    (e,) = parse_lexicon(["kitap\tkitaplar\tN;PL"])
    assert e.lemma == "kitap" and e.form == "kitaplar"
    assert set(e.features) == {"N", "PL"}


def test_empty():
    assert parse_lexicon([]) == []


def test_tag_order_canonical():
    a, b = parse_lexicon(["a\tb\tX;Y", "a\tb\tY;X"])
    assert a.features == b.features


def test_bad_line_reports_position():
    with pytest.raises(CorpusError, match=":2:"):
        parse_lexicon(["a\tb\tN", "broken line"], "lex")


def test_toy_complexity():
    entries = [LexiconEntry.make("x", "x", ["N", "SG"]), LexiconEntry.make("x", "xs", ["N", "PL"]),
               LexiconEntry.make("y", "ys", ["PL", "N"])]
    assert counting_complexity(entries) == 2


def test_invariant_under_duplication_and_order():
    entries = parse_lexicon(["a\ta\tN;SG", "a\tas\tN;PL", "b\tbs\tV;PST"])
    assert counting_complexity(entries) == counting_complexity(entries[::-1] + entries) == 3


def test_monotone_and_subadditive():
    a = parse_lexicon(["a\ta\tN;SG", "a\tas\tN;PL"])
    b = parse_lexicon(["b\tb\tN;SG", "b\tbed\tV;PST"])
    union = counting_complexity(a + b)
    assert union >= counting_complexity(a)
    assert counting_complexity(a + [b[0]]) == counting_complexity(a)
    assert union <= counting_complexity(a) + counting_complexity(b)


def test_read_lexicon(tmp_path):
    p = tmp_path / "fi.tsv"
    p.write_text("talo\ttalossa\tN;IN+ESS;SG\n", encoding="utf-8")
    assert counting_complexity(read_lexicon(p)) == 1


def test_fixture_values():
    mcc, _, _ = load_published()
    assert mcc["en"] == 6
    assert mcc["fi"] == 198
    assert len(mcc) == 21


def test_mcc_csv_roundtrip():
    mcc, _, _ = load_published()
    assert parse_mcc(format_mcc(mcc)) == mcc
