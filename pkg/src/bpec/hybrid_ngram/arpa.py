r"""ARPA-style text serialization for hybrid models.

Layout::

    \symbols\
    </s>	S
    a	C
    foo	W

    \data\
    order=7
    prune_words=4
    ngram 1=...

    \1-grams:
    <log2 p>	<tokens>	[<log2 backoff>]
    ...
    \end\

Probabilities and backoffs are base-2 logs printed with 17 significant
digits, which reproduces every double exactly. N-gram tokens carry their
class (``W:foo``, ``C:a``, ``S:</s>``) because a one-letter word and the
letter itself are different symbols. A context that is kept while its own
n-gram was pruned is written with ``-`` in the probability column.
"""

import io
from collections import defaultdict
from pathlib import Path

from ..errors import ModelError
from .kn import NgramModel
from .vocab import CHAR, EOS_TEXT, EOW_TEXT, SPECIAL, WORD, HybridVocabulary


def _fmt(x: float) -> str:
    return "%.17g" % x


def format_model(model: NgramModel) -> str:
    vocab = model.vocab
    out = io.StringIO()
    out.write("\\symbols\\\n")
    for text, cls in zip(vocab.texts, vocab.classes):
        out.write(f"{text}\t{cls}\n")

    sections = defaultdict(dict)  # order -> ngram -> [logp or None, backoff or None]
    for ctx, row in model.probs.items():
        for sym, lp in row.items():
            sections[len(ctx) + 1][ctx + (sym,)] = [lp, None]
    for ctx, bo in model.backoff.items():
        sections[len(ctx)].setdefault(ctx, [None, None])[1] = bo

    out.write("\n\\data\\\n")
    out.write(f"order={model.order}\nprune_words={model.prune_words}\n")
    for k in range(1, model.order + 1):
        out.write(f"ngram {k}={len(sections.get(k, ()))}\n")
    for k in range(1, model.order + 1):
        out.write(f"\n\\{k}-grams:\n")
        for gram in sorted(sections.get(k, ())):
            lp, bo = sections[k][gram]
            fields = ["-" if lp is None else _fmt(lp), " ".join(vocab.token(s) for s in gram)]
            if bo is not None:
                fields.append(_fmt(bo))
            out.write("\t".join(fields) + "\n")
    out.write("\n\\end\\\n")
    return out.getvalue()


def write_model(model: NgramModel, path) -> None:
    Path(path).write_text(format_model(model), encoding="utf-8")


def parse_model(text: str) -> NgramModel:
    lines = iter(text.split("\n"))

    def expect(header):
        for line in lines:
            if line.strip():
                if line.strip() != header:
                    raise ModelError(f"expected {header!r}, found {line!r}")
                return
        raise ModelError(f"missing {header!r} section")

    expect("\\symbols\\")
    texts, classes = [], []
    for line in lines:
        if not line:
            break
        sym_text, cls = line.rsplit("\t", 1)
        if cls not in (WORD, CHAR, SPECIAL):
            raise ModelError(f"unknown symbol class {cls!r}")
        texts.append(sym_text)
        classes.append(cls)
    vocab = HybridVocabulary([t for t, c in zip(texts, classes) if c == WORD],
                             [t for t, c in zip(texts, classes) if c == CHAR])
    if vocab.texts != texts or vocab.classes != classes or texts[:2] != [EOS_TEXT, EOW_TEXT]:
        raise ModelError("symbol table is not in canonical order")
    lookup = {f"{c}:{t}": i for i, (t, c) in enumerate(zip(texts, classes))}

    expect("\\data\\")
    meta = {}
    sizes = {}
    for line in lines:
        if not line:
            break
        if line.startswith("ngram "):
            k, n = line[6:].split("=")
            sizes[int(k)] = int(n)
        else:
            key, value = line.split("=")
            meta[key] = int(value)
    order, prune_words = meta["order"], meta["prune_words"]

    probs = {(): {}}
    backoff = {}
    for k in range(1, order + 1):
        expect(f"\\{k}-grams:")
        seen = 0
        for line in lines:
            if not line:
                break
            fields = line.split("\t")
            try:
                gram = tuple(lookup[tok] for tok in fields[1].split(" "))
            except KeyError as exc:
                raise ModelError(f"unknown symbol {exc.args[0]!r} in {k}-gram section") from None
            if fields[0] != "-":
                probs.setdefault(gram[:-1], {})[gram[-1]] = float(fields[0])
            if len(fields) > 2:
                backoff[gram] = float(fields[2])
            seen += 1
        if seen != sizes.get(k, 0):
            raise ModelError(f"{k}-gram section has {seen} lines, header says {sizes.get(k, 0)}")
    expect("\\end\\")
    return NgramModel(vocab, order, prune_words, probs, backoff)


def read_model(path) -> NgramModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read n-gram model {path}: {exc}") from exc
    return parse_model(text)
