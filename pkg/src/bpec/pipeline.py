"""Pipeline stages behind the CLI: ingest, train, eval, analyze, report.

Artifacts under ``output_dir``::

    corpus/manifest.tsv                 id, split
    corpus/drops.tsv                    variant, lang, dropped ids
    corpus/{variant}/{lang}.tsv         id, split, tokenized text
    corpus/alphabets/{variant}/{lang}.json
    models/{model}/{variant}/{lang}.arpa | .lstm, plus .log.tsv
    results/eval.csv, results/mcc.csv, results/analysis.json
    report/...

Every file is written to a temporary sibling and renamed into place.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import char_lstm
from .analysis import MODELS, ResultCell, language_points, load_published
from .analysis import analyze as analyze_points, report as render_report
from .config import RunConfig
from .corpus import SPLITS, CharAlphabet, align, build_alphabet, detokenize, format_manifest, read_multitext, split
from .errors import AnalysisError, CorpusError, EvaluationError, ModelError
from .evaluation import (LstmScorer, NgramScorer, aggregate, format_records, parse_records, utterance_bits)
from .hybrid_ngram import build_vocab, format_model, parse_model, train_kn
from .morphology import counting_complexity, format_mcc, parse_mcc, read_lexicon

logger = logging.getLogger(__name__)

MODEL_SUFFIX = {"ngram": ".arpa", "lstm": ".lstm"}


def atomic_write(path, data) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_all(files: Dict[Path, object]) -> None:
    for path in sorted(files):
        atomic_write(path, files[path])


# -- paths -------------------------------------------------------------------

def track_path(cfg: RunConfig, variant: str, lang: str) -> Path:
    return cfg.output_dir / "corpus" / variant / f"{lang}.tsv"


def alphabet_path(cfg: RunConfig, variant: str, lang: str) -> Path:
    return cfg.output_dir / "corpus" / "alphabets" / variant / f"{lang}.json"


def model_path(cfg: RunConfig, model_kind: str, variant: str, lang: str) -> Path:
    return cfg.output_dir / "models" / model_kind / variant / f"{lang}{MODEL_SUFFIX[model_kind]}"


def eval_path(cfg: RunConfig) -> Path:
    return cfg.output_dir / "results" / "eval.csv"


# -- ingest ------------------------------------------------------------------

def _alphabet_json(alpha: CharAlphabet) -> str:
    data = {"threshold": alpha.threshold, "chars": sorted(alpha.chars),
            "counts": {c: alpha.counts[c] for c in sorted(alpha.counts)}}
    return json.dumps(data, ensure_ascii=False, indent=1, sort_keys=True) + "\n"


def load_alphabet(path) -> CharAlphabet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusError(f"cannot read alphabet {path}: {exc}; run `bpec ingest` first") from exc
    return CharAlphabet(frozenset(data["chars"]), data["counts"], data["threshold"])


def ingest(cfg: RunConfig) -> Dict[str, int]:
    """Align both tracks of every language, split, and build per-track alphabets."""
    cfg.validate()
    aligned = {}
    raw_counts = {}
    for variant in ("form", "lemma"):
        files = {lang: read_multitext(cfg.input_path(variant, lang)) for lang in cfg.languages}
        raw_counts[variant] = {lang: len(rows) for lang, rows in files.items()}
        aligned[variant] = align(files)
    common = set(aligned["form"].utterances) & set(aligned["lemma"].utterances)
    if len(common) < 3:
        raise CorpusError(f"only {len(common)} utterances are aligned across all languages and tracks")
    labels = split(common, cfg.split, cfg.seed)

    out = cfg.output_dir / "corpus"
    files: Dict[Path, object] = {out / "manifest.tsv": format_manifest(labels)}
    drops = {(v, lang): raw_counts[v][lang] - len(common) for v in raw_counts for lang in cfg.languages}
    files[out / "drops.tsv"] = "variant\tlang\tdropped\n" + "".join(
        f"{v}\t{lang}\t{n}\n" for (v, lang), n in sorted(drops.items()))
    for variant, corpus in aligned.items():
        for lang in cfg.languages:
            rows = []
            train_texts = []
            for uid in sorted(common):
                text = corpus.utterances[uid][lang].text
                rows.append(f"{uid}\t{labels[uid]}\t{text}\n")
                if labels[uid] == "train":
                    train_texts.append(text)
            files[track_path(cfg, variant, lang)] = "".join(rows)
            alpha = build_alphabet(train_texts, cfg.alphabet_threshold, keep=" ")
            files[alphabet_path(cfg, variant, lang)] = _alphabet_json(alpha)
    write_all(files)
    counts = {s: list(labels.values()).count(s) for s in SPLITS}
    logger.info("ingested %d utterances: %s", len(common), counts)
    return counts


def load_track(cfg: RunConfig, variant: str, lang: str) -> List[Tuple[str, str, List[str]]]:
    path = track_path(cfg, variant, lang)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}; run `bpec ingest` first") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in SPLITS:
            raise CorpusError(f"{path}:{lineno}: malformed corpus line")
        rows.append((parts[0], parts[1], parts[2].split(" ") if parts[2] else []))
    return rows


# -- train -------------------------------------------------------------------

def train(cfg: RunConfig, model_kind: str, variant: str, lang: str) -> Path:
    rows = load_track(cfg, variant, lang)
    alpha = load_alphabet(alphabet_path(cfg, variant, lang))
    portions = {s: [alpha.encode_tokens(toks) for _, lab, toks in rows if lab == s] for s in SPLITS}
    if not portions["train"]:
        raise CorpusError(f"{variant}/{lang}: empty training portion")
    path = model_path(cfg, model_kind, variant, lang)
    log_path = path.with_suffix(".log.tsv")
    if model_kind == "ngram":
        chars = sorted(alpha.chars - {" "})
        vocab, streams = build_vocab(portions["train"], extra_chars=chars)
        model = train_kn(streams, vocab, order=cfg.ngram_order, prune_words=cfg.prune_words)
        per_order: Dict[int, int] = {}
        for ctx, row in model.probs.items():
            per_order[len(ctx) + 1] = per_order.get(len(ctx) + 1, 0) + len(row)
        log = "order\tentries\n" + "".join(f"{k}\t{per_order.get(k, 0)}\n" for k in range(1, model.order + 1))
        write_all({path: format_model(model), log_path: log})
    elif model_kind == "lstm":
        log_rows: List[char_lstm.EpochLog] = []
        model = char_lstm.train(cfg.lstm, [detokenize(t) for t in portions["train"]],
                                [detokenize(t) for t in portions["dev"]], chars=sorted(alpha.chars), log=log_rows)
        log = "epoch\ttrain_bpc\tdev_bpc\n" + "".join(
            f"{e.epoch}\t{e.train_bpc:.6f}\t{e.dev_bpc:.6f}\n" for e in log_rows)
        write_all({path: char_lstm.dumps(model), log_path: log})
    else:
        raise ModelError(f"unknown model kind {model_kind!r}")
    logger.info("trained %s/%s/%s -> %s", model_kind, variant, lang, path)
    return path


# -- eval --------------------------------------------------------------------

def load_scorer(cfg: RunConfig, model_kind: str, variant: str, lang: str):
    path = model_path(cfg, model_kind, variant, lang)
    if not path.is_file():
        raise EvaluationError(f"missing model file {path}; run "
                              f"`bpec train --model {model_kind} --variant {variant} --lang {lang}` first")
    alpha = load_alphabet(alphabet_path(cfg, variant, lang))
    if model_kind == "ngram":
        return NgramScorer(parse_model(path.read_text(encoding="utf-8")), alpha)
    return LstmScorer(char_lstm.load(path), alpha)


def evaluate(cfg: RunConfig, languages: Sequence[str], models: Sequence[str], variants: Sequence[str],
             which: str = "test") -> Path:
    """Score the held-out portion; BPEC always divides by the original English forms."""
    english = {uid: toks for uid, _, toks in load_track(cfg, "form", cfg.reference_lang)}
    records = []
    for lang in languages:
        for variant in variants:
            rows = [(uid, toks) for uid, lab, toks in load_track(cfg, variant, lang) if lab == which]
            for model_kind in models:
                scorer = load_scorer(cfg, model_kind, variant, lang)
                scores = [utterance_bits(scorer, uid, toks, english.get(uid)) for uid, toks in rows]
                records.append(aggregate(scores, lang, model_kind, variant))
    path = eval_path(cfg)
    write_all({path: format_records(records)})
    return path


# -- analyze / report --------------------------------------------------------

def load_mcc(cfg: RunConfig) -> Dict[str, int]:
    if cfg.lexicons:
        return {lang: counting_complexity(read_lexicon(cfg.lexicon_path(lang))) for lang in cfg.languages}
    if cfg.mcc:
        return parse_mcc((cfg.base_dir / cfg.mcc).read_text(encoding="utf-8"))
    raise AnalysisError("no lexicons or MCC table configured")


def _load_cells(cfg: RunConfig) -> List[ResultCell]:
    path = eval_path(cfg)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise AnalysisError(f"cannot read {path}: {exc}; run `bpec eval` first") from exc
    return [ResultCell.from_record(r) for r in parse_records(text)]


def _points(cells, mcc, languages, models):
    missing = [lang for lang in languages if lang not in mcc]
    if missing:
        raise AnalysisError(f"no counting complexity for: {', '.join(missing)}")
    return {m: language_points(cells, mcc, m, languages) for m in models}


def analyze(cfg: Optional[RunConfig] = None, published: bool = False, permutations: int = 100_000,
            seed: int = 0, out_dir: Optional[Path] = None) -> dict:
    """Correlation summary per model, from eval results or the published table."""
    if published:
        mcc, cells, _ = load_published()
        languages, models = sorted(mcc), MODELS
    else:
        mcc = load_mcc(cfg)
        cells = _load_cells(cfg)
        languages, models = list(cfg.languages), cfg.models
        permutations, seed = cfg.permutations, cfg.seed
        out_dir = cfg.output_dir / "results"
    points = _points(cells, mcc, languages, models)
    summary = {m: analyze_points(pts, permutations, seed) for m, pts in points.items()}
    if out_dir is not None:
        write_all({Path(out_dir) / "mcc.csv": format_mcc({k: mcc[k] for k in languages}),
                   Path(out_dir) / "analysis.json": json.dumps(summary, indent=2, sort_keys=True) + "\n"})
    return summary


def make_report(cfg: Optional[RunConfig] = None, published: bool = False, permutations: int = 100_000,
                seed: int = 0, out_dir: Optional[Path] = None) -> Path:
    if published:
        mcc, cells, _ = load_published()
        languages, models = sorted(mcc), MODELS
    else:
        mcc = load_mcc(cfg)
        cells = _load_cells(cfg)
        languages, models = list(cfg.languages), cfg.models
        permutations, seed = cfg.permutations, cfg.seed
        out_dir = cfg.output_dir / "report"
    points = _points(cells, mcc, languages, models)
    wanted = [c for c in cells if c.lang in languages and c.model_kind in models]
    files = render_report(points, wanted, mcc, permutations, seed)
    write_all({Path(out_dir) / name: body for name, body in files.items()})
    return Path(out_dir)
