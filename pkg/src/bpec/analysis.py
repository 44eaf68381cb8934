"""Rank correlation of BPEC with counting complexity, dispersion, regressions and report files."""

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from .errors import AnalysisError
from .evaluation import EvalRecord, delta_bpc_report

MODELS = ("ngram", "lstm")
VARIANTS = ("form", "lemma")


@dataclass(frozen=True)
class ResultCell:
    """One (language, model, variant) entry as it appears in the results table."""
    lang: str
    model_kind: str
    variant: str
    bpec: float
    delta_e2: int

    @classmethod
    def from_record(cls, record: EvalRecord) -> "ResultCell":
        return cls(record.lang, record.model_kind, record.variant, record.bpec, delta_bpc_report(record)[0])

    @property
    def bpc(self) -> float:
        return self.bpec - self.delta_e2 / 100.0

    @property
    def sign_class(self) -> str:
        return "positive" if self.delta_e2 > 0 else "negative" if self.delta_e2 < 0 else "zero"


@dataclass(frozen=True)
class LanguagePoint:
    lang: str
    mcc: int
    bpec_form: float
    bpec_lemma: float
    model_kind: str

    def __post_init__(self):
        if self.bpec_form <= 0 or self.bpec_lemma <= 0:
            raise AnalysisError(f"{self.lang}: BPEC values must be positive")

    @property
    def difference(self) -> float:
        return self.bpec_form - self.bpec_lemma


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p_value: float
    permutations: int


def load_published():
    """The published results table: (mcc by language, result cells, family by language)."""
    text = resources.files("bpec").joinpath("data/published.csv").read_text(encoding="utf-8")
    mcc, cells, family = {}, [], {}
    for row in csv.DictReader(io.StringIO(text)):
        lang = row["lang"]
        mcc[lang] = int(row["mcc"])
        family[lang] = row["family"]
        for model in MODELS:
            for variant in VARIANTS:
                cells.append(ResultCell(lang, model, variant, float(row[f"{model}_{variant}_bpec"]),
                                        int(row[f"{model}_{variant}_delta"])))
    return mcc, cells, family


def _centred_unit(v: np.ndarray) -> np.ndarray:
    v = v - v.mean()
    return v / np.linalg.norm(v)


def spearman(x: Sequence[float], y: Sequence[float], permutations: int = 100_000, seed: int = 0,
             alternative: str = "two-sided") -> SpearmanResult:
    """Spearman's rho with average ranks, and a seeded permutation p-value.

    The p-value is (k + 1) / (N + 1), where k counts shuffles of y whose
    statistic is at least as extreme as the observed one.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("spearman needs two 1-d sequences of equal length")
    if len(x) < 3:
        raise AnalysisError("spearman needs at least 3 pairs")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise AnalysisError("spearman is undefined for a constant input")
    if alternative not in ("two-sided", "greater", "less"):
        raise AnalysisError(f"unknown alternative {alternative!r}")

    a = _centred_unit(rankdata(x))
    b = _centred_unit(rankdata(y))
    rho = float(np.clip(a @ b, -1.0, 1.0))

    rng = np.random.default_rng(seed)
    tol = 1e-12
    extreme = 0
    done = 0
    while done < permutations:
        m = min(20_000, permutations - done)
        r = rng.permuted(np.tile(b, (m, 1)), axis=1) @ a
        if alternative == "two-sided":
            extreme += int(np.sum(np.abs(r) >= abs(rho) - tol))
        elif alternative == "greater":
            extreme += int(np.sum(r >= rho - tol))
        else:
            extreme += int(np.sum(r <= rho + tol))
        done += m
    return SpearmanResult(rho, (extreme + 1) / (permutations + 1), permutations)


def dispersion(values: Sequence[float]) -> float:
    """Sample standard deviation."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise AnalysisError("dispersion needs at least two values")
    return float(np.std(values, ddof=1))


def linreg(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """Ordinary least squares: (slope, intercept, Pearson r)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or len(x) != len(y):
        raise AnalysisError("linreg needs two equal-length sequences of at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    if sxx == 0:
        raise AnalysisError("linreg is undefined for constant x")
    slope = (dx @ dy) / sxx
    syy = dy @ dy
    r = (dx @ dy) / math.sqrt(sxx * syy) if syy > 0 else 0.0
    return float(slope), float(y.mean() - slope * x.mean()), float(r)


def language_points(cells: Iterable[ResultCell], mcc: Mapping[str, int], model_kind: str,
                    languages: Sequence[str] = None) -> List[LanguagePoint]:
    table = {(c.lang, c.variant): c for c in cells if c.model_kind == model_kind}
    if languages is None:
        languages = sorted({lang for lang, _ in table})
    missing_mcc = [lang for lang in languages if lang not in mcc]
    if missing_mcc:
        raise AnalysisError(f"no counting complexity for: {', '.join(missing_mcc)}")
    missing = [(lang, model_kind, v) for lang in languages for v in VARIANTS if (lang, v) not in table]
    if missing:
        raise AnalysisError("missing results for " + ", ".join("/".join(m) for m in missing))
    return [LanguagePoint(lang, mcc[lang], table[lang, "form"].bpec, table[lang, "lemma"].bpec, model_kind)
            for lang in languages]


def analyze(points: Sequence[LanguagePoint], permutations: int = 100_000, seed: int = 0) -> dict:
    """Correlation, dispersion and regression summary for one model's language points."""
    mcc = [p.mcc for p in points]
    summary = {"languages": [p.lang for p in points]}
    for name, ys in (("form", [p.bpec_form for p in points]),
                     ("lemma", [p.bpec_lemma for p in points]),
                     ("difference", [p.difference for p in points])):
        if len(set(ys)) > 1:
            sp = spearman(mcc, ys, permutations, seed)
            rho, p = sp.rho, sp.p_value
        else:
            rho = p = None  # rank correlation undefined for a constant column
        slope, intercept, r = linreg(mcc, ys)
        summary[name] = {
            "spearman_rho": rho,
            "p_value": p,
            "std": dispersion(ys),
            "slope": slope,
            "intercept": intercept,
            "pearson_r": r,
        }
    summary["permutations"] = permutations
    summary["seed"] = seed
    return summary


# -- report rendering --------------------------------------------------------

def _cell_text(cell: ResultCell) -> str:
    return f"{cell.bpec:.2f}/{cell.delta_e2:+d}" if cell.delta_e2 else f"{cell.bpec:.2f}/0"


def render_table(cells: Iterable[ResultCell], mcc: Mapping[str, int], languages=None,
                 models: Sequence[str] = MODELS) -> str:
    """Fixed-width results table: BPEC / ΔBPC (hundredths of a bit) per model and variant."""
    table = {(c.lang, c.model_kind, c.variant): c for c in cells}
    if languages is None:
        languages = sorted({c.lang for c in table.values()})
    columns = [(m, v) for m in models for v in VARIANTS]
    missing = [(lang, m, v) for lang in languages for m, v in columns if (lang, m, v) not in table]
    if missing:
        raise AnalysisError("missing results for " + ", ".join("/".join(x) for x in missing))
    lines = ["BPEC / dBPC (e-2); dBPC > 0 when BPEC > BPC",
             f"{'lang':<6}{'MCC':>5}  " + "  ".join(f"{m + '_' + v:>12}" for m, v in columns)]
    for lang in languages:
        texts = [_cell_text(table[lang, m, v]) for m, v in columns]
        lines.append(f"{lang:<6}{mcc.get(lang, ''):>5}  " + "  ".join(f"{t:>12}" for t in texts))
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> Dict[Tuple[str, str, str], Tuple[float, int]]:
    """Inverse of :func:`render_table` for the numeric cells."""
    lines = text.splitlines()
    columns = [tuple(h.split("_")) for h in lines[1].split()[2:]]
    out = {}
    for line in lines[2:]:
        fields = line.split()
        for (m, v), cell in zip(columns, fields[2:]):
            bpec, delta = cell.split("/")
            out[fields[0], m, v] = (float(bpec), int(delta))
    return out


def _csv(rows, header) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def report(points_by_model: Mapping[str, Sequence[LanguagePoint]], cells: Iterable[ResultCell],
           mcc: Mapping[str, int], permutations: int = 100_000, seed: int = 0) -> Dict[str, str]:
    """All report artifacts as {file name: content}."""
    cells = list(cells)
    languages = sorted({p.lang for pts in points_by_model.values() for p in pts})
    files = {"table.txt": render_table(cells, mcc, languages, [m for m in MODELS if m in points_by_model])}
    files["sign_classes.csv"] = _csv(
        [(c.lang, c.model_kind, c.variant, f"{c.bpec:.6f}", c.delta_e2, c.sign_class)
         for c in sorted(cells, key=lambda c: (c.lang, c.model_kind, c.variant))],
        ["lang", "model", "variant", "bpec", "delta_bpc_e2", "sign_class"])

    summaries = {m: analyze(pts, permutations, seed) for m, pts in points_by_model.items()}
    files["analysis.json"] = json.dumps(summaries, indent=2, sort_keys=True) + "\n"

    for fig, attr in (("scatter_forms", "bpec_form"), ("scatter_lemmata", "bpec_lemma"),
                      ("scatter_difference", "difference")):
        rows = []
        for m, pts in sorted(points_by_model.items()):
            for p in pts:
                rows.append((p.lang, m, p.mcc, f"{getattr(p, attr):.6f}"))
        files[f"{fig}.csv"] = _csv(rows, ["lang", "model", "mcc", "bpec"])

    reg_rows = []
    for m, summary in sorted(summaries.items()):
        for fig, key in (("scatter_forms", "form"), ("scatter_lemmata", "lemma"), ("scatter_difference", "difference")):
            s = summary[key]
            rho, p = ("" if v is None else f"{v:.9f}" for v in (s["spearman_rho"], s["p_value"]))
            reg_rows.append((fig, m, f"{s['slope']:.9f}", f"{s['intercept']:.9f}", f"{s['pearson_r']:.9f}",
                             rho, p))
    files["regression.csv"] = _csv(reg_rows, ["figure", "model", "slope", "intercept", "pearson_r",
                                              "spearman_rho", "p_value"])

    diag = []
    for m, pts in sorted(points_by_model.items()):
        for p in pts:
            diag.append((p.lang, m, p.mcc, f"{p.bpec_form:.6f}", f"{p.bpec_lemma:.6f}",
                         "yes" if p.bpec_lemma <= p.bpec_form else "no"))
    files["forms_vs_lemmata.csv"] = _csv(diag, ["lang", "model", "mcc", "bpec_form", "bpec_lemma",
                                                     "below_diagonal"])
    return files
