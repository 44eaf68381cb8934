"""YAML run configuration.

Relative paths are resolved against the directory holding the config
file, and ``{lang}`` in an input template is replaced per language.
Example::

    languages: [en, de, fi]
    reference_lang: en
    inputs:
      forms: data/forms/{lang}.tsv
      lemmas: data/lemmas/{lang}.tsv
      lexicons: data/lexicons/{lang}.tsv   # or mcc: table.csv
    seed: 0
    split: [0.8, 0.1, 0.1]
    alphabet_threshold: 100
    ngram: {order: 7, prune_words: 4}
    lstm: {embed_dim: 64, hidden_dim: 64, layers: 2, max_epochs: 100, clip: 5.0}
    models: [ngram, lstm]
    variants: [form, lemma]
    permutations: 100000
    output_dir: out
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import yaml

from .char_lstm import LstmConfig
from .errors import BpecError, ConfigError

MODEL_KINDS = ("ngram", "lstm")
VARIANTS = ("form", "lemma")

# Desk-scale defaults. Full-scale runs use alphabet_threshold 100 and
# 1024-unit LSTM layers trained for up to 100 epochs.
DESK_LSTM = {"embed_dim": 32, "hidden_dim": 32, "layers": 2, "max_epochs": 10, "patience": 3}


@dataclass(frozen=True)
class RunConfig:
    languages: Tuple[str, ...]
    forms: str
    lemmas: str
    output_dir: Path
    base_dir: Path
    reference_lang: str = "en"
    lexicons: Optional[str] = None
    mcc: Optional[str] = None
    seed: int = 0
    split: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    alphabet_threshold: int = 100
    ngram_order: int = 7
    prune_words: int = 4
    lstm: LstmConfig = field(default_factory=lambda: LstmConfig(**DESK_LSTM))
    models: Tuple[str, ...] = MODEL_KINDS
    variants: Tuple[str, ...] = VARIANTS
    permutations: int = 100_000

    def input_path(self, variant: str, lang: str) -> Path:
        template = self.forms if variant == "form" else self.lemmas
        return self.base_dir / template.format(lang=lang)

    def lexicon_path(self, lang: str) -> Path:
        return self.base_dir / self.lexicons.format(lang=lang)

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, seed=seed, lstm=dataclasses.replace(self.lstm, seed=seed))

    def validate(self) -> None:
        if not self.languages:
            raise ConfigError("no languages configured")
        if len(set(self.languages)) != len(self.languages):
            raise ConfigError("duplicate language codes")
        if self.reference_lang not in self.languages:
            raise ConfigError(f"reference language {self.reference_lang!r} is not in languages")
        if len(self.split) != 3 or any(r <= 0 for r in self.split) or abs(sum(self.split) - 1) > 1e-9:
            raise ConfigError(f"split ratios must be three positive numbers summing to 1, got {self.split}")
        if self.alphabet_threshold < 1:
            raise ConfigError("alphabet_threshold must be >= 1")
        if not 1 <= self.ngram_order <= 7 or self.prune_words < 1:
            raise ConfigError("ngram order must be in 1..7 and prune_words >= 1")
        for m in self.models:
            if m not in MODEL_KINDS:
                raise ConfigError(f"unknown model kind {m!r}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        missing = [str(self.input_path(v, lang)) for v in VARIANTS for lang in self.languages
                   if not self.input_path(v, lang).is_file()]
        if self.lexicons:
            missing += [str(self.lexicon_path(lang)) for lang in self.languages
                        if not self.lexicon_path(lang).is_file()]
        if self.mcc and not (self.base_dir / self.mcc).is_file():
            missing.append(str(self.base_dir / self.mcc))
        if missing:
            raise ConfigError("missing input files: " + ", ".join(missing))


_KNOWN = {"languages", "reference_lang", "inputs", "seed", "split", "alphabet_threshold", "ngram", "lstm",
          "models", "variants", "permutations", "output_dir"}


def parse_config(data: dict, base_dir) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        inputs: Dict[str, str] = data["inputs"]
        seed = int(data.get("seed", 0))
        lstm_opts = {**DESK_LSTM, **data.get("lstm", {}), "seed": seed}
        ngram = data.get("ngram", {})
        cfg = RunConfig(
            languages=tuple(data["languages"]),
            forms=inputs["forms"],
            lemmas=inputs["lemmas"],
            lexicons=inputs.get("lexicons"),
            mcc=inputs.get("mcc"),
            output_dir=Path(base_dir) / data.get("output_dir", "out"),
            base_dir=Path(base_dir),
            reference_lang=data.get("reference_lang", "en"),
            seed=seed,
            split=tuple(float(r) for r in data.get("split", (0.8, 0.1, 0.1))),
            alphabet_threshold=int(data.get("alphabet_threshold", 100)),
            ngram_order=int(ngram.get("order", 7)),
            prune_words=int(ngram.get("prune_words", 4)),
            lstm=LstmConfig(**lstm_opts),
            models=tuple(data.get("models", MODEL_KINDS)),
            variants=tuple(data.get("variants", VARIANTS)),
            permutations=int(data.get("permutations", 100_000)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from None
    except BpecError as exc:
        raise ConfigError(str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from None
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(data, path.resolve().parent)
