"""Command line entry point: ``bpec {ingest,train,eval,analyze,report,synth}``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline, synthetic
from .config import MODEL_KINDS, VARIANTS, load_config
from .errors import BpecError, ConfigError

logger = logging.getLogger("bpec")


def _config(args):
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _selection(args, cfg):
    langs = [args.lang] if args.lang else list(cfg.languages)
    unknown = [lang for lang in langs if lang not in cfg.languages]
    if unknown:
        raise ConfigError(f"language {unknown[0]!r} is not configured")
    models = [args.model] if args.model else list(cfg.models)
    variants = [args.variant] if args.variant else list(cfg.variants)
    return langs, models, variants


def cmd_ingest(args):
    cfg = _config(args)
    counts = pipeline.ingest(cfg)
    print(" ".join(f"{k}={v}" for k, v in counts.items()))


def cmd_train(args):
    cfg = _config(args)
    langs, models, variants = _selection(args, cfg)
    for model in models:
        for variant in variants:
            for lang in langs:
                print(pipeline.train(cfg, model, variant, lang))


def cmd_eval(args):
    cfg = _config(args)
    langs, models, variants = _selection(args, cfg)
    path = pipeline.evaluate(cfg, langs, models, variants)
    sys.stdout.write(path.read_text(encoding="utf-8"))


def _summary_lines(summary):
    for model, s in sorted(summary.items()):
        for key in ("form", "lemma", "difference"):
            row = s[key]
            stats = ("rho=n/a" if row["spearman_rho"] is None
                     else f"rho={row['spearman_rho']:+.4f}  p={row['p_value']:.5f}")
            yield f"{model:<6}{key:<11}{stats}  std={row['std']:.4f}  slope={row['slope']:+.6f}"


def cmd_analyze(args):
    if args.published:
        summary = pipeline.analyze(published=True, permutations=args.permutations,
                                   seed=args.seed or 0, out_dir=args.out)
    else:
        summary = pipeline.analyze(_config(args))
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print("\n".join(_summary_lines(summary)))


def cmd_report(args):
    if args.published:
        if not args.out:
            raise ConfigError("--out is required with --published")
        out = pipeline.make_report(published=True, permutations=args.permutations, seed=args.seed or 0,
                                   out_dir=args.out)
    else:
        out = pipeline.make_report(_config(args))
    print(out)


def cmd_synth(args):
    data = synthetic.generate(n_utterances=args.utterances, inflections=args.inflections, seed=args.seed or 0)
    synthetic.write(data, args.out)
    print(args.out)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run configuration")
    common.add_argument("--seed", type=int, default=None, help="override the configured seed")
    common.add_argument("-v", "--verbose", action="store_true")

    select = argparse.ArgumentParser(add_help=False)
    select.add_argument("--lang")
    select.add_argument("--model", choices=MODEL_KINDS)
    select.add_argument("--variant", choices=VARIANTS)

    fixture = argparse.ArgumentParser(add_help=False)
    fixture.add_argument("--published", action="store_true", help="use the bundled published results table")
    fixture.add_argument("--permutations", type=int, default=100_000)
    fixture.add_argument("--out", type=Path, help="output directory (with --published)")

    parser = argparse.ArgumentParser(prog="bpec", description="Cross-linguistic BPEC language-model comparison")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="align, split, build alphabets").set_defaults(func=cmd_ingest)
    sub.add_parser("train", parents=[common, select], help="train models").set_defaults(func=cmd_train)
    sub.add_parser("eval", parents=[common, select], help="score the test portion").set_defaults(func=cmd_eval)
    p = sub.add_parser("analyze", parents=[common, fixture], help="correlate BPEC with counting complexity")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)
    sub.add_parser("report", parents=[common, fixture], help="write table and plot data").set_defaults(
        func=cmd_report)
    p = sub.add_parser("synth", parents=[common], help="generate a synthetic inflection dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--utterances", type=int, default=400)
    p.add_argument("--inflections", type=int, nargs="+", default=[2, 4])
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except BpecError as exc:
        print(f"bpec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
