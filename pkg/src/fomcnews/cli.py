"""Batch command-line interface.

Subcommands run individual stages against the shared file formats; ``run``
executes the whole pipeline. Exit codes: 0 success, 2 config error, 3 data
error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import pipeline, synth
from .dataset import ShockName, Window
from .errors import ConfigError, DataError, NumericError


def _add_common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", required=config_required,
                   help="path to a JSON pipeline config")
    p.add_argument("--out", help="output directory override")
    p.add_argument("--seed", type=int, help="seed override")
    p.add_argument("--jobs", type=int, help="worker count override")
    p.add_argument("--shock", choices=[s.value for s in ShockName],
                   help="shock selection override")
    p.add_argument("--subsample", choices=[w.value for w in Window],
                   help="subsample override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fomcnews",
        description="Decompose FOMC announcement surprises into news and "
                    "monetary components")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
            ("run", "full pipeline: decompose, channels, event study, VAR"),
            ("ingest-check", "validate input files and report the aligned sample"),
            ("decompose", "stage 2-3 grid search and surprise decomposition"),
            ("channels", "per-target expectation-gap projection"),
            ("event-study", "daily-rate responses to the components"),
            ("bvar", "monthly VAR impulse responses to the monetary component"),
            ("report", "render a text report from existing artifacts")]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p, config_required=(name != "report"))

    p = sub.add_parser("synth", help="write a synthetic dataset and config")
    p.add_argument("--preset", choices=["recovery", "null", "channels"],
                   default="recovery")
    p.add_argument("--out", required=True, help="directory for the dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--meetings", type=int, default=106)
    return parser


def _load_config(args) -> pipeline.PipelineConfig:
    config = pipeline.PipelineConfig.from_json_file(args.config)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    elif "FOMCNEWS_OUT" in os.environ:
        overrides["out_dir"] = os.environ["FOMCNEWS_OUT"]
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.shock is not None:
        overrides["shock"] = ShockName(args.shock)
    if args.subsample is not None:
        overrides["subsample"] = Window(args.subsample)
    return dataclasses.replace(config, **overrides) if overrides else config


SYNTH_PRESETS = {
    "recovery": dict(theta=0.5, noise_nu=0.5, noise_fomc=0.05, noise_nyt=0.05),
    "null": dict(theta=0.0, noise_nu=0.5, noise_fomc=0.05, noise_nyt=0.05),
    "channels": dict(theta_channels=(0.4, -0.3), noise_nu=0.5,
                     noise_fomc=0.05, noise_nyt=0.05),
}


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(T=args.meetings, seed=args.seed,
                            **SYNTH_PRESETS[args.preset])
    ds = synth.generate(cfg)
    paths = synth.write_dataset(ds, args.out)
    synth.write_ground_truth(ds, os.path.join(args.out, "ground_truth.json"))
    run_config = pipeline.PipelineConfig(
        embeddings_fomc=paths["embeddings"], embeddings_nyt=paths["embeddings"],
        targets=paths["targets"], shocks=paths["shocks"],
        outcomes=paths["outcomes"], monthly=paths["monthly"],
        shock=cfg.shock_name, seed=args.seed,
        out_dir=os.path.join(args.out, "out"))
    config_path = os.path.join(args.out, "config.json")
    with open(config_path, "w") as fh:
        fh.write(run_config.to_json())
    print(f"synthetic dataset ({args.preset}) written to {args.out}")
    print(f"pipeline config: {config_path}")
    return 0


def cmd_ingest_check(config: pipeline.PipelineConfig) -> int:
    pipeline.validate_files(config, ("embeddings_fomc", "embeddings_nyt",
                                     "targets", "shocks"))
    sample = pipeline.load_analysis_sample(config)
    print(f"aligned sample: {sample.n_meetings} meetings "
          f"({sample.keys[0]} .. {sample.keys[-1]})")
    print(f"shock: {sample.shock_name.value}")
    reasons = sample.drop_report.reasons()
    if reasons:
        print("dropped keys by reason:")
        for reason, count in sorted(reasons.items()):
            print(f"  {reason}: {count}")
    else:
        print("no keys dropped")
    if config.outcomes and os.path.exists(config.outcomes):
        from .dataset import load_outcomes

        panel = load_outcomes(config.outcomes)
        print("outcomes:")
        for name in panel.names():
            present = sum(1 for k in sample.keys if k in panel.columns[name])
            print(f"  {name}: {present}/{sample.n_meetings} meetings present")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "report":
            if args.config:
                out_dir = _load_config(args).out_dir
            elif args.out:
                out_dir = args.out
            else:
                raise ConfigError("report needs --config or --out")
            print(pipeline.write_report(out_dir))
            return 0

        config = _load_config(args)
        if args.command == "ingest-check":
            return cmd_ingest_check(config)
        if args.command == "run":
            manifest = pipeline.run(config)
            print(f"wrote {len(manifest['artifacts'])} artifacts to "
                  f"{config.out_dir}")
            return 0
        stage = {"decompose": pipeline.stage_decompose,
                 "channels": pipeline.stage_channels,
                 "event-study": pipeline.stage_event_study,
                 "bvar": pipeline.stage_bvar}[args.command]
        meta = stage(config)
        for k, v in meta.items():
            print(f"{k}: {v}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
