"""Command-line surface.

    veridebate debate|synthesize|train|predict|evaluate|pipeline|ablate
        --config FILE --dataset FILE --out DIR --seed N
        --backend {mock,remote} --interaction-mode {nodes,pooled} --strict

Every command operates on a run workspace (--out): transcripts, reports,
caches, checkpoints, and result files accumulate there, which makes
reruns cheap and ablation runs side-by-side comparable. Exit code is 0
iff the command completed with zero strict-mode failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .config import PipelineConfig, load_config
from .evaluation import (
    compute_metrics,
    format_ablation_table,
    load_dataset,
    run_ablation,
    write_predictions_jsonl,
)
from .neural import load_model
from .pipeline import Pipeline, StageError

logger = logging.getLogger("veridebate")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file (flags override it)")
    parser.add_argument("--dataset", help="JSONL dataset path")
    parser.add_argument("--out", help="run workspace directory")
    parser.add_argument("--seed", type=int, help="seed for debates, init, and shuffling")
    parser.add_argument("--backend", choices=["mock", "remote"], help="generation backend")
    parser.add_argument(
        "--interaction-mode", choices=["nodes", "pooled"], dest="interaction_mode",
        help="attention key/value source for the debate-news fusion",
    )
    parser.add_argument("--strict", action="store_true", default=None,
                        help="treat per-item failures as fatal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="veridebate")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hint in (
        ("debate", "run debates and write one transcript per item"),
        ("synthesize", "write a judge report per existing transcript"),
        ("train", "train the classifier on the train split"),
        ("predict", "write per-item predictions for the test split"),
        ("evaluate", "score an existing predictions file"),
        ("pipeline", "run all stages end to end"),
        ("ablate", "run component-removal variants and tabulate metrics"),
    ):
        command = sub.add_parser(name, help=hint)
        _add_common(command)
        if name == "ablate":
            command.add_argument(
                "--toggles", default="no_debate,no_synthesis,no_analysis",
                help="comma-separated subset of no_debate,no_synthesis,no_analysis",
            )
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config)
    for key in ("dataset", "out", "seed", "backend", "interaction_mode", "strict"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    config.__post_init__()
    return config


def _workspace(config: PipelineConfig) -> Path:
    if config.out:
        return Path(config.out)
    # Unnamed runs land in a fresh timestamp+seed workspace so repeated
    # experiments never clobber each other.
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return Path("runs") / f"{stamp}-seed{config.seed}"


def _dataset(config: PipelineConfig):
    if not config.dataset:
        raise SystemExit("a dataset is required (--dataset or [paths] dataset)")
    return load_dataset(config.dataset, strict=config.strict, language=config.language)


def cmd_debate(config: PipelineConfig) -> int:
    pipeline = Pipeline(config, _workspace(config))
    dataset = _dataset(config)
    _, report = pipeline.run_debates(dataset)
    print(
        f"debate: {report.processed} generated, {report.skipped} reused, "
        f"{len(report.failures)} failed -> {pipeline.workspace / 'transcripts'}"
    )
    return 1 if (report.failures and config.strict) else 0


def cmd_synthesize(config: PipelineConfig) -> int:
    pipeline = Pipeline(config, _workspace(config))
    dataset = _dataset(config)
    logs, debate_report = pipeline.run_debates(dataset)
    _, report = pipeline.run_synthesis(logs)
    failures = len(debate_report.failures) + len(report.failures)
    print(
        f"synthesize: {report.processed} written, {report.skipped} reused, "
        f"{failures} failed -> {pipeline.workspace / 'reports'}"
    )
    return 1 if (failures and config.strict) else 0


def cmd_train(config: PipelineConfig) -> int:
    pipeline = Pipeline(config, _workspace(config))
    dataset = _dataset(config)
    logs, report = pipeline.run_debates(dataset)
    pipeline._check_stage(report)
    samples = pipeline.build_samples(dataset, logs)
    pipeline.train_model(dataset, samples)
    print(f"train: checkpoint -> {pipeline.workspace / 'checkpoints' / 'model.bin'}")
    return 0


def cmd_predict(config: PipelineConfig) -> int:
    pipeline = Pipeline(config, _workspace(config))
    dataset = _dataset(config)
    checkpoint = pipeline.workspace / "checkpoints" / "model.bin"
    if not checkpoint.exists():
        raise SystemExit(f"no checkpoint at {checkpoint}; run `veridebate train` first")
    model = load_model(checkpoint)
    logs, report = pipeline.run_debates(dataset)
    pipeline._check_stage(report)
    samples = pipeline.build_samples(dataset, logs)
    rows = pipeline.predict_rows(model, dataset, samples)
    out = pipeline.workspace / "predictions.jsonl"
    write_predictions_jsonl(out, rows)
    print(f"predict: {len(rows)} rows -> {out}")
    return 0


def cmd_evaluate(config: PipelineConfig) -> int:
    workspace = _workspace(config)
    predictions_path = workspace / "predictions.jsonl"
    if not predictions_path.exists():
        raise SystemExit(f"no predictions at {predictions_path}; run `veridebate predict`")
    rows = [
        json.loads(line)
        for line in predictions_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    metrics = compute_metrics([r["prediction"] for r in rows], [r["label"] for r in rows])
    (workspace / "metrics.json").write_text(
        json.dumps(metrics.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(metrics.format_table())
    return 0


def cmd_pipeline(config: PipelineConfig) -> int:
    pipeline = Pipeline(config, _workspace(config))
    dataset = _dataset(config)
    metrics = pipeline.run(dataset)
    print(metrics.format_table())
    print(f"pipeline: artifacts -> {pipeline.workspace}")
    return 0


def cmd_ablate(config: PipelineConfig, toggles: str) -> int:
    pipeline = Pipeline(config, _workspace(config))
    dataset = _dataset(config)
    names = tuple(t.strip() for t in toggles.split(",") if t.strip())
    table = run_ablation(names, pipeline, dataset)
    out = pipeline.workspace / "ablation.json"
    out.write_text(
        json.dumps({k: v.to_dict() for k, v in table.items()}, sort_keys=True, indent=2)
        + "\n",
        encoding="utf-8",
    )
    print(format_ablation_table(table))
    print(f"ablate: table -> {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "debate":
            return cmd_debate(config)
        if args.command == "synthesize":
            return cmd_synthesize(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "predict":
            return cmd_predict(config)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        if args.command == "pipeline":
            return cmd_pipeline(config)
        if args.command == "ablate":
            return cmd_ablate(config, args.toggles)
        raise SystemExit(f"unknown command {args.command!r}")
    except StageError as exc:
        logger.error("%s", exc)
        return 1
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
