# app.py
from __future__ import annotations
import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from operation.logging.logging_config import get_logger, setup_logging
from utils.errors import ConfigError, DataError, InvalidConfig, MgrnError
from utils.evaluation.backtest import backtest, write_backtest_report
from utils.evaluation.config import DEFAULT_BACKTEST_Q, parse_q_list
from utils.evaluation.metrics import read_predictions
from utils.model.gradcheck_suite import SIZE_PRESETS, run_gradcheck_suite
from utils.news.synth import SynthConfig, synth_generate
from utils.pipeline.config import RUN_FILES, VARIANTS, load_run_config
from utils.pipeline.pipeline_manager import PipelineManager

logger = get_logger("app")


class CliParser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit code 1)."""

    def error(self, message):
        raise InvalidConfig(message)


def _csv_list(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def _int_list(text: Optional[str]) -> Optional[List[int]]:
    parts = _csv_list(text)
    if parts is None:
        return None
    try:
        return [int(p) for p in parts]
    except ValueError as e:
        raise InvalidConfig(f"Expected a comma-separated list of integers, got {text!r}") from e


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Run-config fields set on the command line."""
    return {
        "seed": getattr(args, "seed", None),
        "output_dir": getattr(args, "out", None),
        "graphs": _csv_list(getattr(args, "graphs", None)),
        "sector_level": getattr(args, "sector_level", None),
        "q_list": parse_q_list(args.q) if getattr(args, "q", None) else None,
        "model.epochs": getattr(args, "epochs", None),
    }


def _print_json(payload: Any):
    print(json.dumps(payload, indent=2))


# ---------------------------
# Subcommands
# ---------------------------

def cmd_synth(args: argparse.Namespace) -> int:
    cfg = SynthConfig.from_json(args.config)
    bundle = synth_generate(cfg, args.out, seed=args.seed)
    _print_json({"out_dir": str(bundle.out_dir), "splits": bundle.splits,
                 "run_config": str(bundle.files["run_config"])})
    return 0


def cmd_build_graphs(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    manager = PipelineManager(cfg)
    written = manager.export_graphs()
    _print_json({"run_dir": str(manager.run_dir), "graphs": [str(p) for p in written]})
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    manager = PipelineManager(cfg, log_to_file=True)
    manifest = manager.run()
    _print_json({"run_dir": str(manager.run_dir), "baseline": manifest.baseline,
                 "accuracy": manifest.metrics.get("accuracy", {})})
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    checkpoint = Path(args.checkpoint)
    config_path = args.config
    if config_path is None:
        config_path = checkpoint.parent / RUN_FILES["manifest"]
        if not config_path.exists():
            raise InvalidConfig(f"No --config given and no {RUN_FILES['manifest']} next to {checkpoint}")
    overrides = _overrides(args)
    cfg = load_run_config(config_path, overrides)
    manager = PipelineManager(cfg, log_to_file=True)
    manifest = manager.evaluate_checkpoint(checkpoint, overrides["q_list"])
    _print_json({"run_dir": str(manager.run_dir), "accuracy": manifest.metrics.get("accuracy", {})})
    return 0


def cmd_backtest(args: argparse.Namespace) -> int:
    qs = parse_q_list(args.q)
    if len(qs) != 1:
        raise InvalidConfig(f"backtest takes a single q, got {args.q!r}")
    preds = read_predictions(args.predictions)
    report = backtest(preds, qs[0])
    if args.out:
        write_backtest_report(args.out, report)
    _print_json(report.summary())
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    reports = run_gradcheck_suite(size=args.size, n_cases=args.cases, seed=args.seed)
    _print_json({r.label: {"max_error": r.max_error, "passed": r.passed} for r in reports})
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    manager = PipelineManager(cfg, log_to_file=True)
    tables = manager.compare(_csv_list(args.variants), _int_list(args.sector_levels))
    _print_json({"run_dir": str(manager.run_dir),
                 **{key: frame.to_dict(orient="records") for key, frame in tables.items()}})
    return 0


# ---------------------------
# Parser
# ---------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="mgrn", description="Multi-graph recurrent network stock-movement pipeline")
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL (default INFO)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("synth", help="Write a planted-signal synthetic bundle")
    p.add_argument("--config", required=True, help="SynthConfig JSON")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    def run_options(p: argparse.ArgumentParser):
        p.add_argument("--config", required=True, help="Run config JSON (or a run manifest)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="Output directory for run directories")
        p.add_argument("--graphs", default=None, help="Comma-separated graph names")
        p.add_argument("--sector-level", type=int, default=None, choices=[1, 2, 3, 4])
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--q", default=None, help="Comma-separated q list")

    p = sub.add_parser("build-graphs", help="Build and export the configured graphs")
    run_options(p)
    p.set_defaults(func=cmd_build_graphs)

    p = sub.add_parser("train", help="Run the full pipeline")
    run_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Evaluate a checkpoint on the test split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config", default=None, help="Run config (default: the manifest next to the checkpoint)")
    p.add_argument("--q", default=None, help="Comma-separated q list")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("backtest", help="Long/short simulation from a predictions CSV")
    p.add_argument("--predictions", required=True)
    p.add_argument("--q", default=str(DEFAULT_BACKTEST_Q))
    p.add_argument("--out", default=None, help="Backtest report JSON")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("gradcheck", help="Finite-difference gradient suite")
    p.add_argument("--size", default="tiny", choices=sorted(SIZE_PRESETS))
    p.add_argument("--cases", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("compare", help="Train every model variant and tabulate results")
    run_options(p)
    p.add_argument("--variants", default=None, help=f"Comma-separated subset of {','.join(VARIANTS)}")
    p.add_argument("--sector-levels", default=None, help="Comma-separated GICS levels for the sector sweep")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        setup_logging(level=os.getenv("LOG_LEVEL", "INFO"))
        logger.error(f"Usage error: {e}")
        return e.exit_code

    setup_logging(level=args.log_level or os.getenv("LOG_LEVEL", "INFO"), log_file=os.getenv("LOG_FILE"), force=True)
    try:
        return args.func(args)
    except MgrnError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
