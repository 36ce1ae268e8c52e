#!/usr/bin/env python3
"""
CoSTA aluminum-cell experiment - Main entry point
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from config import get_config
from src.pipeline import ExperimentConfig, cmd_all, cmd_eval, cmd_gen_data, cmd_report, cmd_train, cmd_train_all
from src.utils import setup_logging, get_logger
from src.utils.exceptions import ConfigurationError, CostaError


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to a JSON or YAML configuration file")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--steps", type=int, help="Steps per trajectory")
    common.add_argument("--dt", type=float, help="Time step in seconds")
    common.add_argument("--lambda", dest="l1_lambda", type=float,
                        help="L1 strength of the sparse model types")
    common.add_argument("--epochs", type=int, help="Training epochs of every model type")
    common.add_argument("--instances", type=int, help="Trained instances per model type")
    common.add_argument("--horizons", type=str, help="Comma-separated forecast horizons in steps")
    common.add_argument("--n-train", dest="n_train", type=int, help="Number of training trajectories")
    common.add_argument("--n-test", dest="n_test", type=int, help="Number of test trajectories")
    common.add_argument("--workers", type=int, help="Parallel workers (1 = serial)")
    common.add_argument("--out", type=str, help="Output directory")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Corrective source term experiment on a simulated aluminum electrolysis cell"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()

    subparsers.add_parser("gen-data", parents=[common], help="Simulate trajectories and build datasets")
    train_parser = subparsers.add_parser("train", parents=[common], help="Train model instances")
    train_parser.add_argument("--model-type", dest="model_type", type=str,
                              help="Train only this model type (default: all)")
    train_parser.add_argument("--instance", type=int,
                              help="Train only this instance index (requires --model-type)")
    subparsers.add_parser("eval", parents=[common], help="Rolling-forecast evaluation")
    subparsers.add_parser("report", parents=[common], help="Emit plot-ready data files")
    subparsers.add_parser("all", parents=[common], help="gen-data, train, eval and report")
    return parser


def parse_horizons(text: str) -> List[int]:
    """Comma-separated horizons in steps, e.g. ``1000,3000,5000``."""
    try:
        return [int(h) for h in text.split(",") if h.strip()]
    except ValueError as e:
        raise ConfigurationError(f"--horizons expects comma-separated integers, got {text!r}") from e


def apply_overrides(config: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """Write command-line flags into the merged configuration dict."""
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out is not None:
        config["paths"]["out_dir"] = args.out
    if args.dt is not None:
        config["simulation"]["dt"] = args.dt
    if args.n_train is not None:
        config["datagen"]["n_train"] = args.n_train
    if args.n_test is not None:
        config["datagen"]["n_test"] = args.n_test
    if args.instances is not None:
        config["training"]["instances"] = args.instances
    if args.workers is not None:
        config["processing"]["num_workers"] = args.workers

    for section in config["training"]["model_types"].values():
        if args.epochs is not None:
            section["epochs"] = args.epochs
        if args.l1_lambda is not None and section.get("l1_lambda", 0.0) > 0:
            section["l1_lambda"] = args.l1_lambda

    evaluation = config["evaluation"]
    if args.horizons is not None:
        evaluation["horizons"] = parse_horizons(args.horizons)
    if args.steps is not None:
        config["simulation"]["steps"] = args.steps
        if args.horizons is None:
            evaluation["horizons"] = [h for h in evaluation["horizons"] if h <= args.steps] or [args.steps]
    n_test = config["datagen"]["n_test"]
    if evaluation.get("band_trajectory") is not None and evaluation["band_trajectory"] >= n_test:
        evaluation["band_trajectory"] = 0
    return config


def run(args: argparse.Namespace) -> Dict[str, Any]:
    cfg = ExperimentConfig.from_dict(apply_overrides(get_config(args.config), args))
    logging_cfg = cfg.logging.model_dump()
    logging_cfg["log_dir"] = logging_cfg["log_dir"] or cfg.paths.logs_dir or "logs"
    setup_logging(**logging_cfg)
    logger = get_logger(__name__)
    logger.info(f"Running {args.command} with seed {cfg.seed} into {cfg.paths.out_dir}")

    if args.command == "gen-data":
        return cmd_gen_data(cfg)
    if args.command == "train":
        if args.instance is not None:
            if args.model_type is None:
                raise ConfigurationError("--instance requires --model-type")
            return {"models": [str(cmd_train(cfg, args.model_type, args.instance))]}
        if args.model_type is not None:
            return {"models": [
                str(cmd_train(cfg, args.model_type, i)) for i in range(cfg.training.instances)
            ]}
        return {"models": [str(p) for p in cmd_train_all(cfg)]}
    if args.command == "eval":
        return {k: str(v) for k, v in cmd_eval(cfg).items()}
    if args.command == "report":
        return {k: str(v) for k, v in cmd_report(cfg).items()}
    return cmd_all(cfg)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        summary = run(args)
    except CostaError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1
    print(json.dumps(summary, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
