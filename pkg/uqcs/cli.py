# uqcs/cli.py
"""
Command-line front end.

    uqcs <experiment> (--config FILE | --preset ID) [--seed N] [--out DIR] [--shots N|ideal] [--ssa-...]
    uqcs replay MANIFEST [--out DIR]
    uqcs presets [EXPERIMENT]

Exit status is 0 on success, 2 for config errors and 1 for anything else; a
failed run leaves error.json in its output directory.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .artifacts import ArtifactWriter, sha256_file
from .config import get_preset, load_presets, logger, settings
from .experiments import get_runner, list_experiments
from .schemas import RunConfig

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


class ReplayError(RuntimeError):
    pass


# ============================================================
# Config loading
# ============================================================

def _parse_shots(value: str):
    if value == "ideal":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("shots must be an integer or 'ideal'") from None


def _parse_rank(value: str):
    return value if value == "auto" else int(value)


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config '{path}': {e}") from e


def resolve_config(experiment: str, args: argparse.Namespace) -> RunConfig:
    """Config file or preset, then command-line overrides, validated as a RunConfig."""
    if args.config:
        data = load_config_file(args.config)
    elif args.preset:
        try:
            data = json.loads(json.dumps(get_preset(experiment, args.preset)))
        except ValueError as e:
            raise ConfigError(str(e)) from e
    else:
        raise ConfigError("either --config or --preset is required")

    data["experiment"] = experiment
    noise = data.setdefault("noise", {})
    if args.seed is not None:
        noise["seed"] = args.seed
    if args.shots is not None:
        noise["shots"] = args.shots

    if args.ssa_length is not None or args.ssa_rank is not None or args.ssa_renorm:
        ssa = data.get("ssa") or {}
        if args.ssa_length is not None:
            ssa["embed_length"] = args.ssa_length
        if args.ssa_rank is not None:
            ssa["rank"] = args.ssa_rank
        if args.ssa_renorm:
            ssa["renormalize"] = True
        data["ssa"] = ssa

    if args.write_grid:
        data.setdefault("outputs", {})["write_grid"] = True

    return RunConfig.model_validate(data)


# ============================================================
# Run / replay
# ============================================================

def run(cfg: RunConfig, out_dir: str) -> str:
    """Execute one experiment into out_dir; returns the manifest path."""
    writer = ArtifactWriter(out_dir)
    logger.info("[RUN] experiment=%s seed=%d out=%s", cfg.experiment, cfg.noise.seed, out_dir)
    summary = get_runner(cfg.experiment)(cfg, writer)
    logger.info("[RUN] done experiment=%s summary=%s", cfg.experiment, summary)
    return writer.manifest(__version__, cfg.experiment, cfg.noise.seed, json.loads(cfg.to_json()))


def replay(manifest_path: str, out_dir: Optional[str] = None) -> str:
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read manifest '{manifest_path}': {e}") from e

    if manifest.get("version") != __version__:
        raise ReplayError(f"manifest version {manifest.get('version')} does not match {__version__}")

    cfg = RunConfig.model_validate(manifest["config"])
    out_dir = out_dir or os.path.join(os.path.dirname(os.path.abspath(manifest_path)), "replay")
    logger.info("[REPLAY] %s -> %s", manifest_path, out_dir)
    run(cfg, out_dir)

    mismatched: List[str] = []
    for name, digest in manifest.get("files", {}).items():
        path = os.path.join(out_dir, name)
        if not os.path.exists(path) or sha256_file(path) != digest:
            mismatched.append(name)
    if mismatched:
        raise ReplayError(f"replay differs in {', '.join(sorted(mismatched))}")

    logger.info("[REPLAY] %d files identical", len(manifest.get("files", {})))
    return os.path.join(out_dir, "manifest.json")


def write_error(out_dir: str, exc: BaseException, experiment: str) -> None:
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "error.json"), "w", encoding="utf-8") as f:
            json.dump(
                {"error": type(exc).__name__, "message": str(exc), "experiment": experiment},
                f,
                indent=2,
                sort_keys=True,
            )
            f.write("\n")
    except OSError:
        logger.exception("[RUN] could not write error.json to %s", out_dir)


# ============================================================
# Argument parsing
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uqcs", description="Classical UQCS spectroscopy lab")
    parser.add_argument("--version", action="version", version=f"uqcs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for exp in list_experiments():
        p = sub.add_parser(exp, help=f"run the {exp} experiment")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", help="run configuration (JSON)")
        src.add_argument("--preset", help="named preset from presets.json")
        p.add_argument("--seed", type=int, default=None, help="master seed (u64)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--shots", type=_parse_shots, default=None, help="shots per part, or 'ideal'")
        p.add_argument("--ssa-length", type=int, default=None, dest="ssa_length")
        p.add_argument("--ssa-rank", type=_parse_rank, default=None, dest="ssa_rank")
        p.add_argument("--ssa-renorm", action="store_true", dest="ssa_renorm")
        p.add_argument("--write-grid", action="store_true", dest="write_grid")

    r = sub.add_parser("replay", help="re-run a manifest and verify identical outputs")
    r.add_argument("manifest")
    r.add_argument("--out", default=None)

    ls = sub.add_parser("presets", help="list shipped presets")
    ls.add_argument("experiment", nargs="?", default=None)
    return parser


def _list_presets(experiment: Optional[str]) -> int:
    data = load_presets()
    for exp_id, block in sorted(data.items()):
        if experiment and exp_id != experiment:
            continue
        for p in block.get("presets", []):
            print(f"{exp_id:14s} {p.get('id'):28s} {p.get('name', '')}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "presets":
        return _list_presets(args.experiment)

    if args.command == "replay":
        out_dir = args.out or os.path.join(os.path.dirname(os.path.abspath(args.manifest)), "replay")
        experiment = "replay"
    else:
        out_dir = args.out or os.path.join(settings.OUTPUT_ROOT, args.command)
        experiment = args.command

    try:
        if args.command == "replay":
            replay(args.manifest, out_dir)
        else:
            run(resolve_config(args.command, args), out_dir)
    except (ValidationError, ConfigError) as e:
        logger.error("[RUN] config error: %s", e)
        write_error(out_dir, e, experiment)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("[RUN] %s failed", experiment)
        write_error(out_dir, e, experiment)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
