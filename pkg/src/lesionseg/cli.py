"""Command-line interface: ``segment``, ``evaluate`` and ``generate``.

Exit codes: 0 success, 1 no lesion candidate found (``segment`` only),
2 I/O or argument errors. Diagnostics go to standard error; standard output
carries only the ``evaluate`` summary line and ``--dump-config`` output.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

from .config import CONFIG_ENV_VAR, ConfigError, PipelineConfig, parse_assignments
from .errors import NoLesionError
from .evaluation import (
    METHODS, EvaluationError, evaluate_batch, render_overlay, segment, write_report,
)
from .imgcore import ImageError, load_image, load_mask, save_image, save_mask
from .synthetic import DEFAULT_SIZE, generate_suite

__all__ = ["PipelineConfig", "main", "build_parser"]

EXIT_OK = 0
EXIT_NO_LESION = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path,
                        help=f"key = value config file (default: ${CONFIG_ENV_VAR} if set)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config value; repeatable")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the effective configuration and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lesionseg",
                                     description="Classical skin-lesion segmentation and IoU evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image")
    seg.add_argument("--method", choices=METHODS, default="watershed")
    seg.add_argument("--in", dest="input", type=Path)
    seg.add_argument("--out", type=Path)
    seg.add_argument("--overlay", type=Path, help="also write a boundary overlay image")
    seg.add_argument("--truth", type=Path, help="ground-truth mask drawn on the overlay")
    _add_config_options(seg)

    ev = sub.add_parser("evaluate", help="segment and score a directory of images")
    ev.add_argument("--method", choices=METHODS, default="watershed")
    ev.add_argument("--images", type=Path)
    ev.add_argument("--truth", type=Path)
    ev.add_argument("--report", type=Path)
    ev.add_argument("--jobs", type=int, default=1)
    ev.add_argument("--timings", action="store_true",
                    help="fill the runtime_ms column (makes the CSV run-dependent)")
    _add_config_options(ev)

    gen = sub.add_parser("generate", help="write synthetic lesion images with ground truth")
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--hair", action="store_true")
    gen.add_argument("--vignette", action="store_true")
    gen.add_argument("--size", type=int, default=DEFAULT_SIZE)
    return parser


def load_config(path: Optional[Path], overrides: List[str]) -> PipelineConfig:
    if path is None and os.environ.get(CONFIG_ENV_VAR):
        path = Path(os.environ[CONFIG_ENV_VAR])
    try:
        cfg = PipelineConfig.from_file(path) if path is not None else PipelineConfig()
        return cfg.with_overrides(parse_assignments(overrides))
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except (ConfigError, TypeError) as exc:
        raise CliError(f"bad configuration: {exc}") from exc


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + ("in" if n == "input" else n) for n in missing)
        raise CliError(f"missing required option(s): {flags}")


def cmd_segment(args) -> int:
    cfg = load_config(args.config, args.overrides)
    if args.dump_config:
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    _require(args, "input", "out")
    try:
        img = load_image(args.input)
        truth = load_mask(args.truth) if args.truth else None
    except ImageError as exc:
        raise CliError(str(exc)) from exc
    try:
        mask = segment(img, args.method, cfg)
    except NoLesionError as exc:
        print(f"lesionseg: no lesion candidate: {exc}", file=sys.stderr)
        return EXIT_NO_LESION
    try:
        save_mask(mask, args.out)
        if args.overlay:
            if truth is not None and truth.shape != mask.shape:
                raise CliError("ground-truth mask size does not match the image")
            save_image(render_overlay(img, mask, truth), args.overlay)
    except ImageError as exc:
        raise CliError(str(exc)) from exc
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, args.overrides)
    if args.dump_config:
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    _require(args, "images", "truth", "report")
    if args.jobs < 1:
        raise CliError("--jobs must be >= 1")
    try:
        summary = evaluate_batch(args.images, args.truth, args.method, cfg, jobs=args.jobs)
        write_report(summary, args.report, include_runtime=args.timings)
    except EvaluationError as exc:
        raise CliError(str(exc)) from exc
    failures = sum(1 for r in summary.records if r.error)
    if failures:
        print(f"lesionseg: {failures} of {summary.count} images failed (see report)", file=sys.stderr)
    print(f"mean IoU: {summary.mean_iou * 100:.2f}%")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.count < 0:
        raise CliError("--count must be >= 0")
    if args.size < 16:
        raise CliError("--size must be >= 16")
    try:
        generate_suite(args.out, args.count, args.seed, hair=args.hair,
                       vignette=args.vignette, size=args.size)
    except (OSError, ImageError) as exc:
        raise CliError(f"cannot write to {args.out}: {exc}") from exc
    return EXIT_OK


COMMANDS = {"segment": cmd_segment, "evaluate": cmd_evaluate, "generate": cmd_generate}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"lesionseg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
