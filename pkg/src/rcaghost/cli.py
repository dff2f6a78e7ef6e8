"""Command-line pipeline driver.

Compute modules are imported lazily so that ``--threads`` can size the
worker pool through the environment before the JIT runtime loads.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

_STAGE_HELP = {
    "simulate": "synthesize channel data for the configured phantom",
    "beamform": "form the main frame and the eight ghost frames",
    "filter": "build the correlation weight map and apply it",
    "metrics": "measure widths, ghost suppression and contrast",
    "all": "run every stage in order",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcaghost",
        description=(
            "Synthetic-aperture imaging pipeline for row-column arrays with "
            "edge-wave ghost suppression."
        ),
    )
    sub = parser.add_subparsers(dest="stage", required=True, metavar="stage")
    for name, help_text in _STAGE_HELP.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", type=Path, default=None, metavar="PATH",
                       help="JSON config file; overrides the profile defaults")
        s.add_argument("--seed", type=int, default=None, metavar="N",
                       help="override the config seed")
        s.add_argument("--out", type=Path, default=None, metavar="DIR",
                       help="output directory (default: config 'out')")
        s.add_argument("--threads", type=int, default=None, metavar="N",
                       help="compute worker count; never changes the results")
        s.add_argument("--profile", choices=("desk", "full", "desk-cyst"), default=None,
                       help="built-in config profile (desk is fast; full is slow)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads >= 1:
        # must happen before the JIT runtime is first imported
        os.environ.setdefault("NUMBA_NUM_THREADS", str(args.threads))

    from .config import ConfigError, resolve_config
    from .pipeline import run_stage
    from .rawio import MissingArtifactError, load_metrics_report

    try:
        cfg = resolve_config(
            profile=args.profile,
            config_path=args.config,
            seed=args.seed,
            out=str(args.out) if args.out is not None else None,
        )
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        produced = run_stage(args.stage, cfg, out_dir=args.out, threads=args.threads)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except MissingArtifactError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    for name in sorted(produced):
        print(f"wrote {produced[name]}")
    if args.stage in ("metrics", "all"):
        out = Path(args.out) if args.out is not None else Path(cfg["out"])
        report = load_metrics_report(out)
        for key in ("fwhm_main", "fwhm_filtered", "suppression_db", "cnr_main", "cnr_filtered"):
            print(f"{key}: {report.get(key)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
