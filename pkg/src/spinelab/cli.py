"""spine-lab command line: run experiment configs, verify suites, list the
gallery.  Exit code 0 iff every assertion passed."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spine-lab",
        description="heat kernels, Faber-Krahn profiles and potential theory "
                    "on graphs glued along a spine")
    parser.add_argument("--cache-dir", default=None,
                        help="heat-state cache directory (or $SPINELAB_CACHE_DIR)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker count recorded in the manifest; results "
                             "are independent of it")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, default=None,
                       help="override the output directory")

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite", choices=["core-invariants", "fk", "spine-bounds",
                                         "appendix-b", "potential"])
    p_ver.add_argument("--fast", action="store_true",
                       help="reduced windows and sample counts")
    p_ver.add_argument("--out", type=Path, default=None,
                       help="also write the JSON report here")

    p_gal = sub.add_parser("gallery", help="list the construction gallery")
    p_gal.add_argument("--list", action="store_true", default=True)

    args = parser.parse_args(argv)

    if args.command == "gallery":
        from . import gallery
        for name in gallery.names():
            print(f"{name:14s} {gallery.GALLERY[name]['doc']}")
        return 0

    if args.command == "verify":
        from .suites import verify
        report = verify(args.suite, fast=args.fast)
        print(report.summary())
        if args.out:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(report.to_json() + "\n")
        return 0 if report.passed else 1

    if args.command == "run":
        from .config import ConfigError, load_config
        from .runner import run
        try:
            cfg = load_config(args.config)
        except ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
        if args.out:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        cache_dir = args.cache_dir or os.environ.get("SPINELAB_CACHE_DIR")
        report = run(cfg, cache_dir=cache_dir, threads=args.threads)
        for p in report.outputs:
            print(f"wrote {p}")
        print(f"manifest {report.manifest_path}")
        if report.details:
            for k, v in sorted(report.details.items()):
                print(f"  {k}: {v}")
        return 0 if report.passed else 1

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
