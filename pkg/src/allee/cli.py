"""Command line entry point: ``allee run`` and ``allee list-recipes``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import load_config
from .errors import ConfigError, NumericalError
from .recipes import recipe_descriptions, run_experiment

log = logging.getLogger("allee")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="allee", description="Stochastic Allee-effect population experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the recipe named in a config file")
    run.add_argument("--config", required=True, help="path to the config document")
    run.add_argument("--seed", type=int, default=None, help="override [run] seed")
    run.add_argument("--out", default=None, help="override [run] out (output directory)")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list-recipes", help="print the available recipe names")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-recipes":
        for name, desc in recipe_descriptions().items():
            print(f"{name:<13} {desc}")
        return EXIT_OK

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        run = cfg.run
        if args.seed is not None:
            run = replace(run, seed=args.seed)
        if args.out is not None:
            run = replace(run, out=args.out)
        cfg = replace(cfg, run=run)
        manifest = run_experiment(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # invalid inputs that only surface once a module sees them
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("wrote %d files to %s in %.2fs", len(manifest["files"]), cfg.run.out, manifest["wall_time_s"])
    print(f"{manifest['experiment']}: {len(manifest['files'])} files -> {cfg.run.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
