"""Command line entry point: ``helmsource {simulate,dsm,invert,pipeline}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import ConfigError, HelmsourceError
from .experiment import (
    SCHEMA,
    StageError,
    bundled_config_path,
    load_config,
    run_dsm,
    run_invert,
    run_pipeline,
    run_simulate,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helmsource", description="Locate and invert 2-D Helmholtz sources.")
    parser.add_argument("--print-schema", action="store_true", help="print the config JSON schema and exit")
    sub = parser.add_subparsers(dest="command")
    for name, text in (("simulate", "synthesize clean and noisy data"),
                       ("dsm", "compute the indicator and its peaks"),
                       ("invert", "run the pCN sampler from the DSM anchors"),
                       ("pipeline", "all stages in order")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True,
                       help="experiment JSON file, or bundled:NAME (example1..example4)")
        p.add_argument("--seed", type=int, help="override both data and chain seeds")
        p.add_argument("--out", help="output directory (default: the config's 'output')")
        if name == "pipeline":
            p.add_argument("--dsm-only", action="store_true", help="stop after peak extraction")
    return parser


def _resolve(arg: str) -> Path:
    if arg.startswith("bundled:"):
        return bundled_config_path(arg.split(":", 1)[1])
    return Path(arg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_schema:
        print(json.dumps(SCHEMA, indent=1))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(_resolve(args.config))
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        out = Path(args.out or cfg.output)
        t0 = time.perf_counter()
        if args.command == "simulate":
            run_simulate(cfg, out)
        elif args.command == "dsm":
            out.mkdir(parents=True, exist_ok=True)
            run_dsm(cfg, out)
        elif args.command == "invert":
            out.mkdir(parents=True, exist_ok=True)
            run_invert(cfg, out)
        else:
            run_pipeline(cfg, out, dsm_only=args.dsm_only)
        print(f"{args.command}: wrote {out} in {time.perf_counter() - t0:.1f}s")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (HelmsourceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
