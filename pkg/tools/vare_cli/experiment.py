#!/usr/bin/env python3
"""Run a replication study from a JSON config and write its CSV table."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

ROOT = Path(__file__).resolve().parents[2]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from libs.vare.errors import ParseError, VareError
from libs.vare.harness import load_config, run_study, write_estimates, write_frame, write_results
from libs.vare.settings import configure_logging

logger = logging.getLogger("vare.experiment")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Run a table, scaling, timing or grid-sampled covariate study.")
    ap.add_argument("--config", required=True)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--replications", type=int, default=None, help="override R from the config")
    ap.add_argument("--out", default=None, help="result CSV (defaults to the config's output)")
    ap.add_argument("--estimates", default=None, help="optional long-form CSV of per-replication estimates")
    ap.add_argument("--log-level", default=None)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.replications is not None:
            overrides["replications"] = args.replications
        if overrides:
            cfg = cfg.model_validate({**cfg.model_dump(), **overrides})
    except ParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = args.out or cfg.output
    if not out:
        print("config error: no output path (--out or 'output')", file=sys.stderr)
        return 2

    try:
        result = run_study(cfg)
    except VareError as exc:
        logger.error("study failed: %s", exc)
        return 1

    if isinstance(result, list):
        write_results(result, out)
        if args.estimates:
            write_estimates(result, args.estimates)
    else:
        write_frame(result, out)
    print(f"{cfg.study} study -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
