#!/usr/bin/env python3
"""Simulate one point pattern and write it as a pattern file."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

ROOT = Path(__file__).resolve().parents[2]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from libs.vare.constants import PROCESS_NAMES
from libs.vare.errors import ParseError, VareError
from libs.vare.io import parse_window, write_pattern
from libs.vare.service import simulate_pattern
from libs.vare.settings import configure_logging

logger = logging.getLogger("vare.simulate")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Simulate a point pattern with log-linear intensity.")
    ap.add_argument("--process", choices=PROCESS_NAMES, default="poisson")
    ap.add_argument("--model", default="2", help="1, 2, 3, 4 or sine")
    ap.add_argument("--dim", type=int, default=None, help="dimension for the sine model")
    ap.add_argument("--window", default="-1,-1..1,1", help="l1,..,ld..u1,..,ud")
    ap.add_argument("--mu", type=float, default=200.0, help="expected number of points")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", required=True)
    ap.add_argument("--log-level", default=None)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        window = parse_window(args.window)
        pattern = simulate_pattern(args.process, args.model, window, args.mu, args.seed, d=args.dim)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (VareError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_pattern(pattern, args.out)
    print(f"{pattern.n} points -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
