#!/usr/bin/env python3
"""Estimate theta from a pattern file; prints one CSV line."""

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
from libs.vare.estimate import TEST_FUNCTIONS
from libs.vare.io import read_pattern
from libs.vare.service import estimate_pattern, result_csv_line
from libs.vare.settings import configure_logging

logger = logging.getLogger("vare.estimate")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Fit theta by the variational estimator or composite likelihood.")
    ap.add_argument("--method", choices=("vare", "mcle"), default="vare")
    ap.add_argument("--test-fn", choices=TEST_FUNCTIONS, default="div-z")
    ap.add_argument("--eps", type=float, default=0.0, help="smoothing width; 0 disables the mollifier")
    ap.add_argument("--pattern", required=True)
    ap.add_argument("--model", required=True, help="1, 2, 3, 4 or sine")
    ap.add_argument("--grid", type=int, default=80, help="per-axis quadrature grid for mcle")
    ap.add_argument("--ci", action="store_true", help="append Poisson standard errors (vare)")
    ap.add_argument("--log-level", default=None)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.eps < 0:
        print("error: --eps must be >= 0", file=sys.stderr)
        return 2
    try:
        pattern = read_pattern(args.pattern)
        result = estimate_pattern(
            pattern,
            args.model,
            method=args.method,
            test_fn=args.test_fn,
            eps=args.eps,
            grid=args.grid,
            ci=args.ci and args.method == "vare",
        )
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (VareError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(result_csv_line(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
