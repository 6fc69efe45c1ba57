#!/usr/bin/env python3
"""Run the full acceptance battery and print one line per criterion.

Usage: python scripts/run_suite.py [--quick]
Exit status 0 iff every criterion passes.
"""

import argparse
import sys

from martpara.suite import run_all


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="shrink trial counts")
    args = parser.parse_args()
    results = run_all(heavy=not args.quick)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
