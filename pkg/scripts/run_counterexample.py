#!/usr/bin/env python3
"""Print the separation experiment table for a choice of exponents.

Usage: python scripts/run_counterexample.py [--p 4.0] [--r 0.3] [--nmax 10]
"""

import argparse

from martpara import direct_testing_cap, divergence_report


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", type=float, default=4.0)
    parser.add_argument("--r", type=float, default=0.3)
    parser.add_argument("--nmax", type=int, default=10)
    args = parser.parse_args()

    rows = divergence_report(args.nmax, args.p, args.r)
    cap = direct_testing_cap(args.p)
    print(f"direct-constant cap: {cap:.6f}")
    print(f"{'n':>3} {'B':>10} {'B*':>10} {'Q':>12} {'L':>12}")
    for row in rows:
        print(
            f"{row.n:>3} {row.b_direct:>10.4f} {row.b_adjoint:>10.4f} "
            f"{row.q_value:>12.6g} {row.lower_bound:>12.6g}"
        )
    first, last = rows[0], rows[-1]
    print(
        f"growth: Q({last.n})/Q({first.n}) = {last.q_value / first.q_value:.2f}, "
        f"B*({last.n})/B*({first.n}) = {last.b_adjoint / first.b_adjoint:.2f}"
    )


if __name__ == "__main__":
    main()
