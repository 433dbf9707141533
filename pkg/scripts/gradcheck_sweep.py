#!/usr/bin/env python3
"""Sweep the finite-difference step and report the worst gradient error.

Central differences have truncation error O(eps^2) and roundoff error
O(1/eps); the sweep makes the usable window visible.
"""

import argparse
import sys

from gradednn.gradients import grad_check_suite


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    print("%-10s %s" % ("eps", "worst rel err"))
    for eps in (1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4):
        results = grad_check_suite(eps=eps, count=args.count, seed=args.seed)
        print("%-10g %.3e" % (eps, max(err for _, err in results)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
