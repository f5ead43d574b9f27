"""Box-counting slope against the certified bracket for diagonal toral
systems with random digit sets.

    python3 scripts/box_vs_bracket.py --trials 10 --factors 2,3
"""
import argparse
import sys

import numpy as np

from svpressure import DiagonalToralSystem, box_counting_oracle, build_toral, repeller_bracket
from svpressure.cli import parse_ints
from svpressure.errors import BudgetExceeded

MAX_DIGITS = 4


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--factors", default="2,3")
    ap.add_argument("--depths", default="6:10")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    factors = parse_ints(args.factors)
    depths = parse_ints(args.depths)
    grid = np.array(np.meshgrid(*[np.arange(f) for f in factors], indexing="ij")).reshape(len(factors), -1).T
    rng = np.random.default_rng(args.seed)
    print("digits,lower,upper,box_slope,inside")
    for _ in range(args.trials):
        # larger digit sets outgrow the piece budget at depth 10
        k = int(rng.integers(2, min(grid.shape[0], MAX_DIGITS + 1)))
        digits = [tuple(int(x) for x in grid[i]) for i in sorted(rng.choice(grid.shape[0], k, replace=False))]
        m = build_toral(DiagonalToralSystem(tuple(factors), digits))
        b = repeller_bracket(m.system)
        label = " ".join("".join(map(str, d)) for d in digits)
        try:
            slope = box_counting_oracle(m, depths).slope
        except BudgetExceeded:
            # many digits at deep levels outgrow the piece budget
            print(f"{label},{b.lower:.6f},{b.upper:.6f},,")
            continue
        inside = b.lower - 0.06 <= slope <= b.upper + 0.06
        print(f"{label},{b.lower:.6f},{b.upper:.6f},{slope:.6f},{inside}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
