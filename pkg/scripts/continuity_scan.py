"""Pressure deviation under shrinking random perturbations of random GL(2)
cocycles; prints the fitted modulus exponent per cocycle.

    python3 scripts/continuity_scan.py --cocycles 5 --s 1.3 --level 6
"""
import argparse
import sys

import numpy as np

from svpressure import Kind, MatrixCocycle, Orientation, PotentialSpec
from svpressure.cli import modulus_exponent, scan_continuity
from svpressure.pressure import CocycleSystem
from svpressure.symbolic import full_shift

EPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)


def random_cocycle(rng: np.random.Generator, k: int) -> CocycleSystem:
    while True:
        A = rng.standard_normal((k, 2, 2))
        if np.all(np.abs(np.linalg.det(A)) > 0.1):
            return CocycleSystem(full_shift(k), MatrixCocycle(A, Orientation.DERIVATIVE))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cocycles", type=int, default=5)
    ap.add_argument("--symbols", type=int, default=2)
    ap.add_argument("--s", type=float, default=1.3)
    ap.add_argument("--level", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    spec = PotentialSpec(Kind.TOP, args.s, 1)
    print("cocycle,eps,delta")
    exps = []
    for i in range(args.cocycles):
        system = random_cocycle(np.random.default_rng([args.seed, i]), args.symbols)
        rows = scan_continuity(system, spec, EPS, args.level, seed=args.seed + i)
        for r in rows[1:]:
            print(f"{i},{r['eps']:.0e},{r['delta']:.6e}")
        exps.append(modulus_exponent(rows))
    print("# modulus exponents: " + ", ".join(f"{e:.3f}" for e in exps), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
