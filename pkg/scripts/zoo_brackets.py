"""Dimension brackets for every zoo model, with the box-counting slope
where the model has a realization.

    python3 scripts/zoo_brackets.py --out results/zoo_brackets.csv
"""
import argparse
import csv
import sys
import time
from pathlib import Path

from svpressure import Orientation, affinity_dimension, box_counting_oracle, load_model, repeller_bracket, zoo
from svpressure.errors import BudgetExceeded

BOX_DEPTHS = range(6, 11)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=None, help="CSV destination (stdout if omitted)")
    ap.add_argument("--no-box", action="store_true", help="skip the box-counting oracle")
    args = ap.parse_args(argv)

    rows = []
    for name in zoo():
        m = load_model(name)
        t0 = time.perf_counter()
        contracting = m.system.cocycle.orientation == Orientation.CONTRACTION
        b = affinity_dimension(m.system) if contracting else repeller_bracket(m.system)
        elapsed = time.perf_counter() - t0
        slope = None
        if not args.no_box and m.realizer is not None:
            try:
                slope = box_counting_oracle(m, BOX_DEPTHS).slope
            except BudgetExceeded:
                pass
        rows.append({
            "model": name, "target": b.target.value, "lower": b.lower, "upper": b.upper,
            "lower_provenance": b.lower_provenance, "upper_provenance": b.upper_provenance,
            "box_slope": "" if slope is None else slope, "flags": ";".join(b.flags),
            "seconds": round(elapsed, 3),
        })

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
