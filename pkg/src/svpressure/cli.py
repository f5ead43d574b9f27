"""Command line front end.

Exit statuses: 0 success, 2 configuration error, 3 budget exceeded,
4 invariant violation (including a failed gibbs-check).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dimension import (
    affinity_dimension,
    box_counting_oracle,
    caratheodory_bracket,
    repeller_bracket,
)
from .errors import ConfigError, InvariantViolation, PressureError
from .matrixpot import Kind, Orientation, PotentialSpec
from .models import Model, PerturbationFamily, load_model, perturb
from .pressure import (
    Schedule,
    block_pressure,
    cylinder_sum,
    exact_lyapunov_available,
    free_energy_estimate,
    lyapunov_spectrum,
    one_step_gibbs,
    pressure_profile,
    trace_csv,
)
from .symbolic import LocallyConstantPotential, corrupt_measure, gibbs_check, rpf_gibbs, topological_entropy

DEFAULT_EPS = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass
class RunConfig:
    command: str
    model: str
    s_grid: tuple[float, ...] = (0.0, 0.5, 1.0)
    schedule: Schedule = field(default_factory=Schedule)
    seed: int = 0
    json: bool = False
    out: Path | None = None
    threads: int | None = None
    timing: bool = False
    spec: str = "top"
    sign: int = 1
    target: str = "auto"
    eps: tuple[float, ...] = DEFAULT_EPS
    s: float = 1.0
    level: int = 4
    diagonal: bool = False
    depths: tuple[int, ...] = tuple(range(6, 11))
    max_len: int = 12
    corrupt: float | None = None


def parse_grid(text: str) -> tuple[float, ...]:
    """``a:b:step`` (inclusive of ``b`` up to rounding) or a comma list."""
    try:
        if ":" in text:
            a, b, h = (float(x) for x in text.split(":"))
            if h <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / h + 1e-9))
            return tuple(round(a + i * h, 12) for i in range(n + 1))
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected a:b:step or a comma list") from None


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        if ":" in text:
            a, b = (int(x) for x in text.split(":"))
            return tuple(range(a, b + 1))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svpressure", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="zoo name or model JSON path")
    common.add_argument("--schedule", default="1,2,4", help="word lengths n1,n2,...")
    common.add_argument("--power-levels", default="0,1,2", help="power levels k for 2^k blocks")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--out", type=Path, default=None, help="directory for report.json and trace.csv")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--timing", action="store_true", help="fill the wall_time_ms column")

    sub.add_parser("entropy", parents=[common], help="topological entropy of the coding")
    sp_ = sub.add_parser("pressure", parents=[common], help="pressure profile over an s grid")
    sp_.add_argument("--s-grid", default="0:1:0.5")
    sp_.add_argument("--spec", choices=[k.value for k in Kind], default="top")
    sp_.add_argument("--sign", type=int, choices=[-1, 1], default=1)
    sd = sub.add_parser("dimension", parents=[common], help="certified dimension bracket")
    sd.add_argument("--target", choices=["auto", "repeller", "affinity", "caratheodory"], default="auto")
    sc = sub.add_parser("scan-continuity", parents=[common], help="pressure under shrinking perturbations")
    sc.add_argument("--eps", default=",".join(map(str, DEFAULT_EPS)))
    sc.add_argument("--s", type=float, default=1.0)
    sc.add_argument("--level", type=int, default=4)
    sc.add_argument("--diagonal-direction", action="store_true", help="perturb diagonal entries only")
    sg = sub.add_parser("gibbs-check", parents=[common], help="exhaustive Gibbs inequality check")
    sg.add_argument("--s", type=float, default=0.0)
    sg.add_argument("--max-len", type=int, default=12)
    sg.add_argument("--corrupt", type=float, default=None, metavar="FACTOR",
                    help="skew one row of the measure by FACTOR before checking (negative test)")
    so = sub.add_parser("oracle-box", parents=[common], help="box-counting slope")
    so.add_argument("--depths", default="6:10")
    return p


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    a = _parser().parse_args(argv)
    cfg = RunConfig(
        command=a.command,
        model=a.model,
        schedule=Schedule(levels=parse_ints(a.schedule), power_levels=parse_ints(a.power_levels)),
        seed=a.seed,
        json=a.json,
        out=a.out,
        threads=a.threads,
        timing=a.timing,
    )
    if a.command == "pressure":
        cfg.s_grid, cfg.spec, cfg.sign = parse_grid(a.s_grid), a.spec, a.sign
    elif a.command == "dimension":
        cfg.target = a.target
    elif a.command == "scan-continuity":
        cfg.eps, cfg.s, cfg.level, cfg.diagonal = parse_grid(a.eps), a.s, a.level, a.diagonal_direction
    elif a.command == "gibbs-check":
        cfg.s, cfg.max_len, cfg.corrupt = a.s, a.max_len, a.corrupt
    elif a.command == "oracle-box":
        cfg.depths = parse_ints(a.depths)
    return cfg


# ----------------------------------------------------------------------------
# commands; each returns (report, trace_csv_text or None)
# ----------------------------------------------------------------------------

def cmd_entropy(cfg: RunConfig, model: Model):
    sft = model.system.sft
    report = {"model": model.name, "entropy": topological_entropy(sft), "irreducible": sft.irreducible,
              "flags": [] if sft.irreducible else ["reducible"]}
    return report, None


def cmd_pressure(cfg: RunConfig, model: Model):
    blocks = model.system.cocycle.blocks if cfg.spec.startswith("tilde") else None
    spec = PotentialSpec(Kind(cfg.spec), 0.0, cfg.sign, blocks)
    rows = pressure_profile(model.system, spec, cfg.s_grid, cfg.schedule, cfg.threads)
    out = []
    for r in rows:
        if r.upper is not None and r.lower is not None:
            status = "certified"
        elif r.upper is not None or r.lower is not None:
            status = "upper_only" if r.upper is not None else "lower_only"
        else:
            status = "heuristic_only"
        out.append({
            "s": r.s,
            "status": status,
            "upper": None if r.upper is None else r.upper.value,
            "upper_provenance": None if r.upper is None else f"{r.upper.estimator}@{r.upper.level}",
            "lower": None if r.lower is None else r.lower.value,
            "lower_provenance": None if r.lower is None else f"{r.lower.estimator}@{r.lower.level}",
        })
    trace = [e for r in rows for e in r.trace]
    return {"model": model.name, "spec": spec.label, "rows": out}, trace_csv(trace, cfg.timing)


def _root_csv(bracket) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["estimator", "spec", "level", "direction", "root", "flag"])
    for r in bracket.trace:
        w.writerow([r.estimator, r.spec, r.level, r.direction.value, format(r.root, ".17g"), r.flag or ""])
    return buf.getvalue()


def cmd_dimension(cfg: RunConfig, model: Model):
    system = model.system
    target = cfg.target
    if target == "auto":
        target = "affinity" if system.cocycle.orientation == Orientation.CONTRACTION else "repeller"
    fn = {"repeller": repeller_bracket, "affinity": affinity_dimension,
          "caratheodory": caratheodory_bracket}[target]
    b = fn(system, cfg.schedule, cfg.threads)
    # relative to the report so outputs do not depend on the output directory
    path = "trace.csv" if cfg.out is not None else None
    report = {"model": model.name, **b.to_json(path)}
    return report, _root_csv(b)


def scan_continuity(system, spec: PotentialSpec, eps_grid: Sequence[float], level: int,
                    seed: int = 0, diagonal: bool = False, workers: int | None = None) -> list[dict]:
    """Pressure at fixed ``spec`` and estimator level along ``A + eps * D``
    for a seeded random direction ``D``.  The first row is ``eps = 0``."""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(system.cocycle.mats.shape)
    if diagonal:
        direction = direction * np.eye(system.d)
    fam = PerturbationFamily(system, direction)
    est = block_pressure if level <= 8 else cylinder_sum

    def row(eps, sys_):
        up = est(sys_, spec, level, workers)
        lo = None
        if exact_lyapunov_available(sys_) and sys_.sft.irreducible:
            mu = one_step_gibbs(sys_, spec)
            lo = free_energy_estimate(sys_, mu, spec, lyapunov_spectrum(sys_, mu))
        return {"eps": float(eps), "s": spec.s, "P_upper": up.value,
                "P_lower": None if lo is None else lo.value,
                "upper_direction": up.direction.value,
                "lower_direction": None if lo is None else lo.direction.value}

    rows = [row(0.0, perturb(fam, 0.0))]
    p0 = rows[0]["P_upper"]
    rows[0]["delta"] = 0.0
    for eps in eps_grid:
        r = row(eps, perturb(fam, eps))
        r["delta"] = abs(r["P_upper"] - p0)
        rows.append(r)
    return rows


def modulus_exponent(rows: Sequence[dict]) -> float | None:
    """Least-squares slope of log delta against log eps over rows with
    ``eps > 0`` and ``delta > 0``."""
    pts = [(math.log(r["eps"]), math.log(r["delta"])) for r in rows if r["eps"] > 0 and r["delta"] > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


SCAN_COLUMNS = ["eps", "s", "P_upper", "P_lower", "delta"]


def _scan_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SCAN_COLUMNS)
    for r in rows:
        w.writerow(["" if r[c] is None else format(r[c], ".17g") for c in SCAN_COLUMNS])
    return buf.getvalue()


def cmd_scan_continuity(cfg: RunConfig, model: Model):
    spec = PotentialSpec(Kind.TOP, cfg.s, 1)
    rows = scan_continuity(model.system, spec, cfg.eps, cfg.level, cfg.seed, cfg.diagonal, cfg.threads)
    report = {"model": model.name, "s": cfg.s, "level": cfg.level, "spec": spec.label,
              "max_delta": [{"eps": r["eps"], "delta": r["delta"]} for r in rows],
              "modulus_exponent": modulus_exponent(rows), "rows": rows}
    return report, _scan_csv(rows)


def cmd_gibbs_check(cfg: RunConfig, model: Model):
    from .matrixpot import potential_log

    system = model.system
    spec = PotentialSpec(Kind.TOP, cfg.s, -1)
    pot = LocallyConstantPotential.from_function(
        system.sft, 1, lambda w: potential_log(system.cocycle.mats[w[0]], spec)
    )
    res = rpf_gibbs(system.sft, pot)
    if cfg.corrupt is not None:
        res = res._replace(measure=corrupt_measure(res.measure, cfg.corrupt))
    rep = gibbs_check(system.sft, pot, res, cfg.max_len)
    report = {
        "model": model.name, "pressure": res.pressure, "constant": rep.constant, "passed": rep.passed,
        "worst_ratio_high": rep.worst_ratio_high, "worst_ratio_low": rep.worst_ratio_low,
        "worst_cylinder": list(rep.worst_cylinder), "cylinders_checked": rep.cylinders_checked,
        "corrupt": cfg.corrupt,
    }
    return report, None


def cmd_oracle_box(cfg: RunConfig, model: Model):
    if model.realizer is None:
        raise ConfigError(f"model {model.name!r} has no geometric realization")
    e = box_counting_oracle(model, cfg.depths)
    return {"model": model.name, "slope": e.slope, "intercept": e.intercept, "residual": e.residual,
            "depths": e.depths, "counts": e.counts}, None


COMMANDS = {
    "entropy": cmd_entropy,
    "pressure": cmd_pressure,
    "dimension": cmd_dimension,
    "scan-continuity": cmd_scan_continuity,
    "gibbs-check": cmd_gibbs_check,
    "oracle-box": cmd_oracle_box,
}


def _text(report: dict) -> str:
    lines = []
    for k, v in report.items():
        if isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{k}:")
            lines.extend("  " + "  ".join(f"{a}={b}" for a, b in row.items()) for row in v)
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines)


def run(cfg: RunConfig) -> dict:
    model = load_model(cfg.model)
    report, trace = COMMANDS[cfg.command](cfg, model)
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
        if trace is not None:
            with open(cfg.out / "trace.csv", "w", newline="") as fh:
                fh.write(trace)
    return report


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
        report = run(cfg)
    except PressureError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    print(json.dumps(report, indent=2) if cfg.json else _text(report))
    # a failed check is an invariant violation
    return InvariantViolation.exit_code if report.get("passed") is False else 0


if __name__ == "__main__":
    sys.exit(main())
