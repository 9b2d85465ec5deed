"""Command line front end: ``wkneading <subcommand> SYSTEM [options]``.

SYSTEM is a definition file or the name of a shipped fixture (``tent``,
``golden``, ``appendix_c``, ``discont_3_2``, ``zero_weight``).  Reports go to
stdout as YAML; CSV files go to ``--out`` when given.  The exit status is 0
only when every check that was run passed its tolerance, 1 when one failed
and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import math
import random
import sys as _sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import ConfigError, parse_config, parse_param
from .cylinders import (
    CylinderCapError,
    count_cylinders,
    enumerate_cylinders,
    fixed_point_counts,
    write_cylinders_csv,
    zeta_residual,
)
from .kneading import (
    boundary_column_residual,
    fr_residual,
    kneading_det,
    kneading_matrix,
    mki_residual,
    mt_relations,
    reduced_matrix,
)
from .pressure import (
    PressurePreconditionError,
    pressure,
    spurious_zero_demo,
)
from .semiconj import (
    CriticalMeasure,
    LambdaUnstable,
    SemiConjugacy,
    TailError,
    critical_model,
    h_crosscheck,
    model_map,
    model_mass,
    semiconj_residual,
)
from .system import (
    GermAmbiguityError,
    GermInterval,
    ValidationError,
    minus,
    plus,
    sample_germs,
)

CSV_VERSION = 1


# ---------------------------------------------------------------------------
# output helpers


def plain(x):
    """YAML-friendly scalar: exact rationals as ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    return x


def emit(report: dict, stream=None) -> None:
    yaml.safe_dump(plain(report), stream or _sys.stdout, sort_keys=False,
                   default_flow_style=None, width=120)


def write_csv(out: Path, filename: str, columns: list[str], rows) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / filename
    stem = filename.rsplit(".", 1)[0]
    with open(path, "w", newline="") as fh:
        fh.write(f"# {stem} v{CSV_VERSION}: {','.join(columns)}\n")
        wr = csv.writer(fh)
        wr.writerow(columns)
        for r in rows:
            wr.writerow([plain(v) for v in r])
    return path


class Verdict:
    """Collects named checks; ``ok`` is the conjunction."""

    def __init__(self):
        self.items: list[dict] = []

    def add(self, name: str, value, tol, passed: bool | None = None, **extra):
        value = float(value)
        passed = bool(value <= tol) if passed is None else bool(passed)
        self.items.append({"check": name, "max_residual": value, "tol": tol,
                           "pass": passed, **extra})
        return passed

    @property
    def ok(self) -> bool:
        return all(i["pass"] for i in self.items)


def _tol(sys, exact_tol=0.0, float_tol=1e-9):
    return exact_tol if sys.exact else float_tol


def _identity_error(R) -> float:
    return max(abs(float(R[j, k][0]) - (1.0 if j == k else 0.0))
               for j in range(R.dim) for k in range(R.dim))


def _random_intervals(sys, rng, count):
    """Random germ intervals: open, half-closed and closed ones."""
    out = []
    for k in range(count):
        u, v = sample_germs(sys, 2, rng)
        x, y = u.base, v.base
        if x == y:
            continue
        kind = k % 4
        lo = plus(x) if kind in (0, 2) else minus(x)
        hi = minus(y) if kind in (0, 1) else plus(y)
        out.append(GermInterval(lo, hi))
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(sys, cfg, args):
    report = {
        "system": sys.name,
        "mode": sys.mode,
        "interval": [sys.a, sys.b],
        "cuts": list(sys.cuts),
        "branches": [
            {"slope": br.slope, "intercept": br.intercept, "weight": br.weight, "sign": s}
            for br, s in zip(sys.branches, sys.signs)
        ],
        "N": cfg.N,
        "N_id": cfg.N_id,
        "status": "valid",
    }
    emit(report)
    return 0


def cmd_kneading(sys, cfg, args):
    N = cfg.N
    show = min(args.show, N)
    R = kneading_matrix(sys, N)
    B = reduced_matrix(sys, N)
    D = kneading_det(sys, N)
    report = {
        "system": sys.name,
        "N": N,
        "R": [[list(R[j, k].coeffs[: show + 1]) for k in range(R.dim)] for j in range(R.dim)],
        "B": [[list(B[j, k].coeffs[: show + 1]) for k in range(B.dim)] for j in range(B.dim)],
        "det_R": list(D.coeffs[: show + 1]),
        "det_B": list(B.det().coeffs[: show + 1]),
    }
    v = Verdict()
    v.add("R(0) = Id", _identity_error(R), _tol(sys, 0.0, 1e-14))
    report["checks"] = v.items
    emit(report)
    if args.out:
        out = Path(args.out)
        for j in range(R.dim):
            for k in range(R.dim):
                write_csv(out, f"theta_{j}_{k}.csv", ["m", "coeff"], enumerate(R[j, k].coeffs))
        write_csv(out, "det.csv", ["n", "coeff"], enumerate(D.coeffs))
    return 0 if v.ok else 1


def cmd_pressure(sys, cfg, args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = pressure(sys, N=cfg.N, tol=cfg.tol, method=args.method)
        spur = spurious_zero_demo(sys, N=cfg.N, method=args.method)
    report = {"system": sys.name, **res.summary()}
    report["det_B_first_zero"] = spur.zero_B
    if spur.differ and spur.zero_B is not None:
        report["warnings"].append(
            f"det B has a spurious zero at {spur.zero_B:.12g}, below the first zero of det R"
        )
    emit(report)
    if args.out:
        write_csv(Path(args.out), "scan.csv", ["t", "D_N"], res.scan)
    return 0 if res.status == "found" and res.stable else 1


def cmd_zeta(sys, cfg, args):
    n = min(args.upto, cfg.depth_cap)
    counts = fixed_point_counts(sys, n, **cfg.caps)
    res = zeta_residual(sys, n, counts=counts)
    tol = _tol(sys)
    v = Verdict()
    v.add("Z D - 1", res.product.max_abs(), tol)
    v.add("N_f + D'/D", res.log_form.max_abs(), tol)
    report = {
        "system": sys.name,
        "degree": n,
        "N_n": {i + 1: c for i, c in enumerate(counts)},
        "checks": v.items,
    }
    emit(report)
    if args.out:
        write_csv(Path(args.out), "nn.csv", ["n", "N_n"], ((i + 1, c) for i, c in enumerate(counts)))
    return 0 if v.ok else 1


def cmd_check(sys, cfg, args):
    rng = random.Random(cfg.seed)
    tol = _tol(sys)
    N_id = cfg.N_id
    v = Verdict()

    R = kneading_matrix(sys, N_id)
    v.add("R(0) = Id", _identity_error(R), _tol(sys, 0.0, 1e-14))

    worst = 0.0
    for J in _random_intervals(sys, rng, args.samples):
        worst = max(worst, max(float(r.max_abs()) for r in mki_residual(sys, J, N_id, R)))
    v.add("main kneading identity", worst, tol, intervals=args.samples, degree=N_id)

    fr_deg = min(N_id, 10)
    v.add("F R - R'", fr_residual(sys, fr_deg).max_abs(), tol, degree=fr_deg)

    germs = sample_germs(sys, 10, rng)
    mt = mt_relations(sys, N_id, germs)
    v.add("key sum = 1", mt.key_residual, tol)
    v.add("classical determinants agree", mt.mt_spread, tol)
    v.add("classical determinant = det R", mt.mt_vs_det, tol)
    v.add("H det R = det B", mt.relation_residual, tol)
    v.add("R (H, kappa)^T = e_0", boundary_column_residual(sys, N_id), tol)

    zdeg = min(args.zeta_degree, cfg.depth_cap)
    try:
        z = zeta_residual(sys, zdeg, **cfg.caps)
        v.add("zeta: Z D - 1", z.product.max_abs(), tol, degree=zdeg)
        v.add("zeta: N_f + D'/D", z.log_form.max_abs(), tol, degree=zdeg - 1)
    except CylinderCapError as exc:
        v.add("zeta", math.inf, tol, passed=False, error=str(exc))

    emit({"system": sys.name, "seed": cfg.seed, "checks": v.items, "pass": v.ok})
    return 0 if v.ok else 1


def _germ_rows(sys, rng, count):
    return sample_germs(sys, count, rng)


def cmd_semiconj(sys, cfg, args):
    rng = random.Random(cfg.seed)
    t = args.t
    lap_n = args.lap_n or min(cfg.N, 48)
    phi = SemiConjugacy(sys, t, lap_n)
    model = model_map(sys, t, lap_n, phi)
    germs = _germ_rows(sys, rng, args.samples)
    v = Verdict()
    v.add("semi-conjugacy residual", semiconj_residual(sys, t, germs, lap_n, phi, model), args.residual_tol)
    slope_err = max(abs(s - sg / (t * float(g))) for s, sg, g in zip(model.slopes, sys.signs, sys.weights))
    v.add("model slopes s_i/(t g_i)", slope_err, 0.0)
    v.add("model intervals disjoint", 0.0 if model.disjoint() else 1.0, 0.0)
    cross = max(abs(phi(x) - h_crosscheck(sys, t, x, phi.ev)) for x in germs[: args.cross])
    v.add("kneading-matrix cross-check", cross, 1e-8)
    emit({
        "system": sys.name,
        "t": t,
        "lap_degree": lap_n,
        "tail_estimate": phi.tail,
        "intervals": model.intervals,
        "slopes": model.slopes,
        "checks": v.items,
        "pass": v.ok,
    })
    if args.out:
        _phi_csv(Path(args.out), "phi.csv", germs, phi)
    return 0 if v.ok else 1


def _phi_csv(out, name, germs, phi):
    write_csv(out, name, ["x", "dir", "value"], ((float(x.base), x.dir, phi(x)) for x in germs))


def _model_csv(out, name, model):
    cols = ["i", "lo", "hi", "slope", "intercept", "degenerate"]
    write_csv(out, name, cols, ([r[c] for c in cols] for r in model.rows()))


def _critical(sys, cfg):
    res = pressure(sys, N=cfg.N, tol=cfg.tol)
    if res.t_star is None:
        raise PressurePreconditionError(f"no pressure zero found ({res.status})")
    lam = CriticalMeasure(sys, res.t_star, n_max=max(4 * cfg.N, 256))
    return res, lam, critical_model(sys, lam)


def cmd_model(sys, cfg, args):
    v = Verdict()
    if args.critical:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res, lam, model = _critical(sys, cfg)
            again = pressure(model.as_system(), N=cfg.N, tol=cfg.tol)
        mass = model_mass(model, args.mass_depth)
        v.add("model mass = 1", abs(mass - 1.0), 1e-6, depth=args.mass_depth)
        gap = abs(again.t_star - res.t_star) if again.t_star else math.inf
        v.add("model pressure = pressure", gap, 1e-6)
        report = {
            "system": sys.name,
            "t": res.t_star,
            "rho1": res.rho1,
            "cut_images": model.cut_images,
            "surviving": model.active,
            "continuous": model.continuous,
            "label": "interval map" if model.continuous else "partially defined PL system",
        }
    else:
        if args.t is None:
            raise SystemExit("model: give --t T or --critical")
        model = model_map(sys, args.t, args.lap_n or min(cfg.N, 48))
        v.add("model intervals disjoint", 0.0 if model.disjoint() else 1.0, 0.0)
        report = {"system": sys.name, "t": args.t}
    report["branches"] = model.rows()
    report["checks"] = v.items
    report["pass"] = v.ok
    emit(report)
    if args.out:
        _model_csv(Path(args.out), "model.csv", model)
    return 0 if v.ok else 1


def cmd_cylinders(sys, cfg, args):
    cyls = enumerate_cylinders(sys, args.depth, **cfg.caps)
    emit({"system": sys.name, "depth": args.depth, "count": count_cylinders(sys, args.depth)})
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_cylinders_csv(out / "cylinders.csv", sys, cyls)
    return 0


def cmd_emit_plots(sys, cfg, args):
    """Graph of ``f``, ``phi_t`` and the model, at ``t`` and at the critical parameter."""
    out = Path(args.out or ".")
    rng = random.Random(cfg.seed)
    lap_n = args.lap_n or cfg.N
    points = args.points

    # graph of f, sampled per branch
    rows = []
    for i, br in enumerate(sys.branches):
        lo, hi = float(sys.c(i)), float(sys.c(i + 1))
        for k in range(points + 1):
            x = lo + (hi - lo) * k / points
            rows.append((i, x, float(br(sys.scalar(x)))))
    write_csv(out, "graph.csv", ["branch", "x", "y"], rows)

    germs = sample_germs(sys, points, rng)
    phi = SemiConjugacy(sys, args.t, lap_n)
    _phi_csv(out, "phi.csv", germs, phi)
    _model_csv(out, "model.csv", model_map(sys, args.t, lap_n, phi))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res, lam, crit = _critical(sys, cfg)
    crit_rows = []
    for x in germs:
        J = GermInterval(plus(sys.a), x)
        crit_rows.append((float(x.base), x.dir, lam(J)))
    write_csv(out, "phi_critical.csv", ["x", "dir", "value"], crit_rows)
    _model_csv(out, "model_critical.csv", crit)
    emit({
        "system": sys.name,
        "t": args.t,
        "t_critical": res.t_star,
        "files": ["graph.csv", "phi.csv", "model.csv", "phi_critical.csv", "model_critical.csv"],
        "out": str(out),
    })
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("system", help="definition file or fixture name")
    common.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                        help="override a parameter of the definition file")
    common.add_argument("--mode", choices=("exact", "float"), help="override the arithmetic mode")
    common.add_argument("-N", "--degree", type=int, help="truncation degree N")
    common.add_argument("--n-id", type=int, help="identity degree N_id")
    common.add_argument("--depth-cap", type=int, help="cylinder depth cap")
    common.add_argument("--tol", type=float, help="bisection tolerance")
    common.add_argument("--seed", type=int, help="seed for sampled germs and intervals")
    common.add_argument("--out", help="directory for CSV output")

    p = argparse.ArgumentParser(prog="wkneading", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check a definition file")
    s = sub.add_parser("kneading", parents=[common], help="kneading matrices and determinant")
    s.add_argument("--show", type=int, default=12, help="coefficients printed per entry")
    s = sub.add_parser("pressure", parents=[common], help="first zero of det R")
    s.add_argument("--method", choices=("orbit", "series"), default="orbit")
    s = sub.add_parser("zeta", parents=[common], help="periodic-point counts and zeta identity")
    s.add_argument("--upto", type=int, default=20, help="highest n for N_n")
    s = sub.add_parser("check", parents=[common], help="run the identity suite")
    s.add_argument("--samples", type=int, default=20, help="random intervals for the main identity")
    s.add_argument("--zeta-degree", type=int, default=20)
    for name, helptext in (("semiconj", "semi-conjugacy phi_t at a given t"),):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--t", type=float, required=True)
        s.add_argument("--lap-n", type=int)
        s.add_argument("--samples", type=int, default=1000)
        s.add_argument("--cross", type=int, default=100, help="germs used for the cross-check")
        s.add_argument("--residual-tol", type=float, default=1e-9)
    s = sub.add_parser("model", parents=[common], help="piecewise-linear model")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=float)
    g.add_argument("--critical", action="store_true")
    s.add_argument("--lap-n", type=int)
    s.add_argument("--mass-depth", type=int, default=8)
    s = sub.add_parser("cylinders", parents=[common], help="enumerate cylinders")
    s.add_argument("--depth", type=int, required=True)
    s = sub.add_parser("emit-plots", parents=[common], help="CSV data for figures")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--lap-n", type=int)
    s.add_argument("--points", type=int, default=400)
    return p


COMMANDS = {
    "validate": cmd_validate,
    "kneading": cmd_kneading,
    "pressure": cmd_pressure,
    "zeta": cmd_zeta,
    "check": cmd_check,
    "semiconj": cmd_semiconj,
    "model": cmd_model,
    "cylinders": cmd_cylinders,
    "emit-plots": cmd_emit_plots,
}


def _fail(kind: str, message: str, code: int) -> int:
    emit({"error": kind, "message": message}, _sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = dict(parse_param(p) for p in args.param)
        sys, cfg = parse_config(args.system, overrides, args.mode)
        for attr, name in (("degree", "N"), ("n_id", "N_id"), ("depth_cap", "depth_cap"),
                           ("tol", "tol"), ("seed", "seed")):
            val = getattr(args, attr)
            if val is not None:
                setattr(cfg, name, val)
        if args.degree is not None and args.n_id is None:
            cfg.N_id = min(cfg.N_id, cfg.N)
        if args.out:
            cfg.out_dir = args.out
        cfg.check()
    except (ConfigError, ValidationError) as exc:
        return _fail("config", str(exc), 2)
    try:
        return COMMANDS[args.command](sys, cfg, args)
    except (TailError, LambdaUnstable, PressurePreconditionError, CylinderCapError,
            GermAmbiguityError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":
    raise SystemExit(main())
