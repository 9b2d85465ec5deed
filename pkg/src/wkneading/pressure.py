"""Pressure as the first positive zero of the kneading determinant.

The determinant is scanned on a grid over ``(0, t_max]`` and the first sign
change is refined by bisection.  ``t_max`` stays a margin below ``1/rho_inf``,
where the kneading series are known to converge.

Two evaluations of ``det R(t)`` are available:

``"orbit"`` (default)
    Each entry of ``R(t)`` is summed along the cutting-point orbits.  An
    eventually periodic orbit contributes its tail as an exact geometric
    series, so no truncation error remains.  Other orbits are cut at ``N``.
``"series"``
    Horner evaluation of the truncated determinant series ``D_N``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .cylinders import norm_sequences
from .kneading import ScalarKneading, kneading_det, reduced_matrix
from .system import WeightedSystem

DEFAULT_TOL = 1e-12
DEFAULT_GRID = 1000
DEFAULT_MARGIN = 0.02
DEFAULT_RHO_DEPTH = 24


class PressurePreconditionError(ValueError):
    pass


class HypothesisWarning(UserWarning):
    pass


@dataclass
class ZeroSearch:
    t_star: float | None
    bracket: tuple | None
    status: str  # "found", "none", "possible even-order zero"
    scan: list = field(default_factory=list, repr=False)


@dataclass
class PressureResult:
    t_star: float | None
    pressure: float | None
    rho1: float | None
    t_max: float
    bracket: tuple | None
    status: str
    method: str
    rho1_hat: float
    rho_inf_hat: float
    stability_gap: float | None
    stable: bool
    warnings: list = field(default_factory=list)
    scan: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "t_star": self.t_star,
            "rho1": self.rho1,
            "pressure": self.pressure,
            "status": self.status,
            "method": self.method,
            "t_max": self.t_max,
            "bracket": list(self.bracket) if self.bracket else None,
            "rho1_estimate": self.rho1_hat,
            "rho_inf_estimate": self.rho_inf_hat,
            "truncation_gap": self.stability_gap,
            "stable": self.stable,
            "warnings": list(self.warnings),
        }


def first_zero(fn, t_max: float, grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL,
               dip_tol: float = 1e-9) -> ZeroSearch:
    """First sign change of ``fn`` on ``(0, t_max]``, refined by bisection.

    A local minimum of ``|fn|`` that stays on one side of zero but gets within
    ``dip_tol`` (relative to ``|fn(0)|``) is reported as a possible zero of
    even order instead of being skipped.
    """
    ts = [float(t) for t in np.linspace(0.0, t_max, grid + 1)[1:]]
    vals = [fn(0.0)]
    scan = [(0.0, vals[0])]
    scale = max(abs(vals[0]), 1.0)
    prev_t = 0.0
    for k, t in enumerate(ts):
        v = fn(t)
        scan.append((t, v))
        vals.append(v)
        prev_v = vals[-2]
        if v == 0.0:
            nxt = fn(ts[k + 1]) if k + 1 < len(ts) else -prev_v
            status = "found" if (nxt > 0) != (prev_v > 0) else "possible even-order zero"
            return ZeroSearch(t, (t, t), status, scan)
        if (v > 0) != (prev_v > 0):
            lo, hi = _bisect(fn, prev_t, t, prev_v, tol)
            return ZeroSearch(0.5 * (lo + hi), (lo, hi), "found", scan)
        if len(vals) >= 3 and abs(vals[-2]) <= abs(vals[-3]) and abs(vals[-2]) <= abs(v):
            dip = _dip(fn, scan[-3][0], t, dip_tol * scale)
            if dip is not None:
                h = 10 * tol
                a, b = fn(dip - h), fn(dip + h)
                if (a > 0) != (b > 0):
                    lo, hi = _bisect(fn, dip - h, dip + h, a, tol)
                    return ZeroSearch(0.5 * (lo + hi), (lo, hi), "found", scan)
                return ZeroSearch(dip, None, "possible even-order zero", scan)
        prev_t = t
    return ZeroSearch(None, None, "none", scan)


def _bisect(fn, lo: float, hi: float, flo: float, tol: float) -> tuple[float, float]:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def _dip(fn, lo: float, hi: float, thresh: float) -> float | None:
    """Minimiser of ``|fn|`` on ``[lo, hi]`` when the minimum is below ``thresh``."""
    res = minimize_scalar(lambda t: abs(fn(t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14})
    return float(res.x) if res.fun <= thresh else None


def _check_weights(sys: WeightedSystem) -> None:
    ws = [float(g) for g in sys.weights]
    if any(g < 0 for g in ws):
        raise PressurePreconditionError("pressure requires all weights g_i >= 0")
    if not any(g > 0 for g in ws):
        raise PressurePreconditionError("pressure requires at least one positive weight")


def rho_hats(sys: WeightedSystem, depth: int = DEFAULT_RHO_DEPTH) -> tuple[float, float]:
    """``(||g^n||_1^{1/n}, ||g^n||_inf^{1/n})`` at ``n = depth``."""
    return _rho_estimates(sys, depth)[:2]


def _rho_estimates(sys: WeightedSystem, depth: int):
    """Root estimates ``r1, rinf`` and ratio estimates ``q1, qinf`` at ``n = depth``."""
    ones, sups = norm_sequences(sys, depth)

    def root(seq):
        return float(seq[depth]) ** (1.0 / depth) if seq[depth] else 0.0

    def ratio(seq):
        return float(seq[depth]) / float(seq[depth - 1]) if seq[depth - 1] else 0.0

    return root(ones), root(sups), ratio(ones), ratio(sups)


def det_function(sys: WeightedSystem, N: int, method: str, reduced: bool = False):
    """Callable ``t -> det R(t)`` (or ``det B(t)``)."""
    if method == "series":
        D = reduced_matrix(sys, N).det() if reduced else kneading_det(sys, N)
        D = D.to_float()
        return D.eval
    if method != "orbit":
        raise ValueError(f"unknown evaluation method {method!r}")

    ev = ScalarKneading(sys, n_max=N)

    def fn(t):
        R = ev.matrix(t)
        if reduced:
            R = R[1:, 1:]
        return float(np.linalg.det(R))

    fn.exact_tails = ev.exact_tails()
    return fn


def pressure(
    sys: WeightedSystem,
    N: int = 64,
    tol: float = DEFAULT_TOL,
    grid: int = DEFAULT_GRID,
    margin: float = DEFAULT_MARGIN,
    method: str = "orbit",
    t_bound: float = 1.0,
    rho_depth: int = DEFAULT_RHO_DEPTH,
) -> PressureResult:
    """Smallest positive zero ``t*`` of ``det R`` and the pressure ``-log t*``."""
    _check_weights(sys)
    r1, rinf, q1, qinf = _rho_estimates(sys, rho_depth)
    notes = []
    # n-th roots converge like C^(1/n); successive ratios settle much faster
    # when the norms grow geometrically, so either one can flag equality
    if rinf >= r1 * (1 - 1e-9) or (q1 > 0 and qinf >= q1 * (1 - 1e-6)):
        notes.append("hypothesis rho_1 > rho_inf not visibly satisfied")
        warnings.warn(notes[-1], HypothesisWarning, stacklevel=2)
    t_max = t_bound if rinf <= 0 else min(t_bound, (1.0 - margin) / rinf)

    fn = det_function(sys, N, method)
    search = first_zero(fn, t_max, grid, tol)
    gap, stable = None, True
    if search.status == "found":
        if getattr(fn, "exact_tails", False):
            gap = 0.0
        else:
            other = first_zero(det_function(sys, 2 * N, method), t_max, grid, tol)
            gap = abs(other.t_star - search.t_star) if other.t_star is not None else math.inf
        stable = gap < 10 * tol
        if not stable:
            notes.append(f"unstable under truncation: |t*(N) - t*(2N)| = {gap:.3g}")
    elif search.status == "none":
        notes.append("no zero found <= t_max")
    else:
        notes.append(search.status)

    t_star = search.t_star if search.status == "found" else None
    return PressureResult(
        t_star=t_star,
        pressure=-math.log(t_star) if t_star else None,
        rho1=1.0 / t_star if t_star else None,
        t_max=t_max,
        bracket=search.bracket,
        status=search.status,
        method=method,
        rho1_hat=r1,
        rho_inf_hat=rinf,
        stability_gap=gap,
        stable=stable,
        warnings=notes,
        scan=search.scan,
    )


@dataclass
class SpuriousZeroReport:
    zero_R: float | None
    zero_B: float | None
    differ: bool


def spurious_zero_demo(sys: WeightedSystem, N: int = 64, tol: float = 1e-9,
                       method: str = "orbit", t_bound: float = 1.0) -> SpuriousZeroReport:
    """First zeros of ``det R`` and ``det B`` on the same search range."""
    _check_weights(sys)
    _, rinf = rho_hats(sys)
    t_max = t_bound if rinf <= 0 else min(t_bound, (1.0 - DEFAULT_MARGIN) / rinf)
    zr = first_zero(det_function(sys, N, method), t_max).t_star
    zb = first_zero(det_function(sys, N, method, reduced=True), t_max).t_star
    if zr is None or zb is None:
        differ = (zr is None) != (zb is None)
    else:
        differ = abs(zr - zb) > tol
    return SpuriousZeroReport(zr, zb, differ)


def brute_force_pressure(sys: WeightedSystem, n_max: int) -> list[float]:
    """``(1/n) log ||g^n||_1`` for ``n = 1..n_max``."""
    ones, _ = norm_sequences(sys, n_max)
    return [math.log(float(ones[n])) / n if ones[n] else -math.inf for n in range(1, n_max + 1)]
