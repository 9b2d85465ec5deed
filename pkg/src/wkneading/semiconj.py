"""Weighted lap function, the semi-conjugacy ``phi_t`` and piecewise-linear models.

For ``0 < t < 1/rho_1`` the map ``phi_t(x) = L(<a+, x>, t) / L(]a, b[, t)``
sends germs monotonically into ``[0, 1]`` and turns every branch ``f_i`` into
an affine map of slope ``s_i / (t g_i)``.  At ``t = 1/rho_1`` the ratio of lap
functions is replaced by its limit ``Lambda``, computed through the kneading
matrix where the pole of ``L`` cancels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cylinders import _to_fraction, walk
from .kneading import ScalarKneading, gamma, row_germs
from .pressure import PressureResult, pressure
from .series import TruncatedSeries
from .system import (
    FLOAT,
    Germ,
    GermInterval,
    WeightedSystem,
    germ_orbit,
    germ_step,
    image_states,
    minus,
    plus,
    singleton,
    validate_system,
    whole,
)

DEFAULT_LAP_N = 48
DEFAULT_TAIL_TOL = 1e-8
DEFAULT_DELTAS = (1e-2, 1e-3, 1e-4)


class TailError(ArithmeticError):
    """The truncated lap series has not converged at the requested ``t``."""


class LambdaUnstable(ArithmeticError):
    pass


class IllConditioned(UserWarning):
    pass


# ---------------------------------------------------------------------------
# generating functions and lap series


def generating(sys: WeightedSystem, germ: Germ, N: int) -> TruncatedSeries:
    """``G(germ, t) = sum_n t^n g^n(germ)`` to degree ``N``."""
    return TruncatedSeries(g for _, _, _, g in germ_orbit(sys, germ, N))


def generating_point(sys: WeightedSystem, x, N: int) -> TruncatedSeries:
    """``G(x, t)``, the mean over both germs at an interior point ``x``."""
    return (generating(sys, minus(x), N) + generating(sys, plus(x), N)) * sys.half


def lap(sys: WeightedSystem, J: GermInterval, N: int) -> TruncatedSeries:
    """``L(J, t) = sum_{j>=1} gamma_{c_j,J}(t) G(c_j, t)`` to degree ``N``."""
    acc = TruncatedSeries.zero(N, sys.one)
    if J.empty:
        return acc
    for j in range(1, sys.ell + 1):
        c = sys.c(j)
        acc = acc + gamma(sys, c, J, N) * generating_point(sys, c, N)
    return acc


def lap_direct(sys: WeightedSystem, J: GermInterval, N: int, **caps) -> TruncatedSeries:
    """``L(J, t)`` from its definition: boundary germs of ``(n+1)``-cylinders inside ``J``.

    Coefficient ``n`` is ``1/2 sum_{alpha in Z_{n+1}} g^n_alpha (chi_J(u) + chi_J(v))``.
    Exponential in ``N``; used as an oracle for :func:`lap`.
    """
    coeffs = [sys.one * 0 for _ in range(N + 1)]
    if J.empty:
        return TruncatedSeries(coeffs)
    conv = _to_fraction if sys.exact else float

    def visit(w, node):
        u, v = (conv(x) for x in w.endpoints(node))
        inside = (u in J) + (v in J)
        if inside:
            # g^n of an (n+1)-cylinder leaves out the weight of the last symbol
            gn = w.num(1)
            for i in node.word[:-1]:
                gn *= w.w[i]
            coeffs[node.depth - 1] += conv(gn) * sys.half * inside

    walk(sys, N + 1, visit, keep_words=True, **caps)
    return TruncatedSeries(coeffs)


def lap_point(sys: WeightedSystem, x, N: int) -> TruncatedSeries:
    """``L({x}, t)``: ``t^p g^p(x) G(c_i, t)`` when ``f^p x = c_i``, else 0."""
    return lap(sys, singleton(x), N)


def lap_value(sys: WeightedSystem, J: GermInterval, t: float, N: int,
              G: dict | None = None, ev: ScalarKneading | None = None) -> float:
    """``L(J, t)`` as a number: the preimage sum to depth ``N`` times ``G(c_j, t)``."""
    if J.empty:
        return 0.0
    ev = ev or ScalarKneading(sys)
    if G is None:
        G = {j: ev.generating_point(sys.c(j), t) for j in range(1, sys.ell + 1)}
    cuts = [(j, sys.c(j)) for j in range(1, sys.ell + 1)]
    total = 0.0
    for states in image_states(sys, J, N, weight=lambda g: t * float(g)):
        for K, w in states.items():
            for j, c in cuts:
                if c in K:
                    total += float(w) * G[j]
    return total


# ---------------------------------------------------------------------------
# phi_t


def tail_estimate(series: TruncatedSeries, t: float, window: int = 10) -> float:
    """Relative size of the neglected tail of ``series`` at ``t``.

    The ratio of successive terms is estimated from the last ``window``
    coefficients and the tail is bounded as a geometric series.
    """
    N = series.degree
    terms = [abs(float(c)) * t**n for n, c in enumerate(series.coeffs)]
    total = sum(terms)
    last, first = terms[N], terms[max(N - window, 0)]
    if last == 0.0:
        return 0.0
    if first == 0.0:
        return math.inf
    r = (last / first) ** (1.0 / min(window, N))
    if r >= 1.0:
        return math.inf
    return last * r / (1.0 - r) / total


class SemiConjugacy:
    """``phi_t`` for one system and one ``t``."""

    def __init__(self, sys: WeightedSystem, t: float, N: int = DEFAULT_LAP_N,
                 tail_tol: float = DEFAULT_TAIL_TOL, check_tail: bool = True):
        if any(float(g) <= 0 for g in sys.weights):
            raise ValueError("phi_t needs all weights g_i > 0")
        if not t > 0:
            raise ValueError("t must be positive")
        self.sys, self.t, self.N = sys, t, N
        self.ev = ScalarKneading(sys)
        self.G = {j: self.ev.generating_point(sys.c(j), t) for j in range(1, sys.ell + 1)}
        self.total_series = lap(sys, whole(sys), N)
        self.tail = tail_estimate(self.total_series, t)
        if check_tail and self.tail > tail_tol:
            raise TailError(
                f"lap series tail at t={t} is {self.tail:.2g} (> {tail_tol:g}); increase N "
                "or lower t"
            )
        self.total = lap_value(sys, whole(sys), t, N, self.G, self.ev)
        self._cache: dict = {}

    def lap(self, J: GermInterval) -> float:
        return lap_value(self.sys, J, self.t, self.N, self.G, self.ev)

    def __call__(self, germ: Germ) -> float:
        if germ not in self._cache:
            J = GermInterval(plus(self.sys.a), germ)
            self._cache[germ] = self.lap(J) / self.total
        return self._cache[germ]

    def jump(self, x) -> float:
        """``phi_t(x+) - phi_t(x-)``."""
        return self(plus(x)) - self(minus(x))


def phi_t(sys: WeightedSystem, t: float, germ: Germ, N: int = DEFAULT_LAP_N) -> float:
    return SemiConjugacy(sys, t, N)(germ)


# ---------------------------------------------------------------------------
# models


@dataclass
class ModelMap:
    """Affine branches on intervals of ``[0, 1]``."""

    t: float
    intervals: list  # [(lo, hi)]
    slopes: list
    intercepts: list
    signs: tuple
    weights: tuple
    degenerate: list
    active: list = field(default_factory=list)  # surviving indices
    cut_images: list = field(default_factory=list)
    continuous: bool | None = None
    critical: bool = False

    def __call__(self, i: int, y: float) -> float:
        return self.slopes[i] * y + self.intercepts[i]

    def disjoint(self) -> bool:
        live = [self.intervals[i] for i in self.active]
        return all(a[1] < b[0] for a, b in zip(live, live[1:]))

    def rows(self) -> list[dict]:
        return [
            {
                "i": i,
                "lo": self.intervals[i][0],
                "hi": self.intervals[i][1],
                "slope": self.slopes[i],
                "intercept": self.intercepts[i],
                "degenerate": self.degenerate[i],
            }
            for i in range(len(self.intervals))
        ]

    def as_system(self, snap: float = 1e-9, name: str = "critical model") -> WeightedSystem:
        """The surviving branches as a float :class:`WeightedSystem` on ``[0, 1]``.

        Endpoint images within ``snap`` of a cutting point are moved onto it,
        so orbits that are Markov in the original system stay Markov here.
        """
        live = self.active
        cuts = [self.intervals[i][0] for i in live[1:]]
        points = [0.0] + cuts + [1.0]

        def settle(y):
            best = min(points, key=lambda c: abs(c - y))
            return best if abs(best - y) <= snap else min(max(y, 0.0), 1.0)

        branches = []
        for k, i in enumerate(live):
            lo, hi = points[k], points[k + 1]
            y0, y1 = settle(self(i, lo)), settle(self(i, hi))
            slope = (y1 - y0) / (hi - lo)
            branches.append({"slope": slope, "intercept": y0 - slope * lo, "weight": self.weights[i]})
        return validate_system(
            {"interval": [0.0, 1.0], "cuts": cuts, "branches": branches, "mode": FLOAT, "name": name}
        )


def model_map(sys: WeightedSystem, t: float, N: int = DEFAULT_LAP_N,
              phi: SemiConjugacy | None = None) -> ModelMap:
    """The expanding model ``(I~_{t,i}, f~_{t,i})`` at a subcritical ``t``."""
    phi = phi or SemiConjugacy(sys, t, N)
    intervals, slopes, intercepts, degenerate = [], [], [], []
    for i in range(sys.ell + 1):
        left, right = plus(sys.c(i)), minus(sys.c(i + 1))
        lo, hi = phi(left), phi(right)
        slope = sys.signs[i] / (t * float(sys.weights[i]))
        anchor = phi(germ_step(sys, left))
        intervals.append((lo, hi))
        slopes.append(slope)
        intercepts.append(anchor - slope * lo)
        degenerate.append(hi - lo <= 1e-15)
    return ModelMap(
        t=t,
        intervals=intervals,
        slopes=slopes,
        intercepts=intercepts,
        signs=sys.signs,
        weights=tuple(float(g) for g in sys.weights),
        degenerate=degenerate,
        active=list(range(sys.ell + 1)),
    )


def semiconj_residual(sys: WeightedSystem, t: float, germs: list[Germ], N: int = DEFAULT_LAP_N,
                      phi: SemiConjugacy | None = None, model: ModelMap | None = None) -> float:
    """``max |phi_t(f x) - f~_{t,i}(phi_t(x))|`` over ``germs``."""
    phi = phi or SemiConjugacy(sys, t, N)
    model = model or model_map(sys, t, N, phi)
    worst = 0.0
    for x in germs:
        i = sys.branch_of(x)
        worst = max(worst, abs(phi(germ_step(sys, x)) - model(i, phi(x))))
    return worst


def h_crosscheck(sys: WeightedSystem, t: float, germ: Germ, ev: ScalarKneading | None = None,
                 cond_warn: float = 1e10) -> float:
    """``phi_t(germ)`` from the kneading matrix instead of the lap series.

    ``h(x) = theta(x) R(t)^{-1} (0, G(c_1), ..., G(c_l))^T``, normalised by
    its values at ``a+`` and ``b-``.  With one interior cutting point
    ``h(x) = theta(x; c_1)`` is enough.
    """
    ev = ev or ScalarKneading(sys)
    if sys.ell == 1:
        def h(x):
            return ev.theta(x, t)[1]
    else:
        R = ev.matrix(t)
        cond = np.linalg.cond(R)
        if cond > cond_warn:
            warnings.warn(f"kneading matrix ill-conditioned at t={t} (cond {cond:.2g})",
                          IllConditioned, stacklevel=2)
        g = np.array([0.0] + [ev.generating_point(sys.c(j), t) for j in range(1, sys.ell + 1)])
        w = np.linalg.solve(R, g)

        def h(x):
            return float(ev.theta(x, t) @ w)

    ha, hb = h(plus(sys.a)), h(minus(sys.b))
    return (h(germ) - ha) / (hb - ha)


# ---------------------------------------------------------------------------
# the critical measure and model


def _adjugate(R: np.ndarray) -> np.ndarray:
    d = R.shape[0]
    adj = np.empty_like(R)
    for i in range(d):
        for j in range(d):
            minor = np.delete(np.delete(R, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * (np.linalg.det(minor) if d > 1 else 1.0)
    return adj


@dataclass
class LambdaResult:
    value: float
    samples: list  # [(delta, ratio)]
    spread: float


class CriticalMeasure:
    """``Lambda(J) = lim_{t -> 1/rho_1} L(J, t) / L(]a, b[, t)``.

    Both lap functions share the pole of ``R(t)^{-1}``; writing
    ``R^{-1} = adj R / det R`` the determinant cancels and the ratio is
    evaluated at ``t = (1 - delta) t*`` for a few ``delta``, then
    extrapolated to ``delta = 0``.
    """

    def __init__(self, sys: WeightedSystem, t_star: float | None = None,
                 deltas=DEFAULT_DELTAS, n_max: int = 256, stable_tol: float = 1e-6,
                 result: PressureResult | None = None):
        if any(float(g) < 0 for g in sys.weights):
            raise ValueError("Lambda needs all weights g_i >= 0")
        self.sys = sys
        if t_star is None:
            result = result or pressure(sys)
            if result.t_star is None:
                raise ValueError("no pressure zero found; Lambda is undefined")
            t_star = result.t_star
        self.t_star = t_star
        self.rho1 = 1.0 / t_star
        self.deltas = tuple(deltas)
        self.stable_tol = stable_tol
        self.ev = ScalarKneading(sys, n_max)
        self._vectors = {}
        for d in self.deltas:
            t = (1.0 - d) * t_star
            R = self.ev.matrix(t)
            g = np.array([0.0] + [self.ev.generating_point(sys.c(j), t) for j in range(1, sys.ell + 1)])
            v = _adjugate(R) @ g
            total = (self.ev.theta(minus(sys.b), t) - self.ev.theta(plus(sys.a), t)) @ v
            self._vectors[d] = (t, v, total)
        self._cache: dict = {}

    def ratio_samples(self, J: GermInterval) -> list[tuple[float, float]]:
        out = []
        for d in self.deltas:
            t, v, total = self._vectors[d]
            if J.empty:
                out.append((d, 0.0))
                continue
            num = (self.ev.theta(J.hi, t) - self.ev.theta(J.lo, t)) @ v
            out.append((d, float(num / total)))
        return out

    def measure(self, J: GermInterval) -> LambdaResult:
        if J in self._cache:
            return self._cache[J]
        samples = self.ratio_samples(J)
        ds = np.array([d for d, _ in samples])
        rs = np.array([r for _, r in samples])
        quad = np.polyfit(ds, rs, len(ds) - 1)
        value = float(np.polyval(quad, 0.0))
        lin = np.polyfit(ds[-2:], rs[-2:], 1)
        spread = abs(value - float(np.polyval(lin, 0.0)))
        res = LambdaResult(value, samples, spread)
        self._cache[J] = res
        return res

    def __call__(self, J: GermInterval) -> float:
        res = self.measure(J)
        if res.spread > self.stable_tol:
            raise LambdaUnstable(
                f"Lambda unstable (delta spread {res.spread:.2g}); increase N"
            )
        return res.value

    def phi(self, x) -> float:
        """``phi(x) = Lambda(]a, x[)``."""
        if x == self.sys.a:
            return 0.0
        return self(GermInterval(plus(self.sys.a), minus(x)))


def is_continuous(sys: WeightedSystem) -> bool:
    """Do the branch extensions agree at every interior cutting point?"""
    tol = 0 if sys.exact else sys.snap
    for i in range(1, sys.ell + 1):
        c = sys.c(i)
        if abs(sys.branches[i - 1](c) - sys.branches[i](c)) > tol:
            return False
    return True


def critical_model(sys: WeightedSystem, measure: CriticalMeasure | None = None,
                   collapse_tol: float = 1e-9) -> ModelMap:
    """The piecewise-linear model at ``t = 1/rho_1``."""
    lam = measure or CriticalMeasure(sys)
    ell = sys.ell
    c_tilde = [0.0] + [lam.phi(sys.c(i)) for i in range(1, ell + 1)] + [1.0]
    active = [i for i in range(ell + 1) if c_tilde[i + 1] - c_tilde[i] > collapse_tol]
    intervals, slopes, intercepts, degenerate = [], [], [], []
    for i in range(ell + 1):
        lo, hi = c_tilde[i], c_tilde[i + 1]
        g = float(sys.weights[i])
        if i in active:
            slope = sys.signs[i] * lam.rho1 / g
            y = germ_step(sys, plus(sys.c(i))).base
            anchor = lam.phi(y)
            intercepts.append(anchor - slope * lo)
        else:
            slope = math.inf if g == 0 else sys.signs[i] * lam.rho1 / g
            intercepts.append(math.nan)
        intervals.append((lo, hi))
        slopes.append(slope)
        degenerate.append(i not in active)
    return ModelMap(
        t=lam.t_star,
        intervals=intervals,
        slopes=slopes,
        intercepts=intercepts,
        signs=sys.signs,
        weights=tuple(float(g) for g in sys.weights),
        degenerate=degenerate,
        active=active,
        cut_images=c_tilde,
        continuous=is_continuous(sys),
        critical=True,
    )


def model_mass(model: ModelMap, depth: int) -> float:
    """Total length of the depth-``n`` cylinders of a critical model."""
    sysm = model.as_system()
    total = 0.0

    def visit(w, node):
        nonlocal total
        if node.depth == depth:
            u, v = w.endpoints(node)
            total += v - u

    walk(sysm, depth, visit)
    return total


def phi_samples(phi, germs: list[Germ]) -> list[tuple]:
    """``(x, dir, phi(x))`` rows for plotting."""
    return [(float(x.base), x.dir, phi(x)) for x in germs]


def cut_germ_rows(sys: WeightedSystem):
    return [g for j in range(sys.ell + 1) for g, _ in row_germs(sys, j)]
