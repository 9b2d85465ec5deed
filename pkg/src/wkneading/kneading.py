"""Kneading series, the kneading matrix and the identities relating them.

Row ``j`` of the kneading matrix is built from the two germs based at the
cutting point ``c_j``: ``c_j+`` and ``c_j-`` for ``j >= 1`` (with signs
``+1`` and ``-1``), and ``a+`` and ``b-`` for ``j = 0`` (both with sign
``+1``).  Column ``k`` compares orbit points with ``c_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .series import SeriesMatrix, TruncatedSeries, det
from .system import (
    Germ,
    GermInterval,
    WeightedSystem,
    germ_orbit,
    image_states,
    minus,
    orbit,
    plus,
    preimages,
    sigma,
)

DEFAULT_N = 64
DEFAULT_N_ID = 12


def row_germs(sys: WeightedSystem, j: int) -> list[tuple[Germ, int]]:
    """The two germs of row ``j`` with their signs ``eps*``."""
    if j == 0:
        return [(plus(sys.a), 1), (minus(sys.b), 1)]
    c = sys.c(j)
    return [(plus(c), 1), (minus(c), -1)]


def _zero(sys, degree):
    return TruncatedSeries.zero(degree, sys.one)


def theta_all(sys: WeightedSystem, germ: Germ, N: int) -> list[TruncatedSeries]:
    """``[theta(germ, t; c_k) for k = 0..l+1]`` to degree ``N``.

    The last entry uses the convention ``theta(.; c_{l+1}) = -theta(.; c_0)``.
    """
    half = sys.half
    cols = [[] for _ in range(sys.ell + 1)]
    for x, sg, _, _ in germ_orbit(sys, germ, N):
        for k in range(sys.ell + 1):
            cols[k].append(sg * sigma(x, sys.c(k), half))
    out = [TruncatedSeries(c) for c in cols]
    out.append(-out[0])
    return out


def theta(sys: WeightedSystem, germ: Germ, k: int, N: int) -> TruncatedSeries:
    """``theta(germ, t; c_k)``; ``k = l+1`` gives ``-theta(germ, t; c_0)``."""
    if not 0 <= k <= sys.ell + 1:
        raise ValueError(f"cut index {k} outside 0..{sys.ell + 1}")
    return theta_all(sys, germ, N)[k]


def kneading_matrix(sys: WeightedSystem, N: int = DEFAULT_N) -> SeriesMatrix:
    rows = []
    for j in range(sys.ell + 1):
        acc = [_zero(sys, N)] * (sys.ell + 1)
        for germ, eps in row_germs(sys, j):
            th = theta_all(sys, germ, N)
            acc = [r + th[k] * eps for k, r in enumerate(acc)]
        rows.append(acc)
    return SeriesMatrix(rows)


def reduced_matrix(sys: WeightedSystem, N: int = DEFAULT_N) -> SeriesMatrix:
    R = kneading_matrix(sys, N)
    idx = range(1, sys.ell + 1)
    return R.submatrix(idx, idx)


def kneading_det(sys: WeightedSystem, N: int = DEFAULT_N) -> TruncatedSeries:
    return kneading_matrix(sys, N).det()


# ---------------------------------------------------------------------------
# scalar evaluation with exact tails on eventually periodic orbits


class OrbitSum:
    """``t -> sum_m t^m w^m(germ) v(f^m germ)`` for real ``t``.

    ``w`` is ``[sg]`` when ``signed`` else ``g``; ``v`` returns a vector.
    When the orbit closes up within ``n_max`` steps the periodic tail is
    summed as a geometric series, otherwise the sum stops at ``m = n_max``.
    The orbit is followed once; evaluation is a polynomial in ``t``.
    """

    def __init__(self, sys: WeightedSystem, germ: Germ, n_max: int, values, signed: bool):
        orb = orbit(sys, germ, n_max)
        self.start = orb.start
        factors = []
        for x in orb.germs:
            i = sys.branch_of(x)
            f = float(sys.weights[i])
            factors.append(f * sys.signs[i] if signed else f)
        coef, w = [], 1.0
        for x, f in zip(orb.germs, factors):
            coef.append(w * np.asarray(values(x), dtype=float))
            w *= f
        self.coef = np.array(coef)
        if self.start is not None:
            self.period = len(orb.germs) - self.start
            self.cycle_weight = math.prod(factors[self.start :])

    @property
    def exact_tail(self) -> bool:
        return self.start is not None

    def __call__(self, t: float):
        if self.start is None:
            return P.polyval(t, self.coef)
        head = P.polyval(t, self.coef[: self.start]) if self.start else 0.0
        cyc = t**self.start * P.polyval(t, self.coef[self.start :])
        return head + cyc / (1.0 - self.cycle_weight * t**self.period)


def _sigma_vector(sys: WeightedSystem):
    cuts = sys.points[: sys.ell + 1]
    return lambda x: [0.5 if x > (c, 0) else -0.5 for c in cuts]


class ScalarKneading:
    """Kneading matrix and generating functions at real ``t`` for one system."""

    def __init__(self, sys: WeightedSystem, n_max: int = 256):
        self.sys = sys
        self.n_max = n_max
        self._theta: dict = {}
        self._gen: dict = {}
        self.rows = [row_germs(sys, j) for j in range(sys.ell + 1)]

    def theta_sum(self, germ: Germ) -> OrbitSum:
        if germ not in self._theta:
            self._theta[germ] = OrbitSum(self.sys, germ, self.n_max, _sigma_vector(self.sys), True)
        return self._theta[germ]

    def gen_sum(self, germ: Germ) -> OrbitSum:
        if germ not in self._gen:
            self._gen[germ] = OrbitSum(self.sys, germ, self.n_max, lambda x: 1.0, False)
        return self._gen[germ]

    def theta(self, germ: Germ, t: float) -> np.ndarray:
        """``(theta(germ, t; c_k))_{k=0..l}``."""
        return self.theta_sum(germ)(t)

    def generating(self, germ: Germ, t: float) -> float:
        return float(self.gen_sum(germ)(t))

    def generating_point(self, x, t: float) -> float:
        return 0.5 * (self.generating(minus(x), t) + self.generating(plus(x), t))

    def matrix(self, t: float) -> np.ndarray:
        ell = self.sys.ell
        out = np.zeros((ell + 1, ell + 1))
        for j, pairs in enumerate(self.rows):
            for germ, eps in pairs:
                out[j] += eps * self.theta(germ, t)
        return out

    def det(self, t: float) -> float:
        return float(np.linalg.det(self.matrix(t)))

    def exact_tails(self) -> bool:
        return all(self.theta_sum(g).exact_tail for pairs in self.rows for g, _ in pairs)


def theta_vector(sys: WeightedSystem, germ: Germ, t: float, n_max: int = 256) -> np.ndarray:
    """``(theta(germ, t; c_k))_{k=0..l}`` at a real ``t``."""
    return OrbitSum(sys, germ, n_max, _sigma_vector(sys), True)(t)


def generating_value(sys: WeightedSystem, germ: Germ, t: float, n_max: int = 256) -> float:
    """``G(germ, t) = sum_n t^n g^n(germ)`` at a real ``t``."""
    return float(OrbitSum(sys, germ, n_max, lambda x: 1.0, False)(t))


def kneading_matrix_at(sys: WeightedSystem, t: float, n_max: int = 256) -> np.ndarray:
    """The kneading matrix evaluated at a real ``t``."""
    return ScalarKneading(sys, n_max).matrix(t)


def orbits_periodic(sys: WeightedSystem, n_max: int = 256) -> bool:
    """True when every cutting-point germ has an eventually periodic orbit within ``n_max``."""
    return all(
        orbit(sys, g, n_max).start is not None
        for j in range(sys.ell + 1)
        for g, _ in row_germs(sys, j)
    )


# ---------------------------------------------------------------------------
# preimage series


def gamma(sys: WeightedSystem, y, J: GermInterval, N: int) -> TruncatedSeries:
    """``gamma_{y,J}`` to degree ``N``.

    Each state of :func:`image_states` is ``f^p(J ∩ alpha)`` for a
    ``p``-cylinder ``alpha``, so ``y`` has exactly one preimage in ``J ∩ alpha``
    when it lies in that image.
    """
    coeffs = []
    for states in image_states(sys, J, N):
        acc = sys.one * 0
        for K, w in states.items():
            if y in K:
                acc += w
        coeffs.append(acc)
    return TruncatedSeries(coeffs)


def gamma_direct(sys: WeightedSystem, y, J: GermInterval, N: int) -> TruncatedSeries:
    """Same series by explicit preimage enumeration; exponential in ``N``."""
    zero = sys.one * 0
    coeffs = []
    for level in preimages(sys, y, N):
        coeffs.append(sum((w for x, w in level if x in J), zero))
    return TruncatedSeries(coeffs)


def delta_theta(sys: WeightedSystem, J: GermInterval, N: int) -> list[TruncatedSeries]:
    """``theta(v; c_k) - theta(u; c_k)`` for ``J = <u, v>`` and ``k = 0..l``."""
    if J.empty:
        return [_zero(sys, N)] * (sys.ell + 1)
    tv = theta_all(sys, J.hi, N)
    tu = theta_all(sys, J.lo, N)
    return [tv[k] - tu[k] for k in range(sys.ell + 1)]


def mki_residual(
    sys: WeightedSystem, J: GermInterval, N_id: int = DEFAULT_N_ID, R: SeriesMatrix | None = None
) -> list[TruncatedSeries]:
    """``sum_{j>=1} gamma_{c_j,J} R_jk - Delta_J theta(.; c_k)`` for ``k = 0..l``."""
    R = R if R is not None else kneading_matrix(sys, N_id)
    gam = [gamma(sys, sys.c(j), J, N_id) for j in range(1, sys.ell + 1)]
    rhs = delta_theta(sys, J, N_id)
    out = []
    for k in range(sys.ell + 1):
        lhs = _zero(sys, N_id)
        for j in range(1, sys.ell + 1):
            lhs = lhs + gam[j - 1] * R[j, k]
        out.append(lhs - rhs[k])
    return out


def m_series(sys: WeightedSystem, j: int, u: Germ, N: int) -> TruncatedSeries:
    """``m_{c_j}(u, t)``: preimages of ``c_j`` weighted by their side of ``u``."""
    if j == 0:
        return TruncatedSeries.constant(sys.half, N)
    c = sys.c(j)
    left = gamma(sys, c, GermInterval(plus(sys.a), u), N)
    right = gamma(sys, c, GermInterval(u, minus(sys.b)), N)
    return (left - right) * sys.half


def f_matrix(sys: WeightedSystem, N: int) -> SeriesMatrix:
    """Matrix ``F`` with ``F R = R'``."""
    cache: dict = {}

    def m(j, u):
        key = (j, u)
        if key not in cache:
            cache[key] = m_series(sys, j, u, N)
        return cache[key]

    rows = []
    for i in range(sys.ell + 1):
        row = [_zero(sys, N)] * (sys.ell + 1)
        for c_hat, eps in row_germs(sys, i):
            orb = germ_orbit(sys, c_hat, N + 1)
            for q in range(N + 1):
                x, sg, _, _ = orb[q + 1]
                if not sg:
                    continue
                coef = sg * eps
                for j in range(sys.ell + 1):
                    row[j] = row[j] + m(j, x).shift(q) * coef
        rows.append(row)
    return SeriesMatrix(rows)


def fr_residual(sys: WeightedSystem, N: int) -> SeriesMatrix:
    """``F R - R'`` to degree ``N``."""
    R = kneading_matrix(sys, N + 1)
    F = f_matrix(sys, N)
    Rn = SeriesMatrix([[e.truncate(N) for e in r] for r in R.rows])
    return (F @ Rn) - R.derivative()


# ---------------------------------------------------------------------------
# comparison with the classical kneading determinant


@dataclass
class MTReport:
    eta: dict  # (germ, k) -> series
    N_rows: list  # l x (l+1) classical kneading matrix
    minors: list  # D_j
    d_mt: list  # (-1)^j D_j / (1 - s_j g_j t)
    det_R: TruncatedSeries
    det_B: TruncatedSeries
    H: TruncatedSeries
    kappa: list
    key_residual: float
    mt_spread: float
    mt_vs_det: float
    relation_residual: float

    def ok(self, tol: float = 1e-10) -> bool:
        return max(self.key_residual, self.mt_spread, self.mt_vs_det, self.relation_residual) <= tol


def eta_all(sys: WeightedSystem, germ: Germ, N: int) -> list[TruncatedSeries]:
    """``eta(germ, t; I_k) = theta(.; c_k) - theta(.; c_{k+1})`` for ``k = 0..l``."""
    th = theta_all(sys, germ, N)
    return [th[k] - th[k + 1] for k in range(sys.ell + 1)]


def key_sum(sys: WeightedSystem, germ: Germ, N: int) -> TruncatedSeries:
    """``sum_k (1 - t s_k g_k) eta(germ, t; I_k)``; identically one."""
    eta = eta_all(sys, germ, N)
    acc = _zero(sys, N)
    for k, e in enumerate(eta):
        sk_gk = sys.signs[k] * sys.weights[k]
        acc = acc + e - e.shift(1) * sk_gk
    return acc


def _one_minus(sys, c, N):
    return TruncatedSeries.constant(sys.one, N) - TruncatedSeries.monomial(1, N, sys.one) * c


def boundary_factors(sys: WeightedSystem, N: int):
    """``H(t)`` and ``kappa_i(t)`` for ``i = 1..l``."""
    ell = sys.ell
    sg = [sys.signs[i] * sys.weights[i] for i in range(ell + 1)]
    H = _one_minus(sys, (sg[0] + sg[ell]) * sys.half, N)
    t = TruncatedSeries.monomial(1, N, sys.one)
    kappa = [t * ((sg[i - 1] - sg[i]) * sys.half) for i in range(1, ell + 1)]
    return H, kappa


def mt_relations(sys: WeightedSystem, N: int, germs: list[Germ] | None = None) -> MTReport:
    """Classical (unreduced) kneading determinant versus ``det R`` and ``det B``.

    ``germs`` are the sample points for the key identity; the cutting-point
    germs are always included.
    """
    ell = sys.ell
    R = kneading_matrix(sys, N)
    det_R = R.det()
    B = R.submatrix(range(1, ell + 1), range(1, ell + 1))
    det_B = B.det()

    eta = {}
    rows = []
    for i in range(1, ell + 1):
        ep = eta_all(sys, plus(sys.c(i)), N)
        em = eta_all(sys, minus(sys.c(i)), N)
        rows.append([p - m for p, m in zip(ep, em)])
        for k in range(ell + 1):
            eta[(plus(sys.c(i)), k)] = ep[k]
            eta[(minus(sys.c(i)), k)] = em[k]

    minors, d_mt = [], []
    for j in range(ell + 1):
        sub = [[r[k] for k in range(ell + 1) if k != j] for r in rows]
        Dj = det(sub)
        minors.append(Dj)
        q = _one_minus(sys, sys.signs[j] * sys.weights[j], N)
        val = Dj * q.inverse()
        d_mt.append(-val if j % 2 else val)

    sample = list(germs or []) + [g for j in range(ell + 1) for g, _ in row_germs(sys, j)]
    key = max(
        (key_sum(sys, g, N) - TruncatedSeries.constant(sys.one, N)).max_abs() for g in sample
    )
    spread = max((d - d_mt[0]).max_abs() for d in d_mt)
    vs_det = (d_mt[0] - det_R).max_abs()

    H, kappa = boundary_factors(sys, N)
    relation = (H * det_R - det_B).max_abs()

    return MTReport(
        eta=eta,
        N_rows=rows,
        minors=minors,
        d_mt=d_mt,
        det_R=det_R,
        det_B=det_B,
        H=H,
        kappa=kappa,
        key_residual=float(key),
        mt_spread=float(spread),
        mt_vs_det=float(vs_det),
        relation_residual=float(relation),
    )


def boundary_column_residual(sys: WeightedSystem, N: int) -> float:
    """Max coefficient of ``R (H, kappa_1, ..., kappa_l)^T - (1, 0, ..., 0)^T``."""
    R = kneading_matrix(sys, N)
    H, kappa = boundary_factors(sys, N)
    v = [H] + kappa
    worst = 0.0
    for j in range(sys.ell + 1):
        acc = _zero(sys, N)
        for k in range(sys.ell + 1):
            acc = acc + R[j, k] * v[k]
        target = TruncatedSeries.constant(sys.one if j == 0 else sys.one * 0, N)
        worst = max(worst, (acc - target).max_abs())
    return worst
