"""Cylinder sets, weighted norms and the fixed-point census.

Cylinders are enumerated depth first.  Each node carries the germ interval
``f^k(alpha)``; a child for branch ``i`` clips it to ``I_i`` and pushes it
forward.  Endpoints in the original coordinates are recovered only where
needed, through the composite affine map or, for callback branches, by
pulling back along the word.

Exact systems are walked with :class:`gmpy2.mpq`, which is about ten times
faster than :class:`fractions.Fraction` for this inner loop.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import gmpy2

from .series import TruncatedSeries
from .system import (
    AMBIGUITY_FACTOR,
    Germ,
    GermAmbiguityError,
    GermInterval,
    WeightedSystem,
    image_states,
    whole,
)

DEFAULT_MAX_DEPTH = 24
DEFAULT_MAX_COUNT = 10**7


class CylinderCapError(RuntimeError):
    pass


def _to_fraction(x):
    if isinstance(x, Fraction) or isinstance(x, float):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


@dataclass(frozen=True)
class Cylinder:
    """``alpha = ]u, v[`` with itinerary ``word`` and image ``f^n(alpha)``."""

    word: tuple
    u: object
    v: object
    sn: int
    gn: object
    image: GermInterval

    @property
    def n(self) -> int:
        return len(self.word)

    @property
    def diam(self):
        return self.v - self.u

    def boundary_images(self) -> tuple[Germ, Germ]:
        """``(f^n u+, f^n v-)``."""
        if self.sn > 0:
            return self.image.lo, self.image.hi
        return self.image.hi, self.image.lo

    def label(self) -> str:
        return "".join(str(i) if i < 10 else f"({i})" for i in self.word)


class _Node(NamedTuple):
    depth: int
    lo: tuple
    hi: tuple
    A: object
    B: object
    s: int
    g: object
    word: tuple


class _Walker:
    """Numeric view of a system used by the enumeration loop."""

    def __init__(self, sys: WeightedSystem):
        self.sys = sys
        self.exact = sys.exact
        num = (lambda v: gmpy2.mpq(v.numerator, v.denominator)) if self.exact else float
        self.num = num
        self.points = [num(p) for p in sys.points]
        self.a, self.b = self.points[0], self.points[-1]
        self.affine = sys.all_affine
        if self.affine:
            self.p = [num(br.slope) for br in sys.branches]
            self.q = [num(br.intercept) for br in sys.branches]
        self.w = [num(g) for g in sys.weights]
        self.signs = sys.signs
        self.snap = sys.snap

    def image(self, i, x):
        if self.affine:
            return self.p[i] * x + self.q[i]
        return self.sys.branches[i](x)

    def settle(self, y):
        if self.exact:
            return y
        pts = self.points
        j = bisect.bisect_left(pts, y)
        best, dist = None, math.inf
        for k in (j - 1, j):
            if 0 <= k < len(pts):
                d = abs(y - pts[k])
                if d < dist:
                    best, dist = pts[k], d
        if dist <= self.snap:
            return best
        if dist <= AMBIGUITY_FACTOR * self.snap:
            raise GermAmbiguityError(f"orbit value {y!r} is {dist:.3g} from cutting point {best!r}")
        return y

    def pieces(self):
        """Per branch: ``(index, c_i+, c_{i+1}-, sign, weight)``."""
        pts = self.points
        return [
            (i, (pts[i], 1), (pts[i + 1], -1), self.signs[i], self.w[i])
            for i in range(len(self.w))
        ]

    def root(self) -> _Node:
        return _Node(0, (self.a, 1), (self.b, -1), self.num(1), self.num(0), 1, self.num(1), ())

    def endpoints(self, node: _Node):
        """``(u, v)`` of the cylinder behind ``node``."""
        first = node.lo[0] if node.s > 0 else node.hi[0]
        last = node.hi[0] if node.s > 0 else node.lo[0]
        if self.affine:
            u, v = (first - node.B) / node.A, (last - node.B) / node.A
        else:
            u, v = first, last
            for i in reversed(node.word):
                lo, hi = self.points[i], self.points[i + 1]
                u = self.sys.branches[i].inverse(u, lo, hi)
                v = self.sys.branches[i].inverse(v, lo, hi)
        return u, v


def walk(
    sys: WeightedSystem,
    n_max: int,
    visit: Callable,
    keep_words: bool = False,
    prune_zero: bool = False,
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_count: int = DEFAULT_MAX_COUNT,
) -> int:
    """Depth-first traversal of ``Z_1 .. Z_{n_max}``; ``visit(walker, node)`` per cylinder.

    Cylinders come in lexicographic word order.  Returns how many were visited.
    """
    if n_max > max_depth:
        raise CylinderCapError(f"depth {n_max} exceeds the cap {max_depth}")
    w = _Walker(sys)
    affine = w.affine
    keep_words = keep_words or not affine
    pieces = w.pieces()[::-1]  # pushed in reverse so that pops come in order
    p, q = (w.p, w.q) if affine else (None, None)
    image, settle = w.image, w.settle
    exact = w.exact
    stack = [w.root()]
    count = 0
    while stack:
        node = stack.pop()
        depth = node[0]
        if depth:
            count += 1
            if count > max_count:
                raise CylinderCapError(f"more than {max_count} cylinders up to depth {n_max}")
            visit(w, _Node._make(node))
        if depth >= n_max:
            continue
        _, lo, hi, A, B, s0, g0, word = node
        for i, cl, ch, s, gi in pieces:
            clo = lo if lo > cl else cl
            chi = hi if hi < ch else ch
            if not clo < chi:
                continue
            g = g0 * gi
            if prune_zero and not g:
                continue
            if affine:
                pi, qi = p[i], q[i]
                ylo, yhi = pi * clo[0] + qi, pi * chi[0] + qi
                if not exact:
                    ylo, yhi = settle(ylo), settle(yhi)
                nA, nB = pi * A, pi * B + qi
            else:
                ylo, yhi = settle(image(i, clo[0])), settle(image(i, chi[0]))
                nA = nB = None
            if s > 0:
                glo, ghi = (ylo, clo[1]), (yhi, chi[1])
            else:
                glo, ghi = (yhi, -chi[1]), (ylo, -clo[1])
            # plain tuples: about a third cheaper than building _Node here
            stack.append(
                (depth + 1, glo, ghi, nA, nB, s0 * s, g, word + (i,) if keep_words else word)
            )
    return count


def _cylinder(w: _Walker, node: _Node) -> Cylinder:
    u, v = w.endpoints(node)
    conv = _to_fraction if w.exact else float
    lo = Germ(conv(node.lo[0]), node.lo[1])
    hi = Germ(conv(node.hi[0]), node.hi[1])
    return Cylinder(node.word, conv(u), conv(v), node.s, conv(node.g), GermInterval(lo, hi))


def enumerate_cylinders(sys: WeightedSystem, n: int, **caps) -> list[Cylinder]:
    """``Z_n`` in lexicographic word order."""
    if n < 1:
        raise ValueError("cylinder depth must be at least 1")
    out = []

    def visit(w, node):
        if node.depth == n:
            out.append(_cylinder(w, node))

    walk(sys, n, visit, keep_words=True, **caps)
    return out


def iter_levels(sys: WeightedSystem, n_max: int, **caps) -> list[list[Cylinder]]:
    """``[Z_1, ..., Z_{n_max}]``."""
    levels = [[] for _ in range(n_max)]
    walk(sys, n_max, lambda w, node: levels[node.depth - 1].append(_cylinder(w, node)),
         keep_words=True, **caps)
    return levels


# ---------------------------------------------------------------------------
# norms


def norms(sys: WeightedSystem, n: int) -> tuple:
    """``(||g^n||_1, ||g^n||_inf)`` by merging cylinders with equal images."""
    one = list(image_states(sys, whole(sys), n, weight=abs))[n]
    sup = list(image_states(sys, whole(sys), n, weight=abs, combine=max))[n]
    zero = sys.one * 0
    return sum(one.values(), zero), max(sup.values(), default=zero)


def norm_sequences(sys: WeightedSystem, n_max: int) -> tuple[list, list]:
    """``[||g^n||_1]`` and ``[||g^n||_inf]`` for ``n = 0..n_max``."""
    zero = sys.one * 0
    ones = [sum(s.values(), zero) for s in image_states(sys, whole(sys), n_max, weight=abs)]
    sups = [
        max(s.values(), default=zero)
        for s in image_states(sys, whole(sys), n_max, weight=abs, combine=max)
    ]
    return ones, sups


def norms_direct(sys: WeightedSystem, n: int, **caps) -> tuple:
    """Same norms by summing over an explicit enumeration of ``Z_n``."""
    cyls = enumerate_cylinders(sys, n, **caps)
    gs = [abs(c.gn) for c in cyls]
    return sum(gs, sys.one * 0), max(gs, default=sys.one * 0)


def rho_estimates(sys: WeightedSystem, n_max: int) -> tuple[list[float], list[float]]:
    """``||g^n||_1^{1/n}`` and ``||g^n||_inf^{1/n}`` for ``n = 1..n_max``."""
    ones, sups = norm_sequences(sys, n_max)
    r1 = [float(ones[n]) ** (1.0 / n) for n in range(1, n_max + 1)]
    rinf = [float(sups[n]) ** (1.0 / n) for n in range(1, n_max + 1)]
    return r1, rinf


# ---------------------------------------------------------------------------
# fixed points


def _pi_from(images, u, v, half) -> object:
    """``-sum sigma(f^n x, x) eps(f^n x)`` over the two boundary germs."""
    fu, fv = images
    total = 0
    for img, x in ((fu, u), (fv, v)):
        sig = half if img > (x, 0) else -half
        total += sig * img[1]
    return -total


def pi_weight(sys: WeightedSystem, cyl: Cylinder):
    return _pi_from(cyl.boundary_images(), cyl.u, cyl.v, sys.half)


def omega(sys: WeightedSystem, cyl: Cylinder):
    return cyl.gn * pi_weight(sys, cyl)


def pi_geometric(sys: WeightedSystem, cyl: Cylinder) -> int:
    """Classify the chord of ``f^n`` over ``alpha`` against the diagonal."""
    fu, fv = cyl.boundary_images()
    u, v = cyl.u, cyl.v
    du, dv = fu.base - u, fv.base - v
    if not sys.exact:
        tol = sys.snap
        for d in (du, dv):
            if tol < abs(d) <= AMBIGUITY_FACTOR * tol:
                raise GermAmbiguityError("chord endpoint too close to the diagonal; use exact mode")
        du = 0 if abs(du) <= tol else du
        dv = 0 if abs(dv) <= tol else dv
    slope = (fv.base - fu.base) / (v - u)
    touches = min(du, dv) <= 0 <= max(du, dv)
    if 0 < slope <= 1:
        return -1 if touches else 0
    if (du < 0 < dv) or (dv < 0 < du):
        return 1
    return 0


def fixed_point_counts(sys: WeightedSystem, n_max: int, **caps) -> list:
    """``[N_1, ..., N_{n_max}]``."""
    counts = [0] * n_max
    half = gmpy2.mpq(1, 2) if sys.exact else 0.5

    def visit(w, node):
        depth, lo, hi, A, B, s, g, _ = node
        fu, fv = (lo, hi) if s > 0 else (hi, lo)
        if w.affine:
            # sign of f^n(u) - u without dividing: f^n(u) - u = ((A-1) f^n(u) + B) / A
            sa = 1 if A > 0 else -1
            du = ((A - 1) * fu[0] + B) * sa
            dv = ((A - 1) * fv[0] + B) * sa
            if not w.exact:
                tol = w.snap * abs(A)
                du = 0 if abs(du) <= tol else du
                dv = 0 if abs(dv) <= tol else dv
            side_u = fu[1] if du == 0 else (1 if du > 0 else -1)
            side_v = fv[1] if dv == 0 else (1 if dv > 0 else -1)
            pi = -(half * side_u * fu[1] + half * side_v * fv[1])
        else:
            u, v = w.endpoints(node)
            pi = _pi_from((fu, fv), u, v, half)
        if pi:
            counts[depth - 1] += g * pi

    walk(sys, n_max, visit, prune_zero=True, **caps)
    if sys.exact:
        return [_to_fraction(gmpy2.mpq(c)) for c in counts]
    return [float(c) for c in counts]


def zeta_series(counts: list, N: int | None = None) -> TruncatedSeries:
    """``Z(t) = exp(sum_n N_n t^n / n)`` to degree ``N`` (default ``len(counts)``)."""
    N = len(counts) if N is None else N
    if N > len(counts):
        raise ValueError(f"need N_1..N_{N}, got {len(counts)} counts")
    zero = counts[0] * 0 if counts else 0
    exact = all(isinstance(c, (int, Fraction)) for c in counts)
    coeffs = [zero]
    for n in range(1, N + 1):
        c = counts[n - 1]
        coeffs.append(Fraction(c) / n if exact else c / n)
    return TruncatedSeries(coeffs).exp()


@dataclass
class ZetaResidual:
    product: TruncatedSeries  # Z D - 1
    log_form: TruncatedSeries  # N_f + D'/D
    counts: list = field(repr=False)

    def max_abs(self) -> float:
        return max(self.product.max_abs(), self.log_form.max_abs())


def zeta_residual(sys: WeightedSystem, N: int, counts=None, det=None, **caps) -> ZetaResidual:
    """Both forms of the zeta identity to degree ``N`` (``N - 1`` for the log form)."""
    from .kneading import kneading_det

    counts = counts if counts is not None else fixed_point_counts(sys, N, **caps)
    D = (det if det is not None else kneading_det(sys, N)).truncate(N)
    Z = zeta_series(counts, N)
    one = TruncatedSeries.constant(sys.one, N)
    product = Z * D - one
    Nf = TruncatedSeries(counts[:N])
    log_form = Nf + D.derivative() * D.truncate(N - 1).inverse()
    return ZetaResidual(product, log_form, counts)


# ---------------------------------------------------------------------------
# expansiveness


@dataclass
class ExpansivenessProbe:
    sup_diam: list
    contracting: bool
    label: str = "heuristic"


def expansiveness_probe(sys: WeightedSystem, n_max: int, **caps) -> ExpansivenessProbe:
    """``sup_{alpha in Z_n} diam(alpha)`` for ``n = 1..n_max``.

    A finite probe cannot certify the limit; ``contracting`` only says the
    last few values keep shrinking.
    """
    sup = [sys.one * 0 for _ in range(n_max)]

    def visit(w, node):
        u, v = w.endpoints(node)
        d = v - u
        if d > sup[node.depth - 1]:
            sup[node.depth - 1] = _to_fraction(d) if sys.exact else d

    walk(sys, n_max, visit, **caps)
    tail = sup[-min(4, n_max):]
    contracting = all(y < x for x, y in zip(tail, tail[1:])) if len(tail) > 1 else False
    return ExpansivenessProbe(sup, contracting)


def count_cylinders(sys: WeightedSystem, n_max: int, **caps) -> list[int]:
    """``[|Z_1|, ..., |Z_{n_max}|]`` through merged images (cheap)."""
    out = []
    for n, states in enumerate(image_states(sys, whole(sys), n_max, weight=lambda g: 1)):
        if n:
            out.append(int(sum(states.values())))
    return out


# ---------------------------------------------------------------------------
# export

CYLINDER_CSV_VERSION = 1


def write_cylinders_csv(path, sys: WeightedSystem, cyls: list[Cylinder]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# cylinders v{CYLINDER_CSV_VERSION}: word,u,v,sn,gn,pi,omega\n")
        wr = csv.writer(fh)
        wr.writerow(["word", "u", "v", "sn", "gn", "pi", "omega"])
        for c in cyls:
            pi = pi_weight(sys, c)
            wr.writerow([c.label(), c.u, c.v, c.sn, c.gn, pi, c.gn * pi])
