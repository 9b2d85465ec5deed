"""Weighted interval systems and their point-germ dynamics.

A weighted system is a partition ``a = c_0 < c_1 < ... < c_{l+1} = b`` of an
interval together with one strictly monotone branch ``f_i`` and one real
weight ``g_i`` per open piece ``I_i = ]c_i, c_{i+1}[``.  Points are never
mapped directly; everything goes through point-germs ``(x, +1)`` / ``(x, -1)``
so that orbits through cutting points are well defined.

Two arithmetic modes exist.  ``"exact"`` keeps every datum and orbit point as a
:class:`fractions.Fraction`; ``"float"`` uses float64 and decides coincidence
with a cutting point through a snap tolerance relative to ``b - a``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

DEFAULT_SNAP = 1e-12
# float results farther than snap but closer than AMBIGUITY_FACTOR * snap from
# a cutting point are refused instead of guessed
AMBIGUITY_FACTOR = 1e3


class ValidationError(ValueError):
    """Invalid weighted-system description."""

    def __init__(self, message: str, branch: int | None = None, field: str | None = None):
        self.branch = branch
        self.field = field
        where = []
        if field is not None:
            where.append(field)
        if branch is not None:
            where.append(f"branch {branch}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class GermAmbiguityError(ArithmeticError):
    """A float orbit point landed too close to a cutting point to decide."""


def to_scalar(value, mode: str):
    """Convert ``value`` (int, float, Fraction or ``"p/q"`` string) to the mode's scalar type."""
    if mode == EXACT:
        if isinstance(value, float):
            # decimal literal semantics: 0.1 means 1/10
            return Fraction(repr(value))
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


class Germ(NamedTuple):
    """A point-germ ``(base, dir)``.

    Tuple ordering is the germ order: comparing a germ with the tuple
    ``(x, 0)`` places ``x-`` < ``x`` < ``x+``.
    """

    base: object
    dir: int

    def __repr__(self) -> str:
        return f"{self.base}{'+' if self.dir > 0 else '-'}"


def plus(x) -> Germ:
    return Germ(x, 1)


def minus(x) -> Germ:
    return Germ(x, -1)


def point(x) -> tuple:
    """Order key of a base point among germs."""
    return (x, 0)


def sigma(germ: Germ, y, half=Fraction(1, 2)):
    """Half-sign ``1/2 sgn(germ - y)``; never zero since a germ is not a point."""
    return half if germ > (y, 0) else -half


class GermInterval(NamedTuple):
    """The set of points strictly between two germs, ``<lo, hi>``."""

    lo: Germ
    hi: Germ

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def __contains__(self, x) -> bool:
        return self.lo < (x, 0) < self.hi

    def is_point(self) -> bool:
        return self.lo.base == self.hi.base and self.lo.dir < 0 < self.hi.dir


def open_interval(u, v) -> GermInterval:
    return GermInterval(plus(u), minus(v))


def closed_interval(u, v) -> GermInterval:
    return GermInterval(minus(u), plus(v))


def singleton(x) -> GermInterval:
    return GermInterval(minus(x), plus(x))


@dataclass(frozen=True, eq=False)
class Branch:
    """One strictly monotone branch with its weight.

    Affine branches carry ``slope``/``intercept`` and get exact inverses.
    Other branches pass ``func``; ``inverse`` is optional and falls back to
    bisection.
    """

    weight: object = 1
    slope: object = None
    intercept: object = None
    func: Callable | None = None
    inverse_func: Callable | None = None

    @property
    def affine(self) -> bool:
        return self.slope is not None

    def __call__(self, x):
        if self.affine:
            return self.slope * x + self.intercept
        return self.func(x)

    def inverse(self, y, lo, hi, tol=1e-15):
        """Preimage of ``y`` under the branch restricted to ``[lo, hi]``."""
        if self.affine:
            return (y - self.intercept) / self.slope
        if self.inverse_func is not None:
            return self.inverse_func(y)
        flo, fhi = self.func(lo), self.func(hi)
        increasing = fhi > flo
        a, b = float(lo), float(hi)
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = self.func(m)
            if (fm < y) == increasing:
                a = m
            else:
                b = m
            if b - a <= tol * max(1.0, abs(a)):
                break
        return 0.5 * (a + b)


@dataclass(frozen=True, eq=False)
class WeightedSystem:
    """Validated weighted system; build it with :func:`validate_system` or :meth:`affine`."""

    a: object
    b: object
    cuts: tuple
    branches: tuple
    mode: str = EXACT
    snap_rel: float = DEFAULT_SNAP
    name: str = ""
    degree: int = 64
    signs: tuple = field(default=(), repr=False)
    points: tuple = field(default=(), repr=False)

    @classmethod
    def affine(cls, a, b, cuts, branches, mode=EXACT, **kw) -> "WeightedSystem":
        """``branches`` is a list of ``(slope, intercept, weight)`` triples."""
        raw = {
            "interval": [a, b],
            "cuts": list(cuts),
            "mode": mode,
            "branches": [
                {"slope": p, "intercept": q, "weight": g} for p, q, g in branches
            ],
        }
        raw.update(kw)
        return validate_system(raw)

    @property
    def ell(self) -> int:
        return len(self.cuts)

    @property
    def weights(self) -> tuple:
        return tuple(br.weight for br in self.branches)

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    @property
    def half(self):
        return Fraction(1, 2) if self.exact else 0.5

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    @property
    def snap(self) -> float:
        return self.snap_rel * float(self.b - self.a)

    @property
    def all_affine(self) -> bool:
        return all(br.affine for br in self.branches)

    def scalar(self, v):
        return to_scalar(v, self.mode)

    def c(self, i):
        """Cutting point ``c_i`` for ``0 <= i <= l+1``."""
        return self.points[i]

    def branch_of(self, germ: Germ) -> int:
        """Index ``i`` with ``germ`` in the germ-closure of ``I_i``."""
        if germ.dir > 0:
            i = bisect.bisect_right(self.points, germ.base) - 1
        else:
            i = bisect.bisect_left(self.points, germ.base) - 1
        if i < 0 or i > self.ell:
            raise ValueError(f"germ {germ!r} is outside the interval")
        return i

    def branch_of_point(self, x) -> int | None:
        """Index of the open piece containing ``x``; ``None`` on a cutting point."""
        i = bisect.bisect_right(self.points, x) - 1
        if i < 0 or i > self.ell or self.points[i] == x:
            return None
        return i

    def settle(self, y):
        """Snap a float orbit value onto a nearby cutting point (float mode only)."""
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
        tol = self.snap
        if dist <= tol:
            return best
        if dist <= AMBIGUITY_FACTOR * tol:
            raise GermAmbiguityError(
                f"orbit value {y!r} is {dist:.3g} from cutting point {best!r}; "
                "use exact mode or adjust the snap tolerance"
            )
        return y


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def validate_system(raw: dict) -> WeightedSystem:
    """Check a raw description and return a :class:`WeightedSystem`.

    ``raw`` holds ``interval`` ``[a, b]``, ``cuts``, ``branches`` (each either
    a :class:`Branch` or a mapping with ``slope``, ``intercept``, ``weight``)
    and optionally ``mode``, ``snap``, ``name`` and ``degree``.
    """
    mode = raw.get("mode", FLOAT)
    if mode not in MODES:
        raise ValidationError(f"unknown arithmetic mode {mode!r}", field="mode")
    conv = lambda v: to_scalar(v, mode)  # noqa: E731
    try:
        a, b = (conv(v) for v in raw["interval"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"expected [a, b] ({exc})", field="interval") from None
    cuts = tuple(conv(v) for v in raw.get("cuts", ()))
    points = (a, *cuts, b)
    for k in range(len(points) - 1):
        if not points[k] < points[k + 1]:
            what = "zero-length interval" if points[k] == points[k + 1] else "unsorted cuts"
            raise ValidationError(
                f"{what}: cutting points must satisfy a < c_1 < ... < b (at position {k})",
                field="cuts",
            )
    if not cuts:
        raise ValidationError("at least one interior cutting point is required", field="cuts")

    raw_branches = raw.get("branches", ())
    if len(raw_branches) != len(cuts) + 1:
        raise ValidationError(
            f"expected {len(cuts) + 1} branches, got {len(raw_branches)}", field="branches"
        )
    branches, signs = [], []
    snap = float(raw.get("snap", DEFAULT_SNAP))
    tol = 0 if mode == EXACT else snap * float(b - a)
    for i, rb in enumerate(raw_branches):
        if isinstance(rb, Branch):
            br = rb
            if br.affine:
                br = Branch(conv(br.weight), conv(br.slope), conv(br.intercept))
            else:
                br = Branch(conv(br.weight), func=br.func, inverse_func=br.inverse_func)
        else:
            try:
                br = Branch(
                    conv(rb.get("weight", 1)), conv(rb["slope"]), conv(rb["intercept"])
                )
            except KeyError as exc:
                raise ValidationError(f"missing field {exc}", branch=i, field="branches") from None
        if br.affine and br.slope == 0:
            raise ValidationError("non-monotone branch (slope 0)", branch=i)
        lo, hi = points[i], points[i + 1]
        ylo, yhi = br(lo), br(hi)
        s = _sign(yhi - ylo)
        if s == 0:
            raise ValidationError("non-monotone branch (equal endpoint values)", branch=i)
        if not br.affine:
            # coarse interior check for callback branches
            prev = ylo
            for k in range(1, 65):
                y = br(lo + (hi - lo) * k / 64)
                if _sign(y - prev) != s:
                    raise ValidationError("non-monotone branch", branch=i)
                prev = y
        for y in (ylo, yhi):
            if y < a - tol or y > b + tol:
                raise ValidationError(f"image escapes [a, b] (value {y})", branch=i)
        branches.append(br)
        signs.append(s)
    return WeightedSystem(
        a=a,
        b=b,
        cuts=cuts,
        branches=tuple(branches),
        mode=mode,
        snap_rel=snap,
        name=str(raw.get("name", "")),
        degree=int(raw.get("degree", 64)),
        signs=tuple(signs),
        points=points,
    )


def germ_step(sys: WeightedSystem, germ: Germ) -> Germ:
    """Image of a germ under the extended map."""
    i = sys.branch_of(germ)
    y = sys.settle(sys.branches[i](germ.base))
    d = sys.signs[i] * germ.dir
    if y == sys.a:
        y = sys.a
        if d < 0:
            raise ValueError(f"germ {germ!r} leaves the interval below a")
    elif y == sys.b:
        y = sys.b
        if d > 0:
            raise ValueError(f"germ {germ!r} leaves the interval above b")
    elif y < sys.a or y > sys.b:
        raise ValueError(f"germ {germ!r} maps outside [a, b] to {y!r}")
    return Germ(y, d)


class Orbit(NamedTuple):
    """Eventually periodic germ orbit: ``germs[start:]`` repeats forever if ``start`` is set."""

    germs: list
    start: int | None

    def germ(self, m: int) -> Germ:
        g = self.germs
        if m < len(g):
            return g[m]
        if self.start is None:
            raise IndexError(m)
        period = len(g) - self.start
        return g[self.start + (m - self.start) % period]


def orbit(sys: WeightedSystem, germ: Germ, n: int) -> Orbit:
    """Follow a germ for ``n`` steps, stopping early once it revisits a germ."""
    seen = {germ: 0}
    germs = [germ]
    cur = germ
    for m in range(1, n + 1):
        cur = germ_step(sys, cur)
        if cur in seen:
            return Orbit(germs, seen[cur])
        seen[cur] = m
        germs.append(cur)
    return Orbit(germs, None)


def germ_orbit(sys: WeightedSystem, germ: Germ, n: int) -> list[tuple]:
    """``[(f^m germ, [sg]^m, s^m, g^m) for m = 0..n]``."""
    orb = orbit(sys, germ, n)
    out = []
    s, g = 1, sys.one
    for m in range(n + 1):
        x = orb.germ(m)
        out.append((x, s * g, s, g))
        i = sys.branch_of(x)
        s *= sys.signs[i]
        g *= sys.weights[i]
    return out


def preimages(sys: WeightedSystem, y, p: int) -> list[list[tuple]]:
    """Sets ``Gamma_{q,y}`` for ``q = 0..p`` as lists of ``(x, g^q(x))``.

    Only points lying inside open ``q``-cylinders are kept, so preimages that
    pass through a cutting point at an intermediate step are dropped.
    """
    levels = [[(y, sys.one)]]
    for _ in range(p):
        nxt = []
        for z, w in levels[-1]:
            for i, br in enumerate(sys.branches):
                lo, hi = sys.points[i], sys.points[i + 1]
                ylo, yhi = sorted((br(lo), br(hi)))
                if not ylo <= z <= yhi:
                    continue
                x = br.inverse(z, lo, hi)
                if not sys.exact:
                    x = sys.settle(x)
                if lo < x < hi:
                    nxt.append((x, w * br.weight))
        levels.append(nxt)
    return levels


def clip(sys: WeightedSystem, J: GermInterval, i: int) -> GermInterval:
    """``J`` intersected with the open piece ``I_i``."""
    lo = max(J.lo, plus(sys.points[i]))
    hi = min(J.hi, minus(sys.points[i + 1]))
    return GermInterval(lo, hi)


def push(sys: WeightedSystem, J: GermInterval, i: int) -> GermInterval:
    """Image under ``f_i`` of a non-empty germ interval inside ``I_i``."""
    fl, fh = germ_step(sys, J.lo), germ_step(sys, J.hi)
    return GermInterval(fl, fh) if sys.signs[i] > 0 else GermInterval(fh, fl)


def image_states(
    sys: WeightedSystem,
    J: GermInterval,
    depth: int,
    weight: Callable | None = None,
    combine: Callable | None = None,
) -> Iterator[dict]:
    """Push a germ interval forward through every branch, merging equal images.

    Yields, for ``p = 0..depth``, a dict ``{image interval: accumulated weight}``.
    Paths of length ``p`` starting in ``J`` correspond one-to-one with the
    non-empty pieces ``J ∩ alpha`` for ``alpha`` in ``Z_p``; merging paths with
    the same image keeps every additive (or, with ``combine=max``, sup-type)
    quantity that only depends on the image.
    """
    weight = weight or (lambda g: g)
    combine = combine or (lambda u, v: u + v)
    ws = [weight(g) for g in sys.weights]
    states = {} if J.empty else {J: sys.one}
    yield states
    for _ in range(depth):
        nxt: dict = {}
        for K, w in states.items():
            for i in range(sys.ell + 1):
                piece = clip(sys, K, i)
                if piece.empty:
                    continue
                img = push(sys, piece, i)
                v = w * ws[i]
                nxt[img] = combine(nxt[img], v) if img in nxt else v
        states = nxt
        yield states


def whole(sys: WeightedSystem) -> GermInterval:
    """``]a, b[`` as a germ interval."""
    return GermInterval(plus(sys.a), minus(sys.b))


def sample_germs(sys: WeightedSystem, count: int, rng, denominator: int = 10**6) -> list[Germ]:
    """Random germs in ``Î``, sorted; exact systems get rational bases."""
    out = []
    width = sys.b - sys.a
    for _ in range(count):
        k = rng.randrange(1, denominator)
        x = sys.a + width * (Fraction(k, denominator) if sys.exact else k / denominator)
        out.append(Germ(x, rng.choice((-1, 1))))
    return sorted(out)


def cut_germs(sys: WeightedSystem) -> list[Germ]:
    """All germs based at cutting points, boundary germs included."""
    out = [plus(sys.a)]
    for c in sys.cuts:
        out += [minus(c), plus(c)]
    out.append(minus(sys.b))
    return out
