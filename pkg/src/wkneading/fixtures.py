"""Reference systems used by the tests and the shipped config files."""

from __future__ import annotations

import random
from fractions import Fraction as F

from .cylinders import count_cylinders
from .system import EXACT, FLOAT, WeightedSystem


def tent(mode: str = EXACT) -> WeightedSystem:
    """Unweighted full tent map on ``[0, 1]``."""
    return WeightedSystem.affine(0, 1, [F(1, 2)], [(2, 0, 1), (-2, 2, 1)], mode=mode, name="tent")


def golden(mode: str = EXACT) -> WeightedSystem:
    """``x -> 2x`` on ``[0, 1/2]``, ``x -> x - 1/2`` on ``]1/2, 1]``; entropy ``log`` of the golden mean."""
    return WeightedSystem.affine(
        0, 1, [F(1, 2)], [(2, 0, 1), (1, F(-1, 2), 1)], mode=mode, name="golden"
    )


def appendix_c(M=5, mode: str = EXACT) -> WeightedSystem:
    """Tent on ``[0, 2]`` plus a third branch ``[2, 3] -> [0, 2]`` of weight ``M``."""
    return WeightedSystem.affine(
        0,
        3,
        [1, 2],
        [(2, 0, 1), (-2, 4, 1), (2, -4, M)],
        mode=mode,
        name=f"appendix-c M={M}",
    )


def discont_3_2(mode: str = EXACT) -> WeightedSystem:
    """Discontinuous two-branch map with weights in ratio 2:3.

    Model slopes go like ``1/g_i``, so their magnitudes are in ratio 3:2.
    """
    return WeightedSystem.affine(
        0,
        1,
        [F(2, 5)],
        [(F(9, 4), F(1, 10), F(8, 5)), (F(-3, 2), F(3, 2), F(12, 5))],
        mode=mode,
        name="discontinuous 3:2",
    )


def zero_weight(mode: str = EXACT) -> WeightedSystem:
    """Three full branches; the middle one has weight 0."""
    return WeightedSystem.affine(
        0,
        1,
        [F(1, 3), F(2, 3)],
        [(3, 0, 1), (-3, 2, 0), (3, -2, 1)],
        mode=mode,
        name="zero-weight middle",
    )


def _rand_frac(rng: random.Random, lo: F, hi: F, den: int) -> F:
    return lo + (hi - lo) * F(rng.randrange(1, den), den)


def random_affine(
    rng: random.Random,
    ell: int | None = None,
    mode: str = EXACT,
    weights: tuple = (F(1, 10), F(3)),
    max_ell: int = 4,
    den: int = 24,
    cylinder_budget: tuple | None = None,
    min_count: int = 0,
    tries: int = 200,
) -> WeightedSystem:
    """Random piecewise-affine system on ``[0, 1]`` with rational data.

    Cuts are distinct multiples of ``1/den``; each branch picks two distinct
    image endpoints on the same grid.  With ``cylinder_budget = (n, cap)``
    systems with more than ``cap`` (or fewer than ``min_count``) cylinders at
    depth ``n`` are redrawn.
    """
    for _ in range(tries):
        k = ell if ell is not None else rng.randint(1, max_ell)
        cuts = sorted(F(c, den) for c in rng.sample(range(1, den), k))
        branches = []
        for i in range(k + 1):
            y0, y1 = (F(v, den) for v in rng.sample(range(0, den + 1), 2))
            lo, hi = ([F(0)] + cuts + [F(1)])[i : i + 2]
            slope = (y1 - y0) / (hi - lo)
            g = _rand_frac(rng, weights[0], weights[1], 100)
            branches.append((slope, y0 - slope * lo, g))
        sys = WeightedSystem.affine(0, 1, cuts, branches, mode=mode, name="random")
        if cylinder_budget is not None:
            n, cap = cylinder_budget
            counts = count_cylinders(sys, n)
            if not min_count <= counts[-1] <= cap:
                continue
        return sys
    raise RuntimeError("no random system met the cylinder budget")


def random_float_affine(rng: random.Random, ell: int | None = None, **kw) -> WeightedSystem:
    return random_affine(rng, ell, mode=FLOAT, **kw)


FIXTURES = {
    "tent": tent,
    "golden": golden,
    "appendix_c": appendix_c,
    "discont_3_2": discont_3_2,
    "zero_weight": zero_weight,
}
