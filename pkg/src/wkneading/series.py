"""Truncated power series in one variable and matrices of them.

Coefficients are plain Python scalars, either :class:`fractions.Fraction`
(exact) or ``float``.  A series of degree ``N`` knows ``t^0 .. t^N`` and
nothing beyond; combining two series keeps the smaller degree.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np


class NonInvertibleSeries(ZeroDivisionError):
    pass


class TruncatedSeries:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(coeffs)
        if not self.coeffs:
            raise ValueError("a truncated series needs at least the constant term")

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, c, degree: int) -> "TruncatedSeries":
        zero = c * 0
        return cls((c,) + (zero,) * degree)

    @classmethod
    def zero(cls, degree: int, one=1) -> "TruncatedSeries":
        return cls.constant(one * 0, degree)

    @classmethod
    def monomial(cls, k: int, degree: int, c=1) -> "TruncatedSeries":
        zero = c * 0
        return cls(c if n == k else zero for n in range(degree + 1))

    # basic protocol ---------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self) -> str:
        shown = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"TruncatedSeries([{shown}{more}], N={self.degree})"

    def truncate(self, degree: int) -> "TruncatedSeries":
        if degree > self.degree:
            raise ValueError(f"cannot extend a degree-{self.degree} series to {degree}")
        return TruncatedSeries(self.coeffs[: degree + 1])

    def _lift(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(other, self.degree)

    # ring operations --------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        n = min(len(self), len(other))
        return TruncatedSeries(x + y for x, y in zip(self.coeffs[:n], other.coeffs[:n]))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-x for x in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(x * other for x in self.coeffs)
        n = min(len(self), len(other))
        a, b = self.coeffs, other.coeffs
        # skip leading zeros of either factor; the kneading series are often sparse
        out = []
        for k in range(n):
            s = a[0] * b[k]
            for i in range(1, k + 1):
                ai = a[i]
                if ai:
                    s += ai * b[k - i]
            out.append(s)
        return TruncatedSeries(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return TruncatedSeries(x / other for x in self.coeffs)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``t^k`` keeping the degree."""
        zero = self.coeffs[0] * 0
        return TruncatedSeries(((zero,) * k + self.coeffs)[: len(self)])

    # analysis ---------------------------------------------------------
    def derivative(self) -> "TruncatedSeries":
        if self.degree == 0:
            return TruncatedSeries((self.coeffs[0] * 0,))
        return TruncatedSeries(k * self.coeffs[k] for k in range(1, len(self)))

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """Horner evaluation of the truncated polynomial."""
        coeffs = self.coeffs
        if isinstance(t, float):
            coeffs = [float(c) for c in coeffs]
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc * t + c
        return acc

    def valuation(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def max_abs(self, upto: int | None = None) -> float:
        cs = self.coeffs if upto is None else self.coeffs[: upto + 1]
        return max(abs(float(c)) for c in cs)

    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coeffs)

    def to_float(self) -> "TruncatedSeries":
        return TruncatedSeries(float(c) for c in self.coeffs)

    def inverse(self) -> "TruncatedSeries":
        a = self.coeffs
        if not a[0]:
            raise NonInvertibleSeries("non-invertible series (zero constant term)")
        inv0 = 1 / a[0] if not isinstance(a[0], int) else Fraction(1, a[0])
        out = [inv0]
        for k in range(1, len(a)):
            s = a[1] * out[k - 1]
            for i in range(2, k + 1):
                if a[i]:
                    s += a[i] * out[k - i]
            out.append(-s * inv0)
        return TruncatedSeries(out)

    def exp(self) -> "TruncatedSeries":
        a = self.coeffs
        c0 = a[0]
        e0 = 1 if not c0 else math.exp(c0)
        if isinstance(c0, Fraction) and not c0:
            e0 = Fraction(1)
        out = [e0]
        for n in range(1, len(a)):
            s = 0
            for k in range(1, n + 1):
                if a[k]:
                    s += k * a[k] * out[n - k]
            out.append(s / n if not isinstance(s, int) else Fraction(s, n))
        return TruncatedSeries(out)

    def log(self) -> "TruncatedSeries":
        a = self.coeffs
        c0 = a[0]
        if not c0:
            raise NonInvertibleSeries("non-invertible series (zero constant term)")
        if c0 < 0:
            raise ValueError("log of a series with negative constant term")
        if c0 == 1:
            l0 = c0 * 0
        else:
            l0 = math.log(c0)
        # l' = a' / a
        d = (self.derivative() * self.truncate(self.degree - 1).inverse()) if self.degree else None
        out = [l0]
        if d is not None:
            for n in range(1, len(a)):
                c = d.coeffs[n - 1]
                out.append(c / n if not isinstance(c, int) else Fraction(c, n))
        return TruncatedSeries(out)

    def close_to(self, other, tol: float = 0.0, upto: int | None = None) -> bool:
        diff = self - other
        return diff.max_abs(upto) <= tol


def series_from_function(f, degree: int) -> TruncatedSeries:
    """Coefficients ``f(n)`` for ``n = 0..degree``."""
    return TruncatedSeries(f(n) for n in range(degree + 1))


# ---------------------------------------------------------------------------
# matrices


class SeriesMatrix:
    """Square matrix of truncated series sharing one degree."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence[TruncatedSeries]]):
        rows = [list(r) for r in rows]
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise ValueError("SeriesMatrix must be square")
        degree = min(e.degree for r in rows for e in r)
        self.rows = [[e.truncate(degree) for e in r] for r in rows]

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def degree(self) -> int:
        return self.rows[0][0].degree

    def __getitem__(self, jk):
        j, k = jk
        return self.rows[j][k]

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        d = self.dim
        out = []
        for j in range(d):
            row = []
            for k in range(d):
                acc = self.rows[j][0] * other.rows[0][k]
                for m in range(1, d):
                    acc = acc + self.rows[j][m] * other.rows[m][k]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return SeriesMatrix(
            [[x - y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)]
        )

    def derivative(self) -> "SeriesMatrix":
        return SeriesMatrix([[e.derivative() for e in r] for r in self.rows])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SeriesMatrix":
        return SeriesMatrix([[self.rows[j][k] for k in cols] for j in rows])

    def coefficient(self, n: int) -> np.ndarray:
        return np.array([[float(e[n]) for e in r] for r in self.rows])

    def eval(self, t) -> np.ndarray:
        return np.array([[e.eval(t) for e in r] for r in self.rows])

    def max_abs(self, upto: int | None = None) -> float:
        return max(e.max_abs(upto) for r in self.rows for e in r)

    def trace(self) -> TruncatedSeries:
        acc = self.rows[0][0]
        for j in range(1, self.dim):
            acc = acc + self.rows[j][j]
        return acc

    def det(self) -> TruncatedSeries:
        return det(self.rows)


def _one_like(x: TruncatedSeries) -> TruncatedSeries:
    c = x.coeffs[0]
    one = Fraction(1) if isinstance(c, (int, Fraction)) else 1.0
    return TruncatedSeries.constant(one, x.degree)


def cofactor_det(rows: Sequence[Sequence[TruncatedSeries]]) -> TruncatedSeries:
    """Laplace expansion along the first row."""
    d = len(rows)
    if d == 1:
        return rows[0][0]
    if d == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = None
    for k in range(d):
        minor = [r[:k] + r[k + 1 :] for r in rows[1:]]
        term = rows[0][k] * cofactor_det(minor)
        if acc is None:
            acc = term
        elif k % 2:
            acc = acc - term
        else:
            acc = acc + term
    return acc


def leibniz_det(rows: Sequence[Sequence[TruncatedSeries]]) -> TruncatedSeries:
    """Sum over permutations; test oracle for small dimensions."""
    d = len(rows)
    acc = None
    for perm in permutations(range(d)):
        inversions = sum(perm[i] > perm[j] for i in range(d) for j in range(i + 1, d))
        term = rows[0][perm[0]]
        for j in range(1, d):
            term = term * rows[j][perm[j]]
        if inversions % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def elimination_det(rows: Sequence[Sequence[TruncatedSeries]]) -> TruncatedSeries:
    """Gaussian elimination over the series ring.

    Pivots need an invertible constant term.  When a whole column has zero
    constant terms its common power ``t^v`` is factored out; the remaining
    work then only needs degree ``N - v``.
    """
    a = [list(r) for r in rows]
    d = len(a)
    degree = min(e.degree for r in a for e in r)
    a = [[e.truncate(degree) for e in r] for r in a]
    result = _one_like(a[0][0])
    shift = 0
    sign = 1
    for c in range(d):
        prec = degree - shift
        if prec < 0:
            break
        col = [a[r][c] for r in range(c, d)]
        vals = [e.valuation() for e in col]
        nonzero = [v for v in vals if v is not None and v <= prec]
        if not nonzero:
            return TruncatedSeries.zero(degree, result.coeffs[0])
        v = min(nonzero)
        if v:
            shift += v
            prec = degree - shift
            if prec < 0:
                break
            for r in range(c, d):
                e = a[r][c]
                a[r][c] = TruncatedSeries(e.coeffs[v : v + prec + 1])
        # partial pivoting on the constant term
        p = max(range(c, d), key=lambda r: abs(float(a[r][c].coeffs[0])))
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        for r in range(c, d):
            a[r] = [e.truncate(prec) if e.degree > prec else e for e in a[r]]
        pivot = a[c][c]
        inv = pivot.inverse()
        result = result.truncate(min(result.degree, prec)) * pivot
        for r in range(c + 1, d):
            factor = a[r][c] * inv
            if factor.valuation() is None:
                continue
            a[r] = [a[r][k] - factor * a[c][k] if k > c else a[r][k] for k in range(d)]
    coeffs = list(result.coeffs[: max(degree - shift, -1) + 1])
    zero = a[0][0].coeffs[0] * 0
    padded = [zero] * shift + [sign * x for x in coeffs]
    padded += [zero] * (degree + 1 - len(padded))
    return TruncatedSeries(padded[: degree + 1])


def det(rows: Sequence[Sequence[TruncatedSeries]]) -> TruncatedSeries:
    """Determinant: cofactor expansion up to 4x4, elimination above."""
    if isinstance(rows, SeriesMatrix):
        rows = rows.rows
    if len(rows) <= 4:
        return cofactor_det(rows)
    return elimination_det(rows)
