"""Exact real algebraic numbers and extended-real endpoints.

A value is rational (``lo == hi``) or the unique root of a square-free
polynomial inside an open rational interval whose ends are not roots.
Comparisons are exact: equal values are detected through a common factor,
distinct ones by refining until the enclosures separate.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

from . import _poly as P


@total_ordering
class Real:
    """Exact algebraic real, or ``+inf`` / ``-inf``."""

    __slots__ = ("poly", "lo", "hi", "inf")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, poly=(), lo=None, hi=None, inf: int = 0):
        self.poly = poly
        self.lo = lo
        self.hi = hi
        self.inf = inf

    # construction ----------------------------------------------------------
    @classmethod
    def rational(cls, q) -> "Real":
        q = P.to_fraction(q)
        return cls(P.make((-q, 1)), q, q)

    @classmethod
    def infinity(cls, sign: int) -> "Real":
        return cls(inf=1 if sign > 0 else -1)

    @classmethod
    def root(cls, poly, lo, hi) -> "Real":
        """Root of ``poly`` (square-free) isolated in ``(lo, hi)``, or ``lo`` if ``lo == hi``."""
        lo, hi = Fraction(lo), Fraction(hi)
        if lo == hi:
            return cls.rational(lo)
        r = cls(poly, lo, hi)
        while P.evaluate(poly, r.lo) == 0 or P.evaluate(poly, r.hi) == 0:
            r._bisect()
            if r.lo == r.hi:
                break
        return r

    @classmethod
    def coerce(cls, x) -> "Real":
        if isinstance(x, Real):
            return x
        if isinstance(x, float) and math.isinf(x):
            return cls.infinity(1 if x > 0 else -1)
        if isinstance(x, str):
            s = x.strip().lower()
            if s in ("inf", "+inf", "infinity", "+infinity", "oo", "+oo"):
                return cls.infinity(1)
            if s in ("-inf", "-infinity", "-oo"):
                return cls.infinity(-1)
        return cls.rational(x)

    # refinement ------------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return not self.inf and self.lo == self.hi

    @property
    def is_finite(self) -> bool:
        return not self.inf

    def _bisect(self) -> None:
        mid = (self.lo + self.hi) / 2
        sm = P.sign_at(self.poly, mid)
        if sm == 0:
            self.lo = self.hi = mid
            return
        sl = P.sign_at(self.poly, self.lo)
        sh = P.sign_at(self.poly, self.hi)
        if sl != 0:
            left = sm != sl
        elif sh != 0:
            left = sm == sh
        else:
            left = P.count_roots(P.sturm_sequence(self.poly), self.lo, mid) == 1
        if left:
            self.hi = mid
        else:
            self.lo = mid

    def refine(self, width) -> "Real":
        """Shrink the enclosure to width at most ``width`` (in place)."""
        width = Fraction(width)
        while not self.inf and self.hi - self.lo > width:
            self._bisect()
        return self

    def enclosure(self, width=Fraction(1, 10**12)) -> tuple[float, float]:
        """Outward-rounded float interval of width about ``width`` containing the value."""
        if self.inf:
            return (math.inf, math.inf) if self.inf > 0 else (-math.inf, -math.inf)
        self.refine(width)
        lo, hi = float(self.lo), float(self.hi)
        if Fraction(lo) > self.lo:
            lo = math.nextafter(lo, -math.inf)
        if Fraction(hi) < self.hi:
            hi = math.nextafter(hi, math.inf)
        return lo, hi

    def __float__(self) -> float:
        if self.inf:
            return math.inf * self.inf
        if self.is_rational:
            return float(self.lo)
        self.refine(Fraction(abs(self.lo) + abs(self.hi) + 1, 2**60))
        return float((self.lo + self.hi) / 2)

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("value is irrational")
        return self.lo

    # comparison ------------------------------------------------------------
    def _cmp_rational(self, q: Fraction) -> int:
        while True:
            if self.is_rational:
                return P.sign(self.lo - q)
            if q <= self.lo:
                return 1
            if q >= self.hi:
                return -1
            if P.evaluate(self.poly, q) == 0:
                self.lo = self.hi = q
                return 0
            self._bisect()

    def compare(self, other) -> int:
        other = Real.coerce(other)
        if self.inf or other.inf:
            return P.sign(self.inf - other.inf) if self.inf != other.inf else 0
        if other.is_rational:
            return self._cmp_rational(other.lo)
        if self.is_rational:
            return -other._cmp_rational(self.lo)
        if self.hi <= other.lo:
            return -1
        if other.hi <= self.lo:
            return 1
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        g = P.gcd(self.poly, other.poly)
        if P.degree(g) >= 1:
            seq = P.sturm_sequence(g)
            if P.count_roots(seq, lo, hi) - (1 if P.evaluate(g, hi) == 0 else 0) > 0:
                return 0
        while not (self.hi <= other.lo or other.hi <= self.lo):
            if self.is_rational or other.is_rational:
                return self.compare(other)
            if self.hi - self.lo >= other.hi - other.lo:
                self._bisect()
            else:
                other._bisect()
        return -1 if self.hi <= other.lo else 1

    def __eq__(self, other) -> bool:
        try:
            return self.compare(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other) -> bool:
        return self.compare(other) < 0

    def __neg__(self) -> "Real":
        if self.inf:
            return Real.infinity(-self.inf)
        if self.is_rational:
            return Real.rational(-self.lo)
        flipped = P.make(c * (-1) ** i for i, c in enumerate(self.poly))
        return Real(flipped, -self.hi, -self.lo)

    # text ------------------------------------------------------------------
    def __str__(self) -> str:
        if self.inf:
            return "+inf" if self.inf > 0 else "-inf"
        if self.is_rational:
            q = self.lo
            if q.denominator == 1:
                return str(q.numerator)
            f = float(q)
            return repr(f) if Fraction(f) == q else f"{q.numerator}/{q.denominator}"
        return repr(float(self))

    def __repr__(self) -> str:
        if self.inf or self.is_rational:
            return f"Real({self})"
        return f"Real(root of {list(map(str, self.poly))} in ({self.lo}, {self.hi}))"


def between(a: Real, b: Real) -> Fraction:
    """A rational strictly between ``a < b``."""
    if a.inf < 0 and b.inf > 0:
        return Fraction(0)
    if a.inf < 0:
        return Fraction(math.floor(b.lo) - 1)
    if b.inf > 0:
        return Fraction(math.ceil(a.hi) + 1)
    while a.hi >= b.lo:
        if a.is_rational and b.is_rational:
            break
        if a.hi - a.lo >= b.hi - b.lo:
            a._bisect()
        else:
            b._bisect()
    return (a.hi + b.lo) / 2


def _snap(r: Real) -> Real:
    """Turn an isolated root into an exact rational when a small-denominator candidate fits."""
    if r.is_rational:
        return r
    # rationals with denominator <= 1e6 are 1e-12 apart, so the closest one to a
    # 1e-13-wide enclosure is the only candidate
    r.refine(Fraction(1, 10**13))
    if r.is_rational:
        return r
    q = ((r.lo + r.hi) / 2).limit_denominator(10**6)
    if r.lo < q < r.hi and P.evaluate(r.poly, q) == 0:
        return Real.rational(q)
    return r


def real_roots(poly) -> list[Real]:
    """Distinct real roots of a nonzero polynomial, ascending."""
    p = P.make(poly) if not isinstance(poly, tuple) else poly
    q = P.squarefree(p)
    return [_snap(Real.root(q, lo, hi)) for lo, hi in P.isolate_roots(q)]
