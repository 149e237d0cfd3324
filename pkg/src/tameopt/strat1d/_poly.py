"""Exact univariate polynomials over the rationals.

A polynomial is a tuple of :class:`~fractions.Fraction` coefficients, lowest
degree first, with no trailing zeros (the zero polynomial is ``()``).
Floating-point inputs are converted to their exact binary value.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Poly = tuple


def to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        if not math.isfinite(c):
            raise ValueError(f"non-finite coefficient {c}")
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    return Fraction(c)


def make(coeffs: Iterable) -> Poly:
    cs = [to_fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def degree(p: Poly) -> int:
    return len(p) - 1


def add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return make((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def neg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, neg(q))


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return make(out)


def scale(c, p: Poly) -> Poly:
    c = to_fraction(c)
    return make(c * a for a in p)


def divmod_(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = degree(q)
    lead = q[-1]
    quot = [Fraction(0)] * max(len(p) - dq, 0)
    while len(r) - 1 >= dq and r:
        shift = len(r) - 1 - dq
        c = r[-1] / lead
        quot[shift] = c
        for i, b in enumerate(q):
            r[shift + i] -= c * b
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return make(quot), make(r)


def monic(p: Poly) -> Poly:
    return scale(1 / p[-1], p) if p else ()


def gcd(p: Poly, q: Poly) -> Poly:
    while q:
        p, q = q, divmod_(p, q)[1]
    return monic(p)


def derivative(p: Poly) -> Poly:
    return make(i * c for i, c in enumerate(p) if i > 0)


def squarefree(p: Poly) -> Poly:
    """Product of the distinct irreducible factors (same roots, all simple)."""
    if degree(p) < 1:
        return monic(p)
    g = gcd(p, derivative(p))
    return monic(divmod_(p, g)[0])


def evaluate(p: Poly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def evaluate_float(p: Poly, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + float(c)
    return acc


def sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_at(p: Poly, x) -> int:
    return sign(evaluate(p, x))


def sign_at_inf(p: Poly, positive: bool) -> int:
    if not p:
        return 0
    s = sign(p[-1])
    return s if positive or degree(p) % 2 == 0 else -s


def taylor_shift(p: Poly, c) -> Poly:
    """Coefficients of ``p(c + h)`` in ``h``."""
    c = to_fraction(c)
    out = list(p)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += c * out[j + 1]
    return make(out)


def sturm_sequence(p: Poly) -> list[Poly]:
    seq = [p, derivative(p)]
    while seq[-1]:
        r = divmod_(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(neg(r))
    return [s for s in seq if s]


def _variations(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def variations_at(seq: list[Poly], x) -> int:
    if x == math.inf:
        return _variations([sign_at_inf(s, True) for s in seq])
    if x == -math.inf:
        return _variations([sign_at_inf(s, False) for s in seq])
    return _variations([sign_at(s, x) for s in seq])


def count_roots(seq: list[Poly], a, b) -> int:
    """Distinct real roots in ``(a, b]`` of the first polynomial of ``seq``."""
    return variations_at(seq, a) - variations_at(seq, b)


def root_bound(p: Poly) -> Fraction:
    """Cauchy bound: every real root lies strictly inside ``(-B, B)``."""
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def isolate_roots(p: Poly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint isolating intervals for the real roots of a nonzero polynomial.

    Each entry is ``(lo, hi)``: either ``lo == hi`` is an exact rational root,
    or ``p`` has exactly one root in the open interval and none at the ends.
    """
    q = squarefree(p)
    if degree(q) < 1:
        return []
    seq = sturm_sequence(q)
    B = root_bound(q)
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(-B, B)]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(seq, lo, hi)
        if n == 0:
            continue
        if n == 1 and evaluate(q, hi) != 0:
            out.append((lo, hi))
            continue
        if n == 1:
            out.append((hi, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((lo, mid))
        stack.append((mid, hi))
    # an interval (lo, hi] whose root is at hi has been recorded as a point
    return sorted(out)
