"""Piecewise polynomials: monotone decomposition, one-sided limits, asymptotics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import EventuallyZeroError, ParseError, UndefinedError
from . import _poly as P
from .algebraic import Real, between, real_roots

INCREASING = "increasing"
DECREASING = "decreasing"
CONSTANT = "constant"


@dataclass(frozen=True)
class PiecewisePoly:
    """Polynomial pieces separated by rational breakpoints ``b_1 < ... < b_k``.

    ``pieces[i]`` (coefficients lowest degree first) holds on
    ``[b_i, b_{i+1})`` with ``b_0 = -inf``; a breakpoint itself belongs to
    the piece on its right.
    """

    breakpoints: tuple
    pieces: tuple

    def __post_init__(self):
        bps = tuple(P.to_fraction(b) for b in self.breakpoints)
        pieces = tuple(P.make(p) for p in self.pieces)
        if len(pieces) != len(bps) + 1:
            raise ValueError(f"{len(bps)} breakpoints need {len(bps) + 1} pieces, got {len(pieces)}")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def polynomial(cls, coeffs) -> "PiecewisePoly":
        return cls((), (coeffs,))

    @classmethod
    def relu(cls) -> "PiecewisePoly":
        return cls((0,), ((), (0, 1)))

    @property
    def continuity(self) -> tuple[bool, ...]:
        return tuple(
            P.evaluate(self.pieces[i], b) == P.evaluate(self.pieces[i + 1], b)
            for i, b in enumerate(self.breakpoints)
        )

    def piece_index(self, x, side: str = "right") -> int:
        """Index of the piece governing ``x`` (``side='left'``: just below ``x``)."""
        x = Real.coerce(x)
        if side == "right":
            return sum(1 for b in self.breakpoints if not x < b)
        return sum(1 for b in self.breakpoints if b < x)

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            return P.evaluate(self.pieces[self.piece_index(x)], Fraction(x))
        i = sum(1 for b in self.breakpoints if float(b) <= x)
        return P.evaluate_float(self.pieces[i], float(x))

    def derivative(self) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, tuple(P.derivative(p) for p in self.pieces))

    def to_dict(self) -> dict:
        def num(q: Fraction):
            return q.numerator if q.denominator == 1 else str(q)

        return {
            "breakpoints": [num(b) for b in self.breakpoints],
            "pieces": [[num(c) for c in p] for p in self.pieces],
        }

    @classmethod
    def from_dict(cls, obj) -> "PiecewisePoly":
        try:
            if isinstance(obj, list):
                return cls.polynomial(obj)
            return cls(tuple(obj.get("breakpoints", ())), tuple(obj["pieces"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad piecewise polynomial: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePoly":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.pos) from None


@dataclass(frozen=True)
class MonotoneDecomposition:
    """Cuts ``a = a_0 < ... < a_{k+1} = b`` and one label per open subinterval."""

    cuts: tuple
    labels: tuple

    def intervals(self):
        return list(zip(self.cuts, self.cuts[1:], self.labels))

    def __str__(self) -> str:
        return " ".join(f"({lo},{hi}):{lab}" for lo, hi, lab in self.intervals())


def _label(p, q: Fraction) -> str:
    if not p:
        return CONSTANT
    s = P.sign_at(p, q)
    return INCREASING if s > 0 else DECREASING


def monotonicity_decomposition(f, a, b) -> MonotoneDecomposition:
    """Split ``(a, b)`` into maximal pieces where ``f`` is constant or strictly monotone.

    Cuts are breakpoints of ``f`` inside ``(a, b)`` and roots of a piece's
    derivative where it changes sign. A breakpoint separating two pieces
    with the same label is dropped when ``f`` is continuous there.
    """
    if not isinstance(f, PiecewisePoly):
        f = PiecewisePoly.polynomial(f)
    lo, hi = Real.coerce(a), Real.coerce(b)
    if not lo < hi:
        raise ValueError("need a < b")
    inner = [bp for bp in f.breakpoints if lo < bp < hi]
    bounds = [lo] + [Real.rational(bp) for bp in inner] + [hi]
    first = f.piece_index(lo, "right") if lo.is_finite else 0
    cuts: list[Real] = [lo]
    labels: list[str] = []
    kinds: list[str] = []  # why each interior cut exists
    for j, (l, r) in enumerate(zip(bounds, bounds[1:])):
        dp = P.derivative(f.pieces[first + j])
        sub = [l]
        if dp:
            sub += [z for z in real_roots(dp) if l < z < r]
        sub.append(r)
        for s0, s1 in zip(sub, sub[1:]):
            labels.append(_label(dp, between(s0, s1)))
            cuts.append(s1)
            kinds.append("root")
        kinds[-1] = "break"
    kinds.pop()  # the final cut is b itself
    cont = dict(zip(f.breakpoints, f.continuity))
    out_cuts, out_labels = [cuts[0]], [labels[0]]
    for cut, kind, lab in zip(cuts[1:-1], kinds, labels[1:]):
        mergeable = lab == out_labels[-1] and (kind == "root" or cont[cut.as_fraction()])
        if not mergeable:
            out_cuts.append(cut)
            out_labels.append(lab)
    out_cuts.append(cuts[-1])
    return MonotoneDecomposition(tuple(out_cuts), tuple(out_labels))


# rational functions of piecewise polynomials ---------------------------------


@dataclass(frozen=True)
class PiecewiseRational:
    """Quotient ``num / den`` of two piecewise polynomials."""

    num: PiecewisePoly
    den: PiecewisePoly

    @classmethod
    def of(cls, num, den=(1,)) -> "PiecewiseRational":
        if not isinstance(num, PiecewisePoly):
            num = PiecewisePoly.polynomial(num)
        if not isinstance(den, PiecewisePoly):
            den = PiecewisePoly.polynomial(den)
        return cls(num, den)

    def __call__(self, x: float) -> float:
        return float(self.num(x)) / float(self.den(x))


def _as_rational(f) -> PiecewiseRational:
    if isinstance(f, PiecewiseRational):
        return f
    if isinstance(f, PiecewisePoly):
        return PiecewiseRational.of(f)
    if isinstance(f, tuple) and len(f) == 2:
        return PiecewiseRational.of(*f)
    return PiecewiseRational.of(f)


def _pieces_near(f: PiecewiseRational, c, side: str):
    if isinstance(c, float) and math.isinf(c):
        i_n = 0 if c < 0 else len(f.num.pieces) - 1
        i_d = 0 if c < 0 else len(f.den.pieces) - 1
    else:
        i_n = f.num.piece_index(c, side)
        i_d = f.den.piece_index(c, side)
    return f.num.pieces[i_n], f.den.pieces[i_d]


def _lowest(p):
    for i, c in enumerate(p):
        if c != 0:
            return i, c
    return None


def one_sided_limit(f, c, side: str = "right") -> float:
    """``lim f(x)`` as ``x -> c`` from ``side`` (``'right'`` or ``'left'``).

    ``c`` may be ``+-inf`` (the side is then implied). The limit comes from
    the lowest-order Taylor coefficients of numerator and denominator at
    ``c``, or from the degrees at infinity. Returns a float, possibly
    ``+-inf``.

    >>> one_sided_limit(PiecewiseRational.of([-1, 0, 1], [-1, 1]), 1, "right")
    2.0
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    f = _as_rational(f)
    if isinstance(c, str):
        c = float(c.replace("oo", "inf"))
    if isinstance(c, float) and math.isinf(c):
        num, den = _pieces_near(f, c, side)
        if not den:
            raise UndefinedError("denominator vanishes identically near infinity")
        if not num:
            return 0.0
        q = P.degree(num) - P.degree(den)
        ratio = num[-1] / den[-1]
        if c < 0 and q % 2:
            ratio = -ratio
        if q > 0:
            return math.inf if ratio > 0 else -math.inf
        return float(ratio) if q == 0 else 0.0
    c = P.to_fraction(c)
    num, den = _pieces_near(f, c, side)
    num, den = P.taylor_shift(num, c), P.taylor_shift(den, c)
    ld = _lowest(den)
    if ld is None:
        raise UndefinedError(f"denominator vanishes identically on the {side} of {c}")
    ln = _lowest(num)
    if ln is None:
        return 0.0
    (a, pa), (b, qb) = ln, ld
    ratio = pa / qb
    if a > b:
        return 0.0
    if a == b:
        return float(ratio)
    if side == "left" and (b - a) % 2:
        ratio = -ratio
    return math.inf if ratio > 0 else -math.inf


def asymptotic_exponent(f) -> tuple[Fraction, int]:
    """``(c, q)`` with ``f(t) / (c t^q) -> 1`` as ``t -> +inf``.

    >>> asymptotic_exponent(PiecewiseRational.of([1, 0, 0, 3], [2, 1]))
    (Fraction(3, 1), 2)
    """
    f = _as_rational(f)
    num, den = _pieces_near(f, math.inf, "right")
    if not den:
        raise UndefinedError("denominator vanishes identically near infinity")
    if not num:
        raise EventuallyZeroError("function is eventually zero")
    return num[-1] / den[-1], P.degree(num) - P.degree(den)
