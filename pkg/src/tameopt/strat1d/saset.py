"""Finite unions of points and open intervals of the real line.

Normal form: components sorted and pairwise disjoint, and no two open
intervals are separated only by a point that also belongs to the set, so
``(0,1) | {1} | (1,2)`` is stored as ``(0,2)``. Endpoints are exact
:class:`~tameopt.strat1d.algebraic.Real` values.

Text form: components joined by ``|``, e.g. ``{0} | (1,2) | (3,+inf)``;
``{}`` is the empty set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import ParseError
from . import _poly as P
from .algebraic import Real, between, real_roots


@dataclass(frozen=True, eq=False)
class Component:
    lo: Real
    hi: Real  # equal to lo for a point

    @property
    def is_point(self) -> bool:
        return self.lo is self.hi

    def __str__(self) -> str:
        return f"{{{self.lo}}}" if self.is_point else f"({self.lo},{self.hi})"


def point(a) -> Component:
    r = Real.coerce(a)
    if not r.is_finite:
        raise ValueError("a point must be finite")
    return Component(r, r)


def interval(a, b) -> Component:
    lo, hi = Real.coerce(a), Real.coerce(b)
    if not lo < hi:
        raise ValueError(f"empty interval ({lo},{hi})")
    return Component(lo, hi)


def _unique_sorted(values: list[Real]) -> list[Real]:
    out: list[Real] = []
    for v in sorted(values):
        if not out or v != out[-1]:
            out.append(v)
    return out


class UnivariateSASet:
    """Immutable finite union of points and open intervals, kept in normal form."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Component] = ()):
        object.__setattr__(self, "components", tuple(_normalize(list(components))))

    def __setattr__(self, name, value):
        raise AttributeError("UnivariateSASet is immutable")

    # constructors -------------------------------------------------------
    @classmethod
    def empty(cls) -> "UnivariateSASet":
        return cls(())

    @classmethod
    def reals(cls) -> "UnivariateSASet":
        return cls((Component(Real.infinity(-1), Real.infinity(1)),))

    @classmethod
    def parse(cls, text: str) -> "UnivariateSASet":
        return parse_saset(text)

    # queries ------------------------------------------------------------
    def contains(self, x) -> bool:
        x = Real.coerce(x)
        for c in self.components:
            if c.is_point:
                if c.lo == x:
                    return True
            elif c.lo < x < c.hi:
                return True
        return False

    __contains__ = contains

    def endpoints(self) -> list[Real]:
        pts: list[Real] = []
        for c in self.components:
            pts.extend([c.lo] if c.is_point else [e for e in (c.lo, c.hi) if e.is_finite])
        return _unique_sorted(pts)

    @property
    def is_empty(self) -> bool:
        return not self.components

    @property
    def is_finite(self) -> bool:
        """Finite iff every component is a point (empty interior)."""
        return all(c.is_point for c in self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnivariateSASet):
            return NotImplemented
        if len(self.components) != len(other.components):
            return False
        for a, b in zip(self.components, other.components):
            if a.is_point != b.is_point or a.lo != b.lo or a.hi != b.hi:
                return False
        return True

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return " | ".join(str(c) for c in self.components) if self.components else "{}"

    def __repr__(self) -> str:
        return f"UnivariateSASet({str(self)!r})"

    # boolean algebra ----------------------------------------------------
    def union(self, other: "UnivariateSASet") -> "UnivariateSASet":
        return _combine(self, other, lambda a, b: a or b)

    def intersect(self, other: "UnivariateSASet") -> "UnivariateSASet":
        return _combine(self, other, lambda a, b: a and b)

    def complement(self) -> "UnivariateSASet":
        return _combine(self, self, lambda a, b: not a)

    def difference(self, other: "UnivariateSASet") -> "UnivariateSASet":
        return _combine(self, other, lambda a, b: a and not b)

    __or__ = union
    __and__ = intersect
    __invert__ = complement
    __sub__ = difference


def is_normal_form(components: Sequence[Component]) -> bool:
    """Whether ``components`` are sorted, disjoint and not further mergeable."""
    comps = list(components)
    for c in comps:
        if not c.is_point and not c.lo < c.hi:
            return False
        if c.is_point and not c.lo.is_finite:
            return False
    for a, b in zip(comps, comps[1:]):
        if a.hi > b.lo:
            return False
        if a.hi == b.lo and (a.is_point and b.is_point):
            return False
    for a, b, c in zip(comps, comps[1:], comps[2:]):
        if not a.is_point and b.is_point and not c.is_point and a.hi == b.lo == c.lo:
            return False  # (u,p) | {p} | (p,v) should be (u,v)
    return True


def sa_union(S: UnivariateSASet, T: UnivariateSASet) -> UnivariateSASet:
    return S.union(T)


def sa_intersect(S: UnivariateSASet, T: UnivariateSASet) -> UnivariateSASet:
    return S.intersect(T)


def sa_complement(S: UnivariateSASet) -> UnivariateSASet:
    return S.complement()


# cell machinery ---------------------------------------------------------------
# The cuts c_1 < ... < c_k split the line into cells
#   (-inf, c_1), {c_1}, (c_1, c_2), ..., {c_k}, (c_k, +inf)
# and every set whose endpoints are among the cuts is a union of cells.


def _cells(cuts: list[Real]) -> list[Component]:
    bounds = [Real.infinity(-1)] + cuts + [Real.infinity(1)]
    cells = [Component(bounds[0], bounds[1])]
    for i, c in enumerate(cuts):
        cells.append(Component(c, c))
        cells.append(Component(c, bounds[i + 2]))
    return cells


def _member_flags(S: UnivariateSASet, cells: list[Component]) -> list[bool]:
    flags = []
    for cell in cells:
        if cell.is_point:
            flags.append(S.contains(cell.lo))
        else:
            flags.append(S.contains(Real.rational(between(cell.lo, cell.hi))))
    return flags


def _from_cells(cells: list[Component], flags: list[bool]) -> list[Component]:
    out: list[Component] = []
    open_start: Real | None = None
    n = len(cells)
    for i in range(0, n, 2):  # even indices are open cells
        if flags[i]:
            if open_start is None:
                open_start = cells[i].lo
            if i + 1 < n and flags[i + 1] and flags[i + 2]:
                continue  # glue through the included point
            out.append(Component(open_start, cells[i].hi))
            open_start = None
        if i + 1 < n and flags[i + 1] and not (flags[i] and flags[i + 2]):
            out.append(Component(cells[i + 1].lo, cells[i + 1].lo))
    return out


def _combine(S: UnivariateSASet, T: UnivariateSASet, op) -> UnivariateSASet:
    cuts = _unique_sorted(S.endpoints() + T.endpoints())
    cells = _cells(cuts)
    fs = _member_flags(S, cells)
    ft = _member_flags(T, cells) if T is not S else fs
    flags = [op(a, b) for a, b in zip(fs, ft)]
    result = UnivariateSASet.__new__(UnivariateSASet)
    object.__setattr__(result, "components", tuple(_from_cells(cells, flags)))
    return result


def _normalize(components: list[Component]) -> list[Component]:
    if not components:
        return []
    cuts: list[Real] = []
    for c in components:
        cuts.extend([c.lo] if c.is_point else [e for e in (c.lo, c.hi) if e.is_finite])
    cuts = _unique_sorted(cuts)
    cells = _cells(cuts)
    flags = []
    for cell in cells:
        if cell.is_point:
            x = cell.lo
            flags.append(any((c.lo == x) if c.is_point else (c.lo < x < c.hi) for c in components))
        else:
            q = Real.rational(between(cell.lo, cell.hi))
            flags.append(any((not c.is_point) and c.lo < q < c.hi for c in components))
    return _from_cells(cells, flags)


# polynomial sign conditions -----------------------------------------------------

_RELATIONS = {
    "<": (-1,),
    "=": (0,),
    "==": (0,),
    ">": (1,),
    "<=": (-1, 0),
    ">=": (0, 1),
    "!=": (-1, 1),
}


def solve_poly_inequality(coeffs, relation: str) -> UnivariateSASet:
    """``{x : p(x) relation 0}`` with ``coeffs`` listed lowest degree first.

    >>> str(solve_poly_inequality([0, -1, 1], "<"))
    '(0,1)'
    """
    if relation not in _RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    wanted = _RELATIONS[relation]
    p = P.make(coeffs)
    if not p:
        return UnivariateSASet.reals() if 0 in wanted else UnivariateSASet.empty()
    roots = real_roots(p)
    cells = _cells(roots)
    flags = []
    for cell in cells:
        if cell.is_point:
            flags.append(0 in wanted)
        else:
            flags.append(P.sign_at(p, between(cell.lo, cell.hi)) in wanted)
    result = UnivariateSASet.__new__(UnivariateSASet)
    object.__setattr__(result, "components", tuple(_from_cells(cells, flags)))
    return result


# text form ----------------------------------------------------------------------

_NUM = r"[+-]?(?:inf|infinity|oo|\d+(?:/\d+)?|\d*\.\d+(?:e[+-]?\d+)?|\d+\.?(?:e[+-]?\d+)?)"
_COMPONENT = re.compile(
    rf"\s*(?:\{{\s*(?P<pt>{_NUM})\s*\}}|\(\s*(?P<lo>{_NUM})\s*,\s*(?P<hi>{_NUM})\s*\)|\{{\s*\}})\s*",
    re.IGNORECASE,
)


def _parse_real(tok: str) -> Real:
    t = tok.lower()
    if "inf" in t or "oo" in t:
        return Real.coerce(t)
    return Real.rational(Fraction(t))


def parse_saset(text: str) -> UnivariateSASet:
    """Parse ``{0} | (1,2) | (3,+inf)``; numbers may be integers, decimals or ``p/q``."""
    parts = text.split("|")
    comps: list[Component] = []
    pos = 0
    for part in parts:
        m = _COMPONENT.fullmatch(part)
        if m is None:
            raise ParseError("expected {a}, (a,b) or {}", pos, part.strip())
        try:
            if m.group("pt") is not None:
                comps.append(point(_parse_real(m.group("pt"))))
            elif m.group("lo") is not None:
                comps.append(interval(_parse_real(m.group("lo")), _parse_real(m.group("hi"))))
        except ValueError as exc:
            raise ParseError(str(exc), pos, part.strip()) from None
        pos += len(part) + 1
    return UnivariateSASet(comps)
