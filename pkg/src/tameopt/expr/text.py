"""Text form of expressions.

Prefix s-expression grammar (whitespace separated, UTF-8)::

    expr    := "(" head arg* ")"
    (const NUMBER)                 constant
    (var INDEX [ARITY])            input coordinate; ARITY defaults to INDEX+1
    (affine MATRIX VECTOR expr+)   MATRIX @ concat(expr...) + VECTOR
    (poly TERMS expr+)             TERMS = [[coef e1 e2 ...] ...] over concat(expr...)
    (sum expr+) (prod expr expr) (scale NUMBER expr)
    (compose outer inner) (stack expr+)
    (max2 expr expr) (min2 expr expr)
    (NAME expr)                    unary primitive, e.g. (relu (var 0))
    (swish BETA expr) (huber BETA expr)
    MATRIX  := "[" VECTOR* "]"     VECTOR := "[" NUMBER* "]"

Numbers are written with ``repr(float)`` so that text round-trips exactly.
A structured-object form (nested dicts, or the same as JSON) is accepted by
:func:`parse_expr` as well.
"""

from __future__ import annotations

import json
import re

from ..errors import DimensionError, ParseError
from . import nodes as N
from .nodes import BINARY_PRIMITIVES, PRIMITIVES, Expr

_TOKEN = re.compile(r"\s*(?:([()\[\]])|([^\s()\[\]]+))")


def _num(x: float) -> str:
    return repr(float(x))


def serialize_expr(e: Expr) -> str:
    k = e.kind
    if k == "const":
        return f"(const {_num(e.params[0])})"
    if k == "var":
        i, n = e.params
        return f"(var {i})" if n == i + 1 else f"(var {i} {n})"
    kids = " ".join(serialize_expr(c) for c in e.children)
    if k == "affine":
        W, b = e.params
        mat = "[" + " ".join("[" + " ".join(_num(v) for v in row) + "]" for row in W) + "]"
        vec = "[" + " ".join(_num(v) for v in b) + "]"
        return f"(affine {mat} {vec} {kids})"
    if k == "poly":
        terms = " ".join("[" + " ".join([_num(c)] + [str(x) for x in ex]) + "]" for c, ex in e.params)
        return f"(poly [{terms}] {kids})"
    if k == "scale":
        return f"(scale {_num(e.params[0])} {kids})"
    if e.params:  # swish/huber beta
        return f"({k} {_num(e.params[0])} {kids})"
    return f"({k} {kids})"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise ParseError("unreadable input", pos, text[pos])
            if m.group(0).strip() == "":
                break
            tok = m.group(1) or m.group(2)
            self.toks.append((tok, m.start(1) if m.group(1) else m.start(2)))
            pos = m.end()
        self.i = 0

    def peek(self):
        if self.i >= len(self.toks):
            return None, len(self.text)
        return self.toks[self.i]

    def take(self, expected=None):
        tok, pos = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", pos)
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}", pos, tok)
        self.i += 1
        return tok, pos

    def number(self) -> float:
        tok, pos = self.take()
        try:
            return float(tok)
        except ValueError:
            raise ParseError("expected a number", pos, tok) from None

    def integer(self) -> int:
        tok, pos = self.take()
        try:
            return int(tok)
        except ValueError:
            raise ParseError("expected an integer", pos, tok) from None

    def vector(self) -> list[float]:
        self.take("[")
        out = []
        while self.peek()[0] != "]":
            out.append(self.number())
        self.take("]")
        return out

    def matrix(self) -> list[list[float]]:
        self.take("[")
        rows = []
        while self.peek()[0] == "[":
            rows.append(self.vector())
        self.take("]")
        return rows

    def terms(self):
        self.take("[")
        out = []
        while self.peek()[0] == "[":
            self.take("[")
            coef = self.number()
            exps = []
            while self.peek()[0] != "]":
                exps.append(self.integer())
            self.take("]")
            out.append((coef, exps))
        self.take("]")
        return out

    def exprs(self, at_least=1):
        out = []
        while self.peek()[0] == "(":
            out.append(self.expr())
        if len(out) < at_least:
            tok, pos = self.peek()
            raise ParseError(f"expected at least {at_least} subexpression(s)", pos, tok)
        return out

    def expr(self) -> Expr:
        _, start = self.take("(")
        head, hpos = self.take()
        try:
            e = self._body(head, hpos)
        except (DimensionError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), start, head) from None
        self.take(")")
        return e

    def _body(self, head, hpos) -> Expr:
        if head == "const":
            return N.const(self.number())
        if head == "var":
            i = self.integer()
            n = self.integer() if self.peek()[0] not in (")", None) else None
            return N.var(i, n)
        if head == "affine":
            W = self.matrix()
            b = self.vector()
            return N.affine(W, b, *self.exprs())
        if head == "poly":
            t = self.terms()
            return N.poly(t, *self.exprs())
        if head == "sum":
            return N.add(*self.exprs())
        if head == "stack":
            return N.stack(*self.exprs())
        if head == "prod":
            a, b = self._exactly(2)
            return N.mul(a, b)
        if head == "scale":
            c = self.number()
            (a,) = self._exactly(1)
            return N.scale(c, a)
        if head == "compose":
            f, g = self._exactly(2)
            return N.compose(f, g)
        if head in BINARY_PRIMITIVES:
            a, b = self._exactly(2)
            return N.prim(head, a, b)
        if head in PRIMITIVES:
            beta = self.number() if PRIMITIVES[head].nparams else None
            (a,) = self._exactly(1)
            return N.prim(head, a, beta=beta)
        raise ParseError("unknown head", hpos, head)

    def _exactly(self, n):
        tok, pos = self.peek()
        out = self.exprs(at_least=n)
        if len(out) != n:
            raise ParseError(f"expected exactly {n} subexpression(s)", pos, tok)
        return out


def expr_to_dict(e: Expr) -> dict:
    """Structured-object form."""
    d: dict = {"kind": e.kind}
    if e.kind == "var":
        d["index"], d["arity"] = e.params
    elif e.kind == "affine":
        d["matrix"] = [list(r) for r in e.params[0]]
        d["offset"] = list(e.params[1])
    elif e.kind == "poly":
        d["terms"] = [[c, list(ex)] for c, ex in e.params]
    elif e.params:
        d["value" if e.kind in ("const", "scale") else "beta"] = e.params[0]
    if e.children:
        d["children"] = [expr_to_dict(c) for c in e.children]
    return d


def expr_from_dict(d: dict) -> Expr:
    try:
        k = d["kind"]
        kids = [expr_from_dict(c) for c in d.get("children", [])]
        if k == "const":
            return N.const(d["value"])
        if k == "var":
            return N.var(d["index"], d.get("arity"))
        if k == "affine":
            return N.affine(d["matrix"], d["offset"], *kids)
        if k == "poly":
            return N.poly(d["terms"], *kids)
        if k == "sum":
            return N.add(*kids)
        if k == "stack":
            return N.stack(*kids)
        if k == "prod":
            return N.mul(*kids)
        if k == "scale":
            return N.scale(d["value"], *kids)
        if k == "compose":
            return N.compose(*kids)
        return N.prim(k, *kids, beta=d.get("beta"))
    except (KeyError, TypeError, DimensionError) as exc:
        raise ParseError(f"bad expression object: {exc}") from None


def parse_expr(text) -> Expr:
    """Parse the s-expression form, a JSON object string, or a dict."""
    if isinstance(text, dict):
        return expr_from_dict(text)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return expr_from_dict(json.loads(stripped))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.pos) from None
    p = _Parser(text)
    e = p.expr()
    tok, pos = p.peek()
    if tok is not None:
        raise ParseError("trailing input", pos, tok)
    return e
