"""Flattened evaluation tape for :class:`~tameopt.expr.nodes.Expr`.

A :class:`Tape` lists the distinct nodes of an expression in post-order so
that forward evaluation, reverse sweeps and one-sided forward sweeps run as
plain loops. Each ``compose`` node owns a sub-tape for its outer function,
which lives in its own variable scope.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, DomainError, NonLipschitzError
from .nodes import BINARY_PRIMITIVES, PRIMITIVES, Expr, iter_nodes


class Tape:
    def __init__(self, expr: Expr):
        self.expr = expr
        self.arity = expr.arity
        self.dim = expr.dim
        self.nodes = list(iter_nodes(expr, into_compose=False))
        index = {id(n): i for i, n in enumerate(self.nodes)}
        self.kids: list[list[int]] = []
        self.data: list = []
        for node in self.nodes:
            kids = node.children[1:] if node.kind == "compose" else node.children
            self.kids.append([index[id(c)] for c in kids])
            self.data.append(self._prepare(node))

    @staticmethod
    def _prepare(node: Expr):
        k = node.kind
        if k == "const":
            return np.array([node.params[0]])
        if k == "var":
            return node.params[0]
        if k == "affine":
            W = np.array(node.params[0], dtype=float)
            b = np.array(node.params[1], dtype=float)
            splits = np.cumsum([c.dim for c in node.children])[:-1]
            return W, b, splits
        if k == "poly":
            coefs = np.array([t[0] for t in node.params], dtype=float)
            exps = np.array([t[1] for t in node.params], dtype=int)
            splits = np.cumsum([c.dim for c in node.children])[:-1]
            return coefs, exps, splits
        if k == "compose":
            return node.children[0].tape
        if k == "stack":
            return np.cumsum([c.dim for c in node.children])[:-1]
        if k in PRIMITIVES:
            return PRIMITIVES[k]
        return None

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.arity:
            raise DimensionError(f"point has length {x.shape[0]}, expression arity is {self.arity}")
        return x

    def _concat(self, vals, kids):
        if len(kids) == 1:
            return vals[kids[0]]
        return np.concatenate([vals[j] for j in kids])

    def forward(self, x) -> list[np.ndarray]:
        x = self._check_point(x)
        vals: list = [None] * len(self.nodes)
        for i, node in enumerate(self.nodes):
            k = node.kind
            kids = self.kids[i]
            d = self.data[i]
            if k == "const":
                v = d
            elif k == "var":
                v = x[d : d + 1]
            elif k == "affine":
                W, b, _ = d
                v = W @ self._concat(vals, kids) + b
            elif k == "poly":
                coefs, exps, _ = d
                u = self._concat(vals, kids)
                v = np.array([coefs @ np.prod(u ** exps, axis=1)])
            elif k == "sum":
                v = vals[kids[0]]
                for j in kids[1:]:
                    v = v + vals[j]
            elif k == "prod":
                v = vals[kids[0]] * vals[kids[1]]
            elif k == "scale":
                v = node.params[0] * vals[kids[0]]
            elif k == "compose":
                v = d.value(vals[kids[0]])
            elif k == "stack":
                v = self._concat(vals, kids)
            elif k == "max2":
                v = np.maximum(vals[kids[0]], vals[kids[1]])
            elif k == "min2":
                v = np.minimum(vals[kids[0]], vals[kids[1]])
            else:
                u = vals[kids[0]]
                if d.lower is not None:
                    bad = u <= d.lower if d.open_lower else u < d.lower
                    if np.any(bad):
                        raise DomainError(f"{k} evaluated outside its domain at {u[bad][0]!r}")
                v = d.func(u, *node.params)
            vals[i] = v
        return vals

    def value(self, x) -> np.ndarray:
        return self.forward(x)[-1]

    # reverse sweep -------------------------------------------------------
    def vjp(self, x, adj_out, policy, vals=None, ref=None):
        """Selection-rule reverse sweep.

        Returns ``(grad, hit)`` where ``hit`` says whether some kinked
        primitive was evaluated exactly at a kink. With a reference point
        ``ref``, a kink hit at ``x`` takes the branch active at ``ref``
        (the policy only decides when ``ref`` is on the kink too), which
        yields the limiting gradient of the piece containing ``ref``.
        """
        x = self._check_point(x)
        if vals is None:
            vals = self.forward(x)
        rvals = None if ref is None else self.forward(ref)
        n = len(self.nodes)
        adj: list = [None] * n
        adj[-1] = np.asarray(adj_out, dtype=float).reshape(self.dim)
        grad = np.zeros(self.arity)
        hit = False

        def push(j, g):
            if adj[j] is None:
                adj[j] = np.array(g, dtype=float, copy=True)
            else:
                adj[j] = adj[j] + g

        def reduce_to(j, g):
            # broadcasting children of sum/prod have dim 1
            return np.array([g.sum()]) if vals[j].shape[0] == 1 and g.shape[0] != 1 else g

        for i in range(n - 1, -1, -1):
            a = adj[i]
            if a is None:
                continue
            node = self.nodes[i]
            k = node.kind
            kids = self.kids[i]
            d = self.data[i]
            if k == "const":
                continue
            if k == "var":
                grad[d] += a[0]
            elif k == "affine":
                W, _, splits = d
                for j, part in zip(kids, np.split(W.T @ a, splits)):
                    push(j, part)
            elif k == "poly":
                coefs, exps, splits = d
                u = self._concat(vals, kids)
                g = a[0] * _poly_grad(coefs, exps, u)
                for j, part in zip(kids, np.split(g, splits)):
                    push(j, part)
            elif k == "sum":
                for j in kids:
                    push(j, reduce_to(j, a))
            elif k == "prod":
                ja, jb = kids
                push(ja, reduce_to(ja, a * vals[jb]))
                push(jb, reduce_to(jb, a * vals[ja]))
            elif k == "scale":
                push(kids[0], node.params[0] * a)
            elif k == "compose":
                r = None if rvals is None else rvals[kids[0]]
                g, h = d.vjp(vals[kids[0]], a, policy, ref=r)
                hit = hit or h
                push(kids[0], g)
            elif k == "stack":
                for j, part in zip(kids, np.split(a, d)):
                    push(j, part)
            elif k in BINARY_PRIMITIVES:
                A, B = vals[kids[0]], vals[kids[1]]
                first = A > B if k == "max2" else A < B
                w = first.astype(float)
                tie = A == B
                if tie.any():
                    hit = True
                    w[tie] = policy.tie_weight(k)
                    if rvals is not None:
                        RA, RB = rvals[kids[0]], rvals[kids[1]]
                        steer = np.where(RA == RB, w, ((RA > RB) if k == "max2" else (RA < RB)).astype(float))
                        w = np.where(tie, steer, w)
                push(kids[0], a * w)
                push(kids[1], a * (1.0 - w))
            else:
                u = vals[kids[0]]
                if not d.lipschitz and d.lower is not None and np.any(u == d.lower):
                    raise NonLipschitzError(f"{k} has unbounded slope at {d.lower}")
                der = np.asarray(d.deriv(u, *node.params), dtype=float)
                if d.kinks:
                    der = np.array(der, copy=True)
                    for kink, (left, right) in zip(d.kinks, d.slopes):
                        mask = u == kink
                        if mask.any():
                            hit = True
                            der[mask] = policy.kink_value(k, left, right)
                            if rvals is not None:
                                ru = rvals[kids[0]]
                                side = np.where(ru > kink, right, np.where(ru < kink, left, der))
                                der = np.where(mask, side, der)
                push(kids[0], a * der)
        return grad, hit

    # one-sided forward sweep ---------------------------------------------
    def directional(self, x, direction, vals=None) -> np.ndarray:
        """One-sided directional derivative ``f'(x; direction)``.

        At a kink the branch is chosen by the sign of the incoming tangent,
        which gives the exact one-sided derivative for compositions of
        piecewise-C1 primitives.
        """
        x = self._check_point(x)
        direction = np.asarray(direction, dtype=float).reshape(self.arity)
        if vals is None:
            vals = self.forward(x)
        tans: list = [None] * len(self.nodes)
        for i, node in enumerate(self.nodes):
            k = node.kind
            kids = self.kids[i]
            d = self.data[i]
            if k == "const":
                t = np.zeros(1)
            elif k == "var":
                t = direction[d : d + 1]
            elif k == "affine":
                t = d[0] @ self._concat(tans, kids)
            elif k == "poly":
                coefs, exps, _ = d
                t = np.array([_poly_grad(coefs, exps, self._concat(vals, kids)) @ self._concat(tans, kids)])
            elif k == "sum":
                t = tans[kids[0]]
                for j in kids[1:]:
                    t = t + tans[j]
            elif k == "prod":
                ja, jb = kids
                t = tans[ja] * vals[jb] + vals[ja] * tans[jb]
            elif k == "scale":
                t = node.params[0] * tans[kids[0]]
            elif k == "compose":
                t = d.directional(vals[kids[0]], tans[kids[0]])
            elif k == "stack":
                t = self._concat(tans, kids)
            elif k in BINARY_PRIMITIVES:
                A, B = vals[kids[0]], vals[kids[1]]
                ta, tb = tans[kids[0]], tans[kids[1]]
                pick = A > B if k == "max2" else A < B
                t = np.where(pick, ta, tb)
                tie = A == B
                if tie.any():
                    tied = np.maximum(ta, tb) if k == "max2" else np.minimum(ta, tb)
                    t = np.where(tie, tied, t)
            else:
                u = vals[kids[0]]
                tu = tans[kids[0]]
                if not d.lipschitz and d.lower is not None:
                    edge = u == d.lower
                    if np.any(edge & (tu != 0)):
                        raise NonLipschitzError(f"{k} has unbounded slope at {d.lower}")
                    safe = np.where(edge, 1.0, u)
                    t = np.where(edge, 0.0, d.deriv(safe, *node.params) * tu)
                else:
                    t = np.asarray(d.deriv(u, *node.params), dtype=float) * tu
                    for kink, (left, right) in zip(d.kinks, d.slopes):
                        mask = u == kink
                        if mask.any():
                            side = np.where(tu > 0, right, left)
                            t = np.where(mask, side * tu, t)
            tans[i] = t
        return tans[-1]


def _poly_grad(coefs, exps, u):
    T, m = exps.shape
    g = np.zeros(m)
    for j in range(m):
        e = exps[:, j]
        live = e > 0
        if not live.any():
            continue
        reduced = exps[live].copy()
        reduced[:, j] -= 1
        g[j] = (coefs[live] * e[live]) @ np.prod(u ** reduced, axis=1)
    return g


def evaluate_vector(expr: Expr, point) -> np.ndarray:
    """Value of a (possibly vector-valued) expression at ``point``."""
    return expr.tape.value(point).copy()


def evaluate(expr: Expr, point=()) -> float:
    """Value of a scalar expression at ``point``.

    Raises :class:`DomainError` when ``log`` or ``sqrt`` receives an input
    outside its domain and :class:`DimensionError` on a length mismatch.
    """
    if expr.dim != 1:
        raise DimensionError(f"expression has output dim {expr.dim}; use evaluate_vector")
    return float(expr.tape.value(point)[0])
