"""Feedforward networks, losses and empirical risks as expressions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DimensionError, ParseError
from . import nodes as N
from .nodes import PRIMITIVES, Expr


@dataclass(frozen=True)
class NetworkSpec:
    """Depth-L network ``a_i = rho_i(V_i a_{i-1})``.

    ``weights[i]`` has shape ``(width_i, width_{i-1})`` with ``width_0 =
    input_dim``. Activations are primitive names or ``"identity"``;
    parametrised ones may be written ``"swish:1.5"``.
    """

    input_dim: int
    weights: tuple
    activations: tuple

    def __post_init__(self):
        ws = tuple(np.array(W, dtype=float, ndmin=2) for W in self.weights)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "activations", tuple(self.activations))
        if len(ws) != len(self.activations):
            raise DimensionError("one activation per layer is required")
        width = self.input_dim
        for i, W in enumerate(ws):
            if W.shape[1] != width:
                raise DimensionError(f"layer {i + 1} has {W.shape[1]} columns, expected {width}")
            width = W.shape[0]
        for a in self.activations:
            _activation(a)

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(W.shape[0] for W in self.weights)

    @property
    def n_params(self) -> int:
        return sum(W.size for W in self.weights)

    def flat_params(self) -> np.ndarray:
        if not self.weights:
            return np.zeros(0)
        return np.concatenate([W.ravel() for W in self.weights])


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.size == 0:
            raise DimensionError("dataset must contain at least one observation")
        x = x.reshape(len(x), -1) if x.ndim != 2 else x
        y = y.reshape(len(y), -1) if y.ndim != 2 else y
        if len(x) == 0:
            raise DimensionError("dataset must contain at least one observation")
        if len(x) != len(y):
            raise DimensionError(f"{len(x)} inputs but {len(y)} targets")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.x)


def _activation(name: str):
    if name == "identity":
        return None
    base, _, beta = name.partition(":")
    if base not in PRIMITIVES:
        raise DimensionError(f"unknown activation {name!r}")
    return base, (float(beta) if beta else None)


def _apply(name: str, e: Expr) -> Expr:
    act = _activation(name)
    if act is None:
        return e
    base, beta = act
    return N.prim(base, e, beta=beta)


def build_mlp(spec: NetworkSpec, parametric: bool = False) -> Expr:
    """Expression for ``f_theta(x) = a_L``.

    With ``parametric=False`` the weights are baked in and the expression
    has arity ``input_dim``. With ``parametric=True`` the weights become
    variables ``0 .. n_params-1`` (layer by layer, row-major) followed by the
    ``input_dim`` input coordinates.
    """
    p = spec.input_dim
    offset = spec.n_params if parametric else 0
    n = offset + p
    inputs = [N.var(offset + j, n) for j in range(p)]
    a = inputs[0] if p == 1 else N.stack(*inputs)
    theta = 0
    for W, act in zip(spec.weights, spec.activations):
        rows, cols = W.shape
        if parametric:
            neurons = []
            for r in range(rows):
                row_vars = [N.var(theta + c, n) for c in range(cols)]
                theta += cols
                terms = []
                for c in range(cols):
                    e = [0] * (2 * cols)
                    e[c] = 1
                    e[cols + c] = 1
                    terms.append((1.0, e))
                neurons.append(N.poly(terms, *row_vars, a))
            z = neurons[0] if rows == 1 else N.stack(*neurons)
        else:
            z = N.affine(W, np.zeros(rows), a)
        a = _apply(act, z)
    return a


def loss_expr(name: str, q: int = 1, beta: float = 1.0) -> Expr:
    """Loss ``l(prediction, target)`` summed over ``q`` output coordinates.

    Variables ``0..q-1`` are the prediction z, ``q..2q-1`` the target y.
    """
    terms = []
    for j in range(q):
        z = N.var(j, 2 * q)
        y = N.var(q + j, 2 * q)
        if name == "squared":
            t = N.square(y - z)
        elif name == "absolute":
            t = N.abs_(y - z)
        elif name == "hinge":
            t = N.hinge(y * z)
        elif name == "huber":
            t = N.huber(y - z, beta)
        elif name == "logistic":
            t = N.softplus(-(y * z))
        elif name == "bce":
            t = -(y * N.log(z) + (1.0 - y) * N.log(1.0 - z))
        else:
            raise ValueError(f"unknown loss {name!r}")
        terms.append(t)
    return terms[0] if q == 1 else N.add(*terms)


def risk_terms(data: Dataset, net: Expr, loss: Expr, n_params: int) -> list[Expr]:
    """Per-observation terms ``l(f_theta(x_i), y_i)`` as expressions in theta."""
    q = data.y.shape[1]
    p = data.x.shape[1]
    if net.dim != q:
        raise DimensionError(f"network output dim {net.dim} != target dim {q}")
    if loss.arity != 2 * q:
        raise DimensionError(f"loss arity {loss.arity} != 2 * {q}")
    if net.arity > n_params + p:
        raise DimensionError(f"network arity {net.arity} exceeds n_params + input dim")
    terms = []
    for xi, yi in zip(data.x, data.y):
        bound = N.substitute(net, {n_params + j: float(v) for j, v in enumerate(xi)}, arity=n_params)
        if bound.arity < n_params:
            bound = N.add(bound, N.scale(0.0, N.var(n_params - 1, n_params)))
        target = [N.const(v) for v in yi]
        terms.append(N.compose(loss, N.stack(bound, *target)))
    return terms


def build_empirical_risk(net: Expr, data: Dataset, loss: Expr, n_params: int) -> Expr:
    """``(1/N) sum_i l(f_theta(x_i), y_i)`` as an expression in theta only."""
    terms = risk_terms(data, net, loss, n_params)
    total = terms[0] if len(terms) == 1 else N.add(*terms)
    return N.scale(1.0 / len(terms), total)


def split_risk(expr: Expr) -> list[Expr] | None:
    """Inverse of :func:`build_empirical_risk`: the per-observation terms."""
    if expr.kind != "scale":
        return None
    inner = expr.children[0]
    if inner.kind == "sum":
        return list(inner.children)
    return [inner]


def load_network(path_or_obj) -> NetworkSpec:
    """Load ``{"input_dim": p, "layers": [{"weights": [[...]], "activation": "relu"}]}``."""
    obj = _load_json(path_or_obj)
    try:
        layers = obj.get("layers", [])
        return NetworkSpec(
            int(obj["input_dim"]),
            tuple(layer["weights"] for layer in layers),
            tuple(layer.get("activation", "relu") for layer in layers),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad network spec: {exc}") from None


def load_dataset(path_or_obj) -> Dataset:
    """Load ``{"x": [[...], ...], "y": [[...], ...]}``."""
    obj = _load_json(path_or_obj)
    try:
        return Dataset(obj["x"], obj["y"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad dataset: {exc}") from None


def _load_json(path_or_obj):
    if isinstance(path_or_obj, dict):
        return path_or_obj
    try:
        return json.loads(Path(path_or_obj).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc.msg}", exc.pos) from None
