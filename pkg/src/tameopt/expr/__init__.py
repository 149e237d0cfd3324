"""Expression language for definable functions."""

from .evaluate import Tape, evaluate, evaluate_vector
from .networks import (
    Dataset,
    NetworkSpec,
    build_empirical_risk,
    build_mlp,
    load_dataset,
    load_network,
    loss_expr,
    risk_terms,
    split_risk,
)
from .nodes import (
    PRIMITIVES,
    Expr,
    StructureTag,
    abs_,
    add,
    affine,
    arctan,
    classify_structure,
    compose,
    const,
    elu,
    erf,
    exp,
    gelu,
    hinge,
    huber,
    is_piecewise_polynomial,
    log,
    logistic,
    max2,
    min2,
    mish,
    mul,
    poly,
    prim,
    relu,
    scale,
    sin,
    softplus,
    softsign,
    sqrt,
    square,
    stack,
    substitute,
    swish,
    tanh,
    var,
)
from .text import expr_from_dict, expr_to_dict, parse_expr, serialize_expr

__all__ = [name for name in dir() if not name.startswith("_")]
