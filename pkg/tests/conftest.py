import random
from fractions import Fraction

import pytest

from acttopo.act import Const, Input, TreeBuilder, Var


def sign_tree(arity: int, poly_ops, accept=("gt",)):
    """Chain of computations from ``poly_ops`` [(op, left, right), ...] then one branch
    on the last value; the outcomes listed in ``accept`` go to a Yes leaf."""
    b = TreeBuilder(arity, "v")
    yes, no = b.leaf(True), b.leaf(False)
    ids = [f"c{i}" for i in range(len(poly_ops))]
    br = "br"
    for i, (op, left, right) in enumerate(poly_ops):
        b.comp(op, left, right, ids[i + 1] if i + 1 < len(ids) else br, ids[i])
    test = Var(ids[-1]) if ids else Input(1)
    outs = {k: (yes if k in accept else no) for k in ("gt", "eq", "lt")}
    b.branch(test, outs["gt"], outs["eq"], outs["lt"], br)
    return b.build(ids[0] if ids else br)


def x_gt_zero():
    """{x1 > 0}: branch directly on the input, height 2."""
    return sign_tree(1, [], accept=("gt",))


def x_lt_zero():
    return sign_tree(1, [], accept=("lt",))


def x_eq_zero():
    return sign_tree(1, [], accept=("eq",))


def neq_tree():
    """{x1 != x2}: one subtraction, one branch."""
    return sign_tree(2, [("sub", Input(1), Input(2))], accept=("gt", "lt"))


@pytest.fixture
def rng():
    return random.Random(12345)


def rational_points(rng, n, count, lo=-3, hi=3):
    out = []
    for _ in range(count):
        out.append([Fraction(rng.randint(lo * 10, hi * 10), rng.choice((1, 2, 5, 10))) for _ in range(n)])
    return out


__all__ = ["sign_tree", "x_gt_zero", "x_lt_zero", "x_eq_zero", "neq_tree", "rational_points", "Const"]
