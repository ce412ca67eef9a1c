from fractions import Fraction as F

import pytest

from acttopo.act import TreeBuilder, Input, evaluate, tree_metrics, validate_tree
from acttopo.errors import InputError
from acttopo.extract import leaf_dnf
from acttopo.families import (
    EpsDelta, Schedule, closure_delta_eps, fiber_product_formula, t_m_formula,
)
from acttopo.problems import STANDARD_SCHEDULE, circle_tree, distinctness_tree, random_tree, sample_points
from acttopo.semialg import eval_formula
from acttopo.transforms import (
    FiberSpec, eps_delta_height_bound, eps_delta_tree, fiber_product_tree, intersect_tree, t_ell_height_bound,
    t_ell_tree, union_tree,
)

from conftest import x_eq_zero, x_gt_zero, x_lt_zero

SEPARATED = Schedule.of((F(1, 10**5), F(1, 100)), (F(1, 25), F(1, 4)))


def accepts(t, *pts):
    return [evaluate(t, [p] if not isinstance(p, list) else p).accepted for p in pts]


def test_union_and_intersection():
    u = union_tree(x_gt_zero(), x_lt_zero())
    assert accepts(u, 1, -1, 0) == [True, True, False]
    assert validate_tree(u) == []
    assert tree_metrics(u).height == 4 <= 2 + 2


def test_intersect_idempotent(rng):
    t = random_tree(rng, n=2)
    tt = intersect_tree(t, t)
    for p in sample_points(rng, 2, 1000):
        assert evaluate(tt, p).accepted == evaluate(t, p).accepted


def test_union_intersection_random(rng):
    for _ in range(5):
        a, b = random_tree(rng, n=2), random_tree(rng, n=2)
        u, i = union_tree(a, b), intersect_tree(a, b)
        ka, kb = tree_metrics(a).height, tree_metrics(b).height
        assert tree_metrics(u).height <= ka + kb and tree_metrics(i).height <= ka + kb
        for p in sample_points(rng, 2, 200):
            ea, eb = evaluate(a, p).accepted, evaluate(b, p).accepted
            assert evaluate(u, p).accepted == (ea or eb)
            assert evaluate(i, p).accepted == (ea and eb)
    with pytest.raises(InputError):
        union_tree(x_gt_zero(), random_tree(rng, n=2))


def test_eps_delta_examples():
    ed = EpsDelta(F(1, 100), F(1, 10))
    t = eps_delta_tree(x_gt_zero(), ed)
    assert accepts(t, F(1), F(1, 20), F(4)) == [True, False, False]
    t = eps_delta_tree(x_eq_zero(), ed)
    assert accepts(t, F(1, 20), F(1, 5)) == [True, False]
    assert validate_tree(t) == []


def test_t_ell_example():
    t = t_ell_tree(x_gt_zero(), STANDARD_SCHEDULE)
    assert accepts(t, F(1, 50), F(1, 10**5)) == [True, False]


def test_eps_delta_matches_formula_when_separated(rng):
    for _ in range(6):
        t = random_tree(rng)
        f = leaf_dnf(t)
        for ed in SEPARATED.levels:
            tt = eps_delta_tree(t, ed)
            g = closure_delta_eps(f, ed.delta, ed.eps)
            assert tree_metrics(tt).height <= eps_delta_height_bound(tree_metrics(t).height, t.arity)
            for p in sample_points(rng, t.arity, 300, specials=[F(k, 10) for k in range(-30, 31)]):
                assert evaluate(tt, p).accepted == eval_formula(g, p)


def test_eps_equal_delta_squared_overlaps_on_boundary():
    # |f| = delta satisfies both the relaxed f>0 and f=0 conditions; the tree takes the f>0 side
    ed = EpsDelta(F(1, 100), F(1, 10))
    assert not ed.separated
    t = eps_delta_tree(x_eq_zero(), ed)
    g = closure_delta_eps(leaf_dnf(x_eq_zero()), ed.delta, ed.eps)
    assert eval_formula(g, [F(1, 10)]) and not evaluate(t, [F(1, 10)]).accepted


def test_single_level_t_ell_matches_eps_delta(rng):
    t = random_tree(rng, n=2)
    lv = SEPARATED.levels[0]
    a, b = t_ell_tree(t, Schedule((lv,))), eps_delta_tree(t, lv)
    for p in sample_points(rng, 2, 1000):
        assert evaluate(a, p).accepted == evaluate(b, p).accepted


def test_t_ell_matches_formula_and_height(rng):
    for _ in range(6):
        t = random_tree(rng)
        tl = t_ell_tree(t, SEPARATED)
        g = t_m_formula(leaf_dnf(t), SEPARATED)
        k = tree_metrics(t).height
        h = tree_metrics(tl).height
        assert h <= t_ell_height_bound(k, t.arity, 1)
        assert h <= 10 * (2 * k + t.arity)
        for p in sample_points(rng, t.arity, 300):
            assert evaluate(tl, p).accepted == eval_formula(g, p)


def test_annulus_t_ell_matches_formula(rng):
    b = TreeBuilder(2)
    yes, no = b.leaf(True), b.leaf(False)
    from acttopo.act import Const, Var
    b.comp("mul", Input(1), Input(1), "yy", "xx")
    b.comp("mul", Input(2), Input(2), "h", "yy")
    b.comp("add", Var("xx"), Var("yy"), "d1", "h")
    b.comp("sub", Var("h"), Const(1), "b1", "d1")
    b.branch(Var("d1"), "d4", no, no, "b1")
    b.comp("sub", Var("h"), Const(4), "b4", "d4")
    b.branch(Var("d4"), no, no, yes, "b4")
    t = b.build("xx")
    tl = t_ell_tree(t, STANDARD_SCHEDULE)
    g = t_m_formula(leaf_dnf(t), STANDARD_SCHEDULE)
    # no equations in the annulus, so eps never matters and the tree is exact
    for p in sample_points(rng, 2, 1000):
        assert evaluate(tl, p).accepted == eval_formula(g, p)


def test_h_source_reuse():
    t = circle_tree()  # xx, yy, h = xx + yy on the leading chain
    ed = EpsDelta(F(1, 10**4), F(1, 10))
    a, b = eps_delta_tree(t, ed), eps_delta_tree(t, ed, h_source="h")
    assert tree_metrics(b).height < tree_metrics(a).height
    for x in [F(k, 7) for k in range(-10, 11)]:
        for y in (F(0), F(1), F(-99, 100)):
            assert evaluate(a, [x, y]).accepted == evaluate(b, [x, y]).accepted
    with pytest.raises(InputError):
        eps_delta_tree(t, ed, h_source="xx")


def test_fiber_p0_is_renaming(rng):
    t = random_tree(rng, n=2)
    f = fiber_product_tree(t, FiberSpec(2, 1, 0))
    for p in sample_points(rng, 2, 500):
        assert evaluate(f, p).accepted == evaluate(t, p).accepted


def test_fiber_circle():
    t = circle_tree()
    w1 = fiber_product_tree(t, FiberSpec(2, 1, 1))
    assert w1.arity == 3
    assert accepts(w1, [0, 1, -1], [0, 1, F(1, 2)]) == [True, False]
    for p in (1, 2):
        assert tree_metrics(fiber_product_tree(t, FiberSpec(2, 1, p))).height == (p + 1) * tree_metrics(t).height


def test_fiber_matches_formula(rng):
    t = t_ell_tree(circle_tree(), SEPARATED)
    tm_f = t_m_formula(leaf_dnf(circle_tree()), SEPARATED)
    for p in (1, 2):
        w = fiber_product_tree(t, FiberSpec(2, 1, p))
        g = fiber_product_formula(tm_f, 1, p)
        assert tree_metrics(w).height == (p + 1) * tree_metrics(t).height
        assert validate_tree(w) == []
        for pt in sample_points(rng, w.arity, 300, -2, 2, [F(k, 5) for k in range(-6, 7)]):
            assert evaluate(w, pt).accepted == eval_formula(g, pt)


def test_fiber_spec_errors():
    with pytest.raises(InputError):
        FiberSpec(2, 2, 0)
    with pytest.raises(InputError):
        fiber_product_tree(distinctness_tree(3).tree, FiberSpec(2, 1, 0))
