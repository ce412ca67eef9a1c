"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the report lines,
or ``python3 tests/test_acceptance.py`` for the report alone.
"""

import random
import sys
import time
from fractions import Fraction as F
from math import factorial

import numpy as np
import pytest

from acttopo.act import evaluate, tree_metrics
from acttopo.bounds import invert_height_bound, projection_inequality_check
from acttopo.extract import dnf_stats, leaf_dnf
from acttopo.families import Schedule, closure_delta_eps, fiber_product_formula, t_m_formula
from acttopo.poly import variables
from acttopo.problems import (
    STANDARD_SCHEDULE, circle_fiber_example, circle_projection_tm_formula, crossing_number_example,
    distinctness_tree, parity_problem, random_tree, sample_points, segment_example,
)
from acttopo.semialg import BasicSet, Dnf, Sign, SignCondition, eval_formula
from acttopo.topology import (
    Box, OccupancyGrid, betti_numbers, build_complex, component_count, occupancy_grid,
)
from acttopo.transforms import (
    FiberSpec, eps_delta_height_bound, eps_delta_tree, fiber_product_tree, t_ell_height_bound, t_ell_tree,
)

# Corpus parameters.  The gadget trees reproduce the closed families exactly
# only when eps < delta^2 at every level, hence the separated schedule here.
CORPUS_SEED = 2024
CORPUS_SIZE = 20
CORPUS_POINTS = 1000
SEPARATED = Schedule.of((F(1, 10**5), F(1, 100)), (F(1, 25), F(1, 4)))

# Runtime ceilings in seconds.
LIMIT_1MIN = 60
LIMIT_2MIN = 120
LIMIT_5MIN = 300


def report(num: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
    assert ok, detail


def betti(f, box, mmax=None):
    return betti_numbers(build_complex(occupancy_grid(f, box)), mmax).b


def closed(n, *cs):
    return Dnf(n, (BasicSet(n, tuple(SignCondition(p, s) for p, s in cs)),))


_corpus_cache = []


def corpus():
    if not _corpus_cache:
        rng = random.Random(CORPUS_SEED)
        _corpus_cache.extend(random_tree(rng) for _ in range(CORPUS_SIZE))
    return _corpus_cache


def test_c01_transform_semantics():
    start = time.perf_counter()
    rng = random.Random(CORPUS_SEED + 1)
    specials = [F(k, 10) for k in range(-30, 31)]
    ed = SEPARATED.levels[1]
    bad = checked = 0
    for t in corpus():
        f = leaf_dnf(t)
        te, tl = eps_delta_tree(t, ed), t_ell_tree(t, SEPARATED)
        fe, fl = closure_delta_eps(f, ed.delta, ed.eps), t_m_formula(f, SEPARATED)
        for pt in sample_points(rng, t.arity, CORPUS_POINTS, F(-3), F(3), specials):
            bad += evaluate(te, pt).accepted != eval_formula(fe, pt)
            bad += evaluate(tl, pt).accepted != eval_formula(fl, pt)
            checked += 2
    dt = time.perf_counter() - start
    report(1, bad == 0 and dt < LIMIT_1MIN,
           f"{bad} mismatches over {checked} exact evaluations on {len(corpus())} trees ({dt:.1f}s)")


def test_c02_height_laws():
    worst_ed = worst_tl = 0.0
    bad = []
    fiber_checked = 0
    for i, t in enumerate(corpus()):
        k, n = tree_metrics(t).height, t.arity
        h_ed = tree_metrics(eps_delta_tree(t, SEPARATED.levels[0])).height
        h_tl = tree_metrics(t_ell_tree(t, SEPARATED)).height
        ell = len(SEPARATED.levels) - 1
        if h_ed > eps_delta_height_bound(k, n) or h_tl > t_ell_height_bound(k, n, ell):
            bad.append(i)
        worst_ed = max(worst_ed, h_ed / (k + n))
        worst_tl = max(worst_tl, h_tl / ((ell + 1) * k + n))
        if n >= 2:
            tm = t_ell_tree(t, SEPARATED)
            H = tree_metrics(tm).height
            for p in (1, 2):
                if tree_metrics(fiber_product_tree(tm, FiberSpec(n, 1, p))).height != (p + 1) * H:
                    bad.append((i, p))
                fiber_checked += 1
    ce = circle_fiber_example()
    tm = t_ell_tree(ce.bundle.tree, STANDARD_SCHEDULE)
    H = tree_metrics(tm).height
    for spec in ce.fibers:
        if tree_metrics(fiber_product_tree(tm, spec)).height != (spec.p + 1) * H:
            bad.append(("circle", spec.p))
        fiber_checked += 1
    report(2, not bad,
           f"violations {bad}; measured h/(k+n) <= {worst_ed:.2f} for T_eps_delta, "
           f"h/((l+1)k+n) <= {worst_tl:.2f} for T_l; {fiber_checked} fiber heights equal (p+1)H")


def test_c03_annulus():
    start = time.perf_counter()
    x, y = variables(2)
    f = closed(2, (x * x + y * y - 1, Sign.GT), (x * x + y * y - 4, Sign.LT))
    tm = t_m_formula(f, STANDARD_SCHEDULE)
    b64 = betti(tm, Box.cube(-3, 3, 2, 64), 1)
    b128 = betti(tm, Box.cube(-3, 3, 2, 128), 1)
    dt = time.perf_counter() - start
    report(3, b64 == (1, 1) and b128 == (1, 1) and dt < LIMIT_1MIN,
           f"N=64 -> {b64}, N=128 -> {b128} ({dt:.1f}s)")


@pytest.mark.parametrize("m,b1", [(3, 4), (4, 12)])
def test_c04_parity(m, b1):
    start = time.perf_counter()
    p = parity_problem(2, m)
    b = betti(t_m_formula(p.strict_dnf, p.suggested_schedule, p.mode), p.suggested_box, 1)
    dt = time.perf_counter() - start
    step = (p.suggested_box.hi[0] - p.suggested_box.lo[0]) / p.suggested_box.resolution
    report(4, b == (1, b1) and step <= F(1, 200) and dt < LIMIT_5MIN,
           f"parity n=2 m={m}: Betti {b}, expected (1, {b1}), step {step} ({dt:.1f}s)")


def test_c05_distinctness():
    start = time.perf_counter()
    d = distinctness_tree(3)
    assert len(d.suggested_schedule.levels) == 1  # T_1 closure
    g = occupancy_grid(t_m_formula(d.strict_dnf, d.suggested_schedule, d.mode), d.suggested_box)
    comps = component_count(g)
    height = tree_metrics(d.tree).height
    k = invert_height_bound(6, 3, 1)
    dt = time.perf_counter() - start
    report(5, comps == factorial(3) and k <= height and dt < LIMIT_1MIN,
           f"{comps} components; inverted height {k} <= measured {height} ({dt:.1f}s)")


def test_c06_projection_inequality():
    start = time.perf_counter()
    ce = circle_fiber_example()
    sched = ce.bundle.suggested_schedule
    tm = t_m_formula(ce.bundle.strict_dnf, sched)
    w0 = betti(tm, ce.box_w0, 1)
    w1 = betti(fiber_product_formula(tm, 1, 1), ce.box_w1, 1)
    img = betti(t_m_formula(ce.projection_dnf, sched), ce.box_image, 1)
    table = {0: w0, 1: w1}
    c1 = projection_inequality_check(table, img[1], 1)
    c0 = projection_inequality_check(table, img[0], 0)
    dt = time.perf_counter() - start
    ok = w0 == (1, 1) and w1 == (1, 3) and c1.holds and c0.holds and dt < LIMIT_2MIN
    report(6, ok, f"W0 {w0}, W1 {w1}, image {img}; m=1 {c1.lhs}<={c1.rhs} slack {c1.slack}; "
                  f"m=0 {c0.lhs}<={c0.rhs} slack {c0.slack} ({dt:.1f}s)")


def test_c07_projection_commutes():
    ce = circle_fiber_example()
    sched = ce.bundle.suggested_schedule
    tm_tree = t_ell_tree(ce.bundle.tree, sched)
    hand = circle_projection_tm_formula(sched)
    q = F(5, 4)
    ys = [-q + 2 * q * j / 999 for j in range(1000)]
    xs = [F(k, 80) for k in range(-100, 101)]
    bad = [x for x in xs
           if any(evaluate(tm_tree, (x, y)).accepted for y in ys) != eval_formula(hand, (x,))]
    report(7, not bad, f"{len(bad)} disagreements over {len(xs)} base points x {len(ys)} fiber points")


def test_c08_counting_laws():
    bad = []
    for i, t in enumerate(corpus()):
        k = tree_metrics(t).height
        st = dnf_stats(leaf_dnf(t))
        if st.d > 2**k or st.disjunct_count > 3**k or st.s > k * 3**k:
            bad.append(i)
    report(8, not bad, f"{len(bad)} violations of degree <= 2^k, disjuncts <= 3^k, polys <= k 3^k")


def test_c09_topology_fixtures():
    X, Y, Z = variables(3)
    box = Box.cube(-2, 2, 3, 24)
    complexes = []

    def run(f, b, mmax):
        cx = build_complex(occupancy_grid(f, b))
        complexes.append(cx)
        return betti_numbers(cx, mmax).b

    got = {
        "ball": run(closed(3, (X * X + Y * Y + Z * Z - 1, Sign.LE)), box, 2),
        "two balls": run(Dnf(3, (
            BasicSet(3, (SignCondition((X - 1) ** 2 + Y * Y + Z * Z - F(1, 2), Sign.LE),)),
            BasicSet(3, (SignCondition((X + 1) ** 2 + Y * Y + Z * Z - F(1, 2), Sign.LE),)),
        )), box, 2),
        "tube": run(closed(3, ((X * X + Y * Y - 1) ** 2 + Z * Z - F(1, 25), Sign.LE)), box, 2),
    }
    x, y = variables(2)
    got["ring"] = run(closed(2, (x * x + y * y - 4, Sign.LE), (1 - x * x - y * y, Sign.LE)),
                      Box.cube(-3, 3, 2, 40), 1)
    want = {"ball": (1, 0, 0), "two balls": (2, 0, 0), "tube": (1, 1, 0), "ring": (1, 1)}
    rng = np.random.default_rng(11)
    uf_bad = 0
    for i in range(50):
        shape = (12, 12) if i % 2 else (6, 6, 6)
        g = OccupancyGrid(Box.cube(0, 1, len(shape), shape[0]), rng.random(shape) < 0.4)
        cx = build_complex(g)
        complexes.append(cx)
        uf_bad += betti_numbers(cx, 0)[0] != component_count(g)
    dd_ok = all(cx.check_boundary() for cx in complexes)
    report(9, got == want and dd_ok and uf_bad == 0,
           f"fixtures {got}; boundary^2 = 0 on {len(complexes)} complexes: {dd_ok}; "
           f"{uf_bad} b0/union-find disagreements on 50 grids")


def test_c10_crossings():
    trefoil = crossing_number_example().report()
    seg = segment_example().report()
    ok = trefoil["complement_components"] == 4 and trefoil["crossings"] == 3 and seg["crossings"] == 0
    report(10, ok, f"trefoil projection: {trefoil['complement_components']} complement components, "
                   f"C={trefoil['crossings']} at N={trefoil['resolution']}; segment C={seg['crossings']}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "--no-header", "-p", "no:cacheprovider"]))
