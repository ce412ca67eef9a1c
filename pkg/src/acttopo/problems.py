"""Concrete instances: parity, distinctness, a circle over an interval, a knotted
polynomial arc, plus a random division-free tree generator for property tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import ceil, factorial, floor, log2
from typing import Sequence

import numpy as np

from .act import Const, Input, Leaf, Tree, TreeBuilder, Var, evaluate, tree_metrics
from .errors import InputError
from .families import AmbientMode, Bounded, Schedule, Unbounded, _ball
from .poly import Polynomial, variables
from .semialg import BasicSet, Dnf, Sign, SignCondition, eval_formula
from .topology import Box, OccupancyGrid, betti_numbers, build_complex, complement_component_count
from .transforms import FiberSpec

STANDARD_SCHEDULE = Schedule.of((Fraction(1, 10**4), Fraction(1, 100)), (Fraction(1, 25), Fraction(1, 5)))


@dataclass(frozen=True, eq=False)
class ProblemBundle:
    name: str
    tree: Tree
    strict_dnf: Dnf
    suggested_schedule: Schedule
    suggested_box: Box
    mode: AmbientMode
    declared_height: int
    notes: str = ""
    expected: dict = field(default_factory=dict)


def _cond(p: Polynomial, s: Sign) -> SignCondition:
    return SignCondition(p, s)


# -- parity ---------------------------------------------------------------------

def _parity_dnf(n: int, m: int) -> Dnf:
    xs = variables(n)
    out = []
    # open 2-faces: two coordinates in (j, j+1), the others pinned to lattice values
    for a, b in combinations(range(n), 2):
        others = [i for i in range(n) if i not in (a, b)]
        for ja, jb in product(range(1, m), repeat=2):
            for pins in product(range(1, m + 1), repeat=len(others)):
                conds = []
                for i, j in ((a, ja), (b, jb)):
                    conds += [_cond(xs[i] - j, Sign.GT), _cond(xs[i] - (j + 1), Sign.LT)]
                conds += [_cond(xs[i] - c, Sign.EQ) for i, c in zip(others, pins)]
                out.append(BasicSet(n, tuple(conds)))
    for pins in product(range(1, m + 1), repeat=n):
        out.append(BasicSet(n, tuple(_cond(xs[i] - c, Sign.EQ) for i, c in enumerate(pins))))
    return Dnf(n, tuple(out))


def _parity_tree(n: int, m: int) -> Tree:
    """Coordinate by coordinate binary search among 1..m; the number of
    non-integer coordinates seen so far (0, 1 or 2) selects the shared continuation."""
    b = TreeBuilder(n, "p")
    yes, no = b.leaf(True), b.leaf(False)
    after: dict[tuple[int, int], str] = {}

    def cont(i: int, state: int) -> str:
        """Entry for coordinate i (0-based) with ``state`` non-integers so far."""
        if state > 2:
            return no
        if i == n:
            return yes if state in (0, 2) else no
        key = (i, state)
        if key not in after:
            after[key] = search(i, 1, m, state)
        return after[key]

    def search(i: int, lo: int, hi: int, state: int) -> str:
        if lo > hi:
            # hi < x < lo strictly
            return cont(i + 1, state + 1) if 1 <= hi and lo <= m else no
        mid = (lo + hi) // 2
        c = b.new_id()
        br = b.branch(Var(c), search(i, mid + 1, hi, state), cont(i + 1, state), search(i, lo, mid - 1, state))
        return b.comp("sub", Input(i + 1), Const(mid), br, c)

    return b.build(cont(0, 0))


def parity_height(n: int, m: int) -> int:
    return 2 * n * ceil(log2(m + 1)) + 1


PARITY_HEIGHT_CONSTANT = 4  # parity_height(n, m) <= 4 n log2(m) for n >= 2, m >= 3


def parity_problem(n: int, m: int) -> ProblemBundle:
    """Points of {1..m}^n-lattice cube complex: open 2-faces and vertices."""
    if n < 2 or m < 3:
        raise InputError("parity needs n >= 2 and m >= 3")
    half = Fraction(1, 2)
    box = Box.cube(half, m + half, n, 200 * m)
    return ProblemBundle(
        name="parity",
        tree=_parity_tree(n, m),
        strict_dnf=_parity_dnf(n, m),
        suggested_schedule=STANDARD_SCHEDULE,
        suggested_box=box,
        mode=Bounded(Fraction(n * m * m)),
        declared_height=parity_height(n, m),
        notes="all coordinates integer or exactly two non-integer, inside [1, m]^n",
        expected={"b1": 2 * (m - 1) * (m - 2)} if n == 2 else {},
    )


# -- distinctness -----------------------------------------------------------------

def distinctness_tree(n: int) -> ProblemBundle:
    """x_i pairwise distinct, decided by the sign of the product of all differences."""
    if n < 2:
        raise InputError("distinctness needs n >= 2")
    xs = variables(n)
    pairs = list(combinations(range(1, n + 1), 2))
    b = TreeBuilder(n, "d")
    yes, no = b.leaf(True), b.leaf(False)
    ids = [b.new_id() for _ in range(2 * len(pairs) - 1)]
    br = b.new_id()
    succ = ids[1:] + [br]
    diffs = ids[: len(pairs)]
    for vid, (i, j), nxt in zip(diffs, pairs, succ):
        b.comp("sub", Input(i), Input(j), nxt, vid)
    acc = diffs[0]
    for k, vid in enumerate(ids[len(pairs):]):
        b.comp("mul", Var(acc), Var(diffs[k + 1]), succ[len(pairs) + k], vid)
        acc = vid
    b.branch(Var(acc), yes, no, yes, br)
    prod_ = Polynomial.constant(n, 1)
    for i, j in pairs:
        prod_ = prod_ * (xs[i - 1] - xs[j - 1])
    dnf = Dnf(n, (BasicSet(n, (_cond(prod_, Sign.GT),)), BasicSet(n, (_cond(prod_, Sign.LT),))))
    return ProblemBundle(
        name="distinctness",
        tree=b.build(ids[0]),
        strict_dnf=dnf,
        suggested_schedule=Schedule.of((Fraction(1, 25), Fraction(1, 5))),
        suggested_box=Box.cube(-1, 1, n, 50),
        mode=Unbounded(),
        declared_height=2 * len(pairs) + 1,
        notes="one region per ordering of the coordinates",
        expected={"components": factorial(n)},
    )


# -- circle over an interval --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CircleFiberExample:
    bundle: ProblemBundle
    fibers: tuple[FiberSpec, ...]
    projection_dnf: Dnf
    box_w0: Box
    box_w1: Box
    box_image: Box


def circle_tree() -> Tree:
    b = TreeBuilder(2, "c")
    yes, no = b.leaf(True), b.leaf(False)
    b.branch(Var("s"), no, yes, no, "br")
    b.comp("sub", Var("h"), Const(1), "br", "s")
    b.comp("add", Var("xx"), Var("yy"), "s", "h")
    b.comp("mul", Input(2), Input(2), "h", "yy")
    b.comp("mul", Input(1), Input(1), "yy", "xx")
    return b.build("xx")


def circle_fiber_example() -> CircleFiberExample:
    x, y = variables(2)
    (u,) = variables(1)
    sigma = Dnf(2, (BasicSet(2, (_cond(x * x + y * y - 1, Sign.EQ),)),))
    image = Dnf(1, (
        BasicSet(1, (_cond(u + 1, Sign.EQ),)),
        BasicSet(1, (_cond(u + 1, Sign.GT), _cond(u - 1, Sign.LT))),
        BasicSet(1, (_cond(u - 1, Sign.EQ),)),
    ))
    q = Fraction(5, 4)
    bundle = ProblemBundle(
        name="circle-fiber",
        tree=circle_tree(),
        strict_dnf=sigma,
        suggested_schedule=STANDARD_SCHEDULE,
        suggested_box=Box.cube(-q, q, 2, 50),
        mode=Unbounded(),
        declared_height=6,
        notes="unit circle projected to the first coordinate",
        expected={"W0": (1, 1), "W1": (1, 3), "image": (1, 0)},
    )
    return CircleFiberExample(
        bundle=bundle,
        fibers=(FiberSpec(2, 1, 0), FiberSpec(2, 1, 1)),
        projection_dnf=image,
        box_w0=Box.cube(-q, q, 2, 50),
        box_w1=Box.cube(-q, q, 3, 50),
        box_image=Box.cube(-q, q, 1, 50),
    )


def circle_projection_tm_formula(sched: Schedule) -> Dnf:
    """Hand-written T_m of the projected circle: per level,
    {1 - x^2 >= 0, x^2 <= 1/delta} and {(x^2 - 1)^2 <= eps, x^2 <= 1/delta}."""
    (u,) = variables(1)
    out = []
    for lv in sched.levels:
        ball = _ball(1, lv.delta)
        out.append(BasicSet(1, (_cond(1 - u * u, Sign.GE), ball)))
        out.append(BasicSet(1, (_cond((u * u - 1) ** 2 - lv.eps, Sign.LE), ball)))
    return Dnf(1, tuple(out))


# -- knotted arc ---------------------------------------------------------------------

@dataclass(frozen=True)
class CurveExample:
    """Polynomial curve t -> (x(t), y(t), z(t)) for t in [t_lo, t_hi]; the plane
    projection keeps (x, y)."""
    name: str
    coeffs: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]  # ascending powers of t
    t_lo: Fraction
    t_hi: Fraction
    box: Box
    closed: bool = False

    def point(self, t: Fraction) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(sum((c * t**k for k, c in enumerate(cs)), Fraction(0)) for cs in self.coeffs)

    def _speed_bound(self, axis: int) -> Fraction:
        bound = max(abs(self.t_lo), abs(self.t_hi))
        return sum((abs(k * c) * bound ** (k - 1) for k, c in enumerate(self.coeffs[axis]) if k), Fraction(0))

    def image_grid(self) -> OccupancyGrid:
        """Cells visited by the projected curve, sampled with a parameter step that
        moves less than half a cell per step on both axes."""
        box = self.box
        steps = [(box.hi[a] - box.lo[a]) / box.resolution for a in range(2)]
        speed = max(max(self._speed_bound(a), Fraction(1)) / steps[a] for a in range(2))
        count = ceil((self.t_hi - self.t_lo) * speed * 2) + 1
        # t_i = T_i / D exactly; a degree-d coordinate is H(T_i, D) / D^d with H the
        # homogenized polynomial, evaluated by Horner in integers
        D = count * self.t_lo.denominator * self.t_hi.denominator
        T0, dT = int(self.t_lo * D), int((self.t_hi - self.t_lo) * D) // count
        scale = []
        for a in range(2):
            d = len(self.coeffs[a]) - 1
            # cell index = floor((H / D^d - lo) / step) = (H - lo D^d) * res // (width D^d)
            width = (box.hi[a] - box.lo[a]) * D**d
            off = box.lo[a] * D**d
            scale.append((d, off, box.resolution / width))
        occ = np.zeros((box.resolution, box.resolution), dtype=bool)
        for i in range(count + 1):
            T = T0 + dT * i
            idx = []
            for a, (d, off, k) in enumerate(scale):
                cs = self.coeffs[a]
                h, dp = cs[d], 1
                for c in reversed(cs[:d]):
                    dp *= D
                    h = h * T + c * dp
                q = (h - off) * k
                idx.append(q.numerator // q.denominator)
            if not all(0 <= v < box.resolution for v in idx):
                raise InputError(f"curve leaves the box at t={Fraction(T, D)}")
            occ[idx[0], idx[1]] = True
        return OccupancyGrid(Box(box.lo, box.hi, box.resolution), occ)

    def report(self) -> dict:
        g = self.image_grid()
        comps = complement_component_count(g)
        b = betti_numbers(build_complex(g), 1)
        drop = 2 if self.closed else 1
        return {
            "complement_components": comps,
            "bounded_complement_components": comps - 1,
            "image_betti": list(b),
            "crossings": comps - drop,
            "resolution": self.box.resolution,
        }


def crossing_number_example() -> CurveExample:
    """Polynomial long trefoil: x = t^3 - 3t, y = t^4 - 4t^2, z = t^5 - 10t on [-2, 2].

    The (x, y) projection has three double points: t = +-sqrt(3) meet at (0, -3),
    and the two pairs with s^2 + t^2 = 4, st = -1 meet at y = -1.
    """
    return CurveExample(
        name="trefoil-arc",
        coeffs=((0, -3, 0, 1), (0, 0, -4, 0, 1), (0, -10, 0, 0, 0, 1)),
        t_lo=Fraction(-2), t_hi=Fraction(2),
        box=Box((Fraction(-3), Fraction(-5)), (Fraction(3), Fraction(1)), 600),
    )


def segment_example() -> CurveExample:
    return CurveExample(
        name="segment",
        coeffs=((0, 1), (0, 1), (0,)),
        t_lo=Fraction(-1), t_hi=Fraction(1),
        box=Box((Fraction(-2), Fraction(-2)), (Fraction(2), Fraction(2)), 100),
    )


# -- random trees and self-checks --------------------------------------------------------

def _rand_const(rng: random.Random) -> Const:
    return Const(Fraction(rng.randint(-4, 4), rng.choice((1, 1, 2, 3))))


def random_tree(rng: random.Random, n: int | None = None, max_height: int = 6,
                mul_weight: float = 0.35) -> Tree:
    """Random valid division-free tree with at most ``max_height`` vertices per path
    and at least one Yes leaf.  Leaves are shared between parents."""
    if n is None:
        n = rng.randint(1, 3)
    if max_height < 2:
        raise InputError("max_height must be at least 2")
    b = TreeBuilder(n, "r")
    shared = {True: b.leaf(True), False: b.leaf(False)}
    leaves: list[str] = []

    def operand(avail: list[str]):
        r = rng.random()
        if avail and r < 0.5:
            return Var(rng.choice(avail))
        if r < 0.85:
            return Input(rng.randint(1, n))
        return _rand_const(rng)

    def gen(budget: int, avail: list[str], depth: int) -> str:
        if budget == 1 or (depth > 2 and rng.random() < 0.15):
            acc = rng.random() < 0.5
            if rng.random() < 0.5:
                vid = shared[acc]
            else:
                vid = b.leaf(acc)
            leaves.append(vid)
            return vid
        vid = b.new_id()
        if rng.random() < 0.55 or not avail:
            op = "mul" if rng.random() < mul_weight else rng.choice(("add", "sub"))
            left, right = operand(avail), operand(avail)
            nxt = gen(budget - 1, avail + [vid], depth + 1)
            b.comp(op, left, right, nxt, vid)
        else:
            test = Var(rng.choice(avail)) if rng.random() < 0.9 else Input(rng.randint(1, n))
            kids = [gen(budget - 1, avail, depth + 1) for _ in range(3)]
            b.branch(test, *kids, vid)
        return vid

    root = gen(max_height, [], 1)
    t = b.build(root)
    if tree_metrics(t).yes_leaf_count == 0:
        # turn one reachable No leaf into a fresh Yes leaf
        target = next(v for v in t.order if isinstance(t.vertices[v], Leaf))
        verts = dict(t.vertices)
        verts[target] = Leaf(True)
        t = Tree(n, t.root, verts)
    return t


def sample_points(rng: random.Random, n: int, count: int, lo: Fraction = Fraction(-3),
                  hi: Fraction = Fraction(3), specials: Sequence[Fraction] = ()) -> list[list[Fraction]]:
    """Exact rational points: mostly small-denominator values (which hit zero sets),
    some given special values, some fine random rationals."""
    lo, hi = Fraction(lo), Fraction(hi)
    span = hi - lo
    pool = list(specials) or [Fraction(k) for k in range(floor(lo), ceil(hi) + 1)]
    out = []
    for _ in range(count):
        pt = []
        for _ in range(n):
            r = rng.random()
            if r < 0.3:
                pt.append(rng.choice(pool))
            elif r < 0.7:
                d = rng.choice((1, 2, 3, 4, 5, 10))
                pt.append(lo + Fraction(rng.randint(0, int(span * d)), d))
            else:
                pt.append(lo + span * Fraction(rng.randint(0, 10**6), 10**6))
        out.append(pt)
    return out


@dataclass(frozen=True)
class BundleCheck:
    valid: bool
    height: int
    declared_height: int
    samples: int
    mismatches: int

    @property
    def ok(self) -> bool:
        return self.valid and self.height <= self.declared_height and self.mismatches == 0


def check_bundle(bundle: ProblemBundle, rng: random.Random, samples: int = 1000) -> BundleCheck:
    """Validator, declared height and tree/formula agreement on sampled exact points."""
    t = bundle.tree
    valid = not t.diagnostics
    height = tree_metrics(t).height if valid else -1
    box = bundle.suggested_box
    lo, hi = min(box.lo) - 1, max(box.hi) + 1
    specials = sorted({Fraction(k, 2) for k in range(2 * floor(lo), 2 * ceil(hi) + 1)})
    bad = 0
    if valid:
        for pt in sample_points(rng, t.arity, samples, lo, hi, specials):
            if evaluate(t, pt).accepted != eval_formula(bundle.strict_dnf, pt):
                bad += 1
    return BundleCheck(valid, height, bundle.declared_height, samples, bad)
