"""Tree-to-tree constructions: union/intersection, the eps-delta compactification,
the multi-level tree for T_l, and fibered-product trees.

All constructions share subtrees physically instead of copying them, so the
stored size stays linear in the input while heights obey the stated bounds.

Joining a tree onto the leaves of another keeps the leaf as a pass-through
computation vertex (``Y = 0 + 0``) whose successor is the attached root, so
heights add exactly: a path through both parts has the vertices of both.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .act import Branch, Computation, Const, Input, Leaf, Operand, Tree, TreeBuilder, Var
from .errors import InputError
from .extract import vertex_polynomial
from .families import EpsDelta, Schedule, _require_schedule
from .poly import Polynomial, variables

__all__ = [
    "EpsDelta", "Schedule", "FiberSpec",
    "union_tree", "intersect_tree", "eps_delta_tree", "t_ell_tree", "fiber_product_tree",
    "eps_delta_height_bound", "t_ell_height_bound",
]

_ZERO = Const(Fraction(0))


class _Copier:
    """Copies a tree into a builder under a fresh id prefix, remapping leaves and inputs."""

    def __init__(self, src: Tree, b: TreeBuilder, tag: str, leaf_target=None, input_map=None):
        self.src, self.b, self.tag = src, b, tag
        self.leaf_target = leaf_target  # callable(accept) -> vertex id, or None to copy leaves
        self.input_map = input_map
        self.ids = {vid: f"{tag}{vid}" for vid in src.vertices}

    def operand(self, op: Operand) -> Operand:
        if isinstance(op, Var):
            return Var(self.ids[op.ref])
        if isinstance(op, Input) and self.input_map is not None:
            return Input(self.input_map[op.index - 1])
        return op

    def run(self, leaves_mapped: bool = False) -> str:
        for vid in self.src.order:
            v = self.src.vertices[vid]
            if isinstance(v, Leaf) and not leaves_mapped:
                if self.leaf_target is None:
                    self.b.put(v, self.ids[vid])
                else:
                    self.ids[vid] = self.leaf_target(v.accept)
        for vid in self.src.order:
            v = self.src.vertices[vid]
            if isinstance(v, Computation):
                self.b.comp(v.op, self.operand(v.left), self.operand(v.right), self.ids[v.next], self.ids[vid])
            elif isinstance(v, Branch):
                self.b.branch(self.operand(v.test), self.ids[v.gt], self.ids[v.eq], self.ids[v.lt], self.ids[vid])
        return self.ids[self.src.root]


def _connector(b: TreeBuilder, target: str) -> str:
    return b.comp("add", _ZERO, _ZERO, target)


def _combine(t1: Tree, t2: Tree, join_on: bool) -> Tree:
    if t1.arity != t2.arity:
        raise InputError(f"arity mismatch: {t1.arity} vs {t2.arity}")
    t1.require_valid()
    t2.require_valid()
    b = TreeBuilder(t1.arity, "j")
    root2 = _Copier(t2, b, "b.").run()
    memo: dict[bool, str] = {}

    def target(accept: bool) -> str:
        if accept not in memo:
            memo[accept] = _connector(b, root2) if accept == join_on else b.leaf(accept)
        return memo[accept]

    root1 = _Copier(t1, b, "a.", target).run()
    return b.build(root1)


def union_tree(t1: Tree, t2: Tree) -> Tree:
    """Accepts x iff t1 or t2 does: t2 continues every No leaf of t1."""
    return _combine(t1, t2, join_on=False)


def intersect_tree(t1: Tree, t2: Tree) -> Tree:
    """Accepts x iff t1 and t2 do: t2 continues every Yes leaf of t1."""
    return _combine(t1, t2, join_on=True)


def _sum_of_squares_prefix(b: TreeBuilder, n: int, nxt_id: str) -> tuple[str, str]:
    """Chain of 2n-1 computation vertices ending in h = X_1^2 + ... + X_n^2.

    Returns (first vertex id, id of the vertex holding h); the last vertex's
    successor is ``nxt_id``.
    """
    ids = [b.new_id() for _ in range(2 * n - 1)]
    succ = ids[1:] + [nxt_id]
    b.comp("mul", Input(1), Input(1), succ[0], ids[0])
    acc = ids[0]
    for i in range(2, n + 1):
        sq, add = ids[2 * i - 3], ids[2 * i - 2]
        b.comp("mul", Input(i), Input(i), succ[2 * i - 3], sq)
        b.comp("add", Var(acc), Var(sq), succ[2 * i - 2], add)
        acc = add
    return ids[0], ids[-1]


def _relaxed_body(t: Tree, ed: EpsDelta, b: TreeBuilder, tag: str, h: Operand,
                  no_target: str, insert_after: str | None = None) -> str:
    """Ball test on ``h`` followed by the gadget-transformed copy of ``t``.

    Every rejection (ball exceeded, no relaxed sign region matched, No leaf of
    ``t``) continues at ``no_target``.  With ``insert_after`` the ball test is
    placed right after that computation vertex of ``t`` instead of at the top.
    Returns the entry vertex id.
    """
    ids = {vid: f"{tag}{vid}" for vid in t.vertices}
    for vid in t.order:
        v = t.vertices[vid]
        if isinstance(v, Leaf):
            ids[vid] = b.leaf(True) if v.accept else no_target

    def op(o: Operand) -> Operand:
        return Var(ids[o.ref]) if isinstance(o, Var) else o

    def ball(entry: str) -> str:
        c = b.new_id()
        br = b.branch(Var(c), no_target, entry, entry)
        return b.comp("sub", h, Const(1 / ed.delta), br, c)

    for vid in reversed(t.order):
        v = t.vertices[vid]
        if isinstance(v, Computation):
            nxt = ids[v.next]
            if vid == insert_after:
                nxt = ball(nxt)
            b.comp(v.op, op(v.left), op(v.right), nxt, ids[vid])
        elif isinstance(v, Branch):
            f = op(v.test)
            gt, eq, lt = ids[v.gt], ids[v.eq], ids[v.lt]
            # f^2 - eps <= 0  -> eq-subtree, else reject
            sq = b.new_id()
            d3 = b.new_id()
            br3 = b.branch(Var(d3), no_target, eq, eq)
            b.comp("sub", Var(sq), Const(ed.eps), br3, d3)
            b.comp("mul", f, f, d3, sq)
            # -f - delta >= 0  -> lt-subtree
            d2 = b.new_id()
            br2 = b.branch(Var(d2), lt, lt, sq)
            b.comp("sub", Const(-ed.delta), f, br2, d2)
            # f - delta >= 0  -> gt-subtree
            br1 = b.new_id()
            b.comp("sub", f, Const(ed.delta), br1, ids[vid])
            b.branch(Var(ids[vid]), gt, gt, d2, br1)
    entry = ids[t.root]
    return entry if insert_after is not None else ball(entry)


def eps_delta_height_bound(k: int, n: int) -> int:
    return 7 * k + 2 * n + 2


def t_ell_height_bound(k: int, n: int, ell: int) -> int:
    return 7 * (ell + 1) * k + 2 * n + 2 * (ell + 1) + 2


def _check_division_free(t: Tree) -> None:
    t.require_valid()


def eps_delta_tree(t: Tree, ed: EpsDelta, h_source: str | None = None) -> Tree:
    """Tree deciding S_{delta,eps} of the set decided by ``t`` (with the ball |x|^2 <= 1/delta).

    Each branch on f is replaced by three tests: f - delta (>= 0: the f>0
    subtree), -f - delta (>= 0: the f<0 subtree), f^2 - eps (<= 0: the f=0
    subtree, otherwise reject).  The tree decides the relaxed formula exactly
    when ``eps < delta**2``; otherwise the relaxed regions of one polynomial
    overlap on |f| >= delta, f^2 <= eps and the tree follows the f>0/f<0 side there.

    ``h_source`` names a computation vertex of ``t`` on its leading computation
    chain that already holds X_1^2 + ... + X_n^2; the ball test then reuses it
    instead of computing a fresh prefix.
    """
    _check_division_free(t)
    b = TreeBuilder(t.arity, "e")
    no = b.leaf(False)
    if h_source is None:
        first, hid = _sum_of_squares_prefix(b, t.arity, "")
        body = _relaxed_body(t, ed, b, "t.", Var(hid), no)
        last = b.vertices[hid]
        b.vertices[hid] = Computation(last.op, last.left, last.right, body)
        return b.build(first)
    _check_h_source(t, h_source)
    entry = _relaxed_body(t, ed, b, "t.", Var(f"t.{h_source}"), no, insert_after=h_source)
    return b.build(entry)


def _check_h_source(t: Tree, h_source: str) -> None:
    vid = t.root
    while vid != h_source:
        v = t.vertices.get(vid)
        if not isinstance(v, Computation):
            raise InputError(f"h_source {h_source!r} is not on the leading computation chain")
        vid = v.next
    h = sum((x * x for x in variables(t.arity)), Polynomial.zero(t.arity))
    if vertex_polynomial(t, h_source) != h:
        raise InputError(f"vertex {h_source!r} does not compute the sum of squares")


def t_ell_tree(t: Tree, sched: Schedule) -> Tree:
    """Tree deciding T_l = union of S_{delta_i, eps_i} over the schedule levels.

    h is computed once; level i+1 continues every rejection of level i.
    """
    _check_division_free(t)
    _require_schedule(sched)
    b = TreeBuilder(t.arity, "e")
    first, hid = _sum_of_squares_prefix(b, t.arity, "")
    target = b.leaf(False)
    for i in reversed(range(len(sched))):
        target = _relaxed_body(t, sched.levels[i], b, f"L{i}.", Var(hid), target)
    last = b.vertices[hid]
    b.vertices[hid] = Computation(last.op, last.left, last.right, target)
    return b.build(first)


@dataclass(frozen=True)
class FiberSpec:
    n: int
    r: int
    p: int

    def __post_init__(self):
        if not 0 < self.r < self.n or self.p < 0:
            raise InputError(f"need 0 < r < n and p >= 0, got {self}")

    @property
    def arity(self) -> int:
        return (self.n - self.r) + (self.p + 1) * self.r


def _depths(t: Tree) -> dict[str, int]:
    """Longest root path (in vertices) ending at each reachable vertex."""
    depth = {t.root: 1}
    for vid in t.order:
        v = t.vertices[vid]
        kids = (v.next,) if isinstance(v, Computation) else v.children() if isinstance(v, Branch) else ()
        for c in kids:
            depth[c] = max(depth.get(c, 0), depth[vid] + 1)
    return depth


def fiber_product_tree(tm: Tree, spec: FiberSpec) -> Tree:
    """Tree for the (p+1)-fold fibered product of the set of ``tm`` over the projection
    dropping its last r coordinates.

    Factor j reads the base coordinates and fiber block j; factor j+1 continues
    every Yes leaf of factor j.  A Yes leaf at depth d is followed by H - d
    pass-through vertices (H = height of ``tm``), so each factor contributes
    exactly H to the height whenever ``tm`` has a Yes leaf.
    """
    if tm.arity != spec.n:
        raise InputError(f"tree arity {tm.arity} does not match fiber spec n={spec.n}")
    tm.require_valid()
    n, r = spec.n, spec.r
    depth = _depths(tm)
    height = max(depth.values())
    b = TreeBuilder(spec.arity, "f")
    no = b.leaf(False)
    target = b.leaf(True)
    for j in reversed(range(spec.p + 1)):
        imap = list(range(1, n - r + 1)) + [n - r + j * r + i for i in range(1, r + 1)]
        nxt = target
        pads: dict[str, str] = {}

        def exit_for(leaf_id: str, last=(j == spec.p), nxt=nxt, pads=pads) -> str:
            if last:
                return nxt
            if leaf_id not in pads:
                v = nxt
                for _ in range(height - depth[leaf_id] + 1):
                    v = _connector(b, v)
                pads[leaf_id] = v
            return pads[leaf_id]

        copier = _Copier(tm, b, f"F{j}.", None, imap)
        for vid in tm.order:
            v = tm.vertices[vid]
            if isinstance(v, Leaf):
                copier.ids[vid] = exit_for(vid) if v.accept else no
        target = copier.run(leaves_mapped=True)
    return b.build(target)
