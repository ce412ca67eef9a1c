"""Algebraic computation trees: representation, validation, evaluation, metrics.

A tree is stored as a table ``id -> vertex``.  Identical subtrees may be
stored once and referenced by several parents; every semantic notion (height,
leaf sets, evaluation) refers to the unfolded tree.  Heights count vertices
on the longest root-to-leaf path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import count
from typing import Sequence, Union

from .errors import InputError
from .poly import format_rational, parse_rational

OPS = ("add", "sub", "mul")


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Input:
    index: int  # 1-based


@dataclass(frozen=True)
class Var:
    ref: str


Operand = Union[Const, Input, Var]


@dataclass(frozen=True)
class Computation:
    op: str
    left: Operand
    right: Operand
    next: str | None


@dataclass(frozen=True)
class Branch:
    test: Operand
    gt: str | None
    eq: str | None
    lt: str | None

    def children(self) -> tuple:
        return (self.gt, self.eq, self.lt)


@dataclass(frozen=True)
class Leaf:
    accept: bool


Vertex = Union[Computation, Branch, Leaf]


def _children(v: Vertex) -> tuple:
    if isinstance(v, Computation):
        return (v.next,)
    if isinstance(v, Branch):
        return (v.gt, v.eq, v.lt)
    return ()


@dataclass(frozen=True, eq=False)
class Tree:
    arity: int
    root: str
    vertices: dict[str, Vertex] = field(repr=False)

    def __getitem__(self, vid: str) -> Vertex:
        return self.vertices[vid]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.root == other.root
            and list(self.vertices.items()) == list(other.vertices.items())
        )

    @cached_property
    def diagnostics(self) -> tuple[str, ...]:
        return tuple(validate_tree(self))

    def require_valid(self) -> None:
        if self.diagnostics:
            raise InputError("invalid tree: " + "; ".join(self.diagnostics))

    @cached_property
    def order(self) -> tuple[str, ...]:
        """Reachable vertex ids in topological order (parents first)."""
        self.require_valid()
        return tuple(_topological(self))


def _topological(t: Tree) -> list[str]:
    seen: set[str] = set()
    post: list[str] = []
    stack = [(t.root, iter(_children(t.vertices[t.root])))]
    seen.add(t.root)
    while stack:
        vid, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            post.append(vid)
        elif nxt not in seen:
            seen.add(nxt)
            stack.append((nxt, iter(_children(t.vertices[nxt]))))
    post.reverse()
    return post


def _operands(v: Vertex) -> tuple:
    if isinstance(v, Computation):
        return (v.left, v.right)
    if isinstance(v, Branch):
        return (v.test,)
    return ()


def validate_tree(t: Tree) -> list[str]:
    """Every structural violation of the tree model, as human-readable strings."""
    diags: list[str] = []
    if t.arity < 1:
        diags.append(f"tree must have at least one input, got {t.arity}")
    if t.root not in t.vertices:
        return diags + [f"root {t.root!r} is not a vertex"]

    # reachability, dangling ids, cycles (iterative three-colour DFS)
    colour: dict[str, int] = {t.root: 1}
    stack = [(t.root, iter(_children(t.vertices[t.root])))]
    post: list[str] = []
    while stack:
        vid, it = stack[-1]
        nxt = next(it, "\0end")
        if nxt == "\0end":
            stack.pop()
            colour[vid] = 2
            post.append(vid)
            continue
        if nxt is None:
            continue
        if nxt not in t.vertices:
            diags.append(f"vertex {vid!r} points to missing vertex {nxt!r}")
            continue
        c = colour.get(nxt, 0)
        if c == 1:
            diags.append(f"cycle through edge {vid!r} -> {nxt!r}")
        elif c == 0:
            colour[nxt] = 1
            stack.append((nxt, iter(_children(t.vertices[nxt]))))
    reachable = post[::-1]

    for vid in reachable:
        v = t.vertices[vid]
        if isinstance(v, Computation):
            if v.op == "div":
                diags.append(f"vertex {vid!r}: division is not permitted")
            elif v.op not in OPS:
                diags.append(f"vertex {vid!r}: unknown operation {v.op!r}")
            if v.next is None:
                diags.append(f"vertex {vid!r}: computation vertex needs outdegree 1")
        elif isinstance(v, Branch):
            missing = sum(c is None for c in v.children())
            if missing:
                diags.append(f"vertex {vid!r}: branch vertex needs outdegree 3, has {3 - missing}")
        elif not isinstance(v, Leaf):
            diags.append(f"vertex {vid!r}: unknown vertex kind {type(v).__name__}")
        for op in _operands(v):
            if isinstance(op, Input) and not 1 <= op.index <= t.arity:
                diags.append(f"vertex {vid!r}: input index {op.index} out of range 1..{t.arity}")

    if any(d.startswith("cycle") for d in diags):
        return diags

    # predecessor rule: Var must name a computation vertex on every root path
    always: dict[str, frozenset[str]] = {}
    parents: dict[str, list[str]] = {}
    for vid in reachable:
        for c in _children(t.vertices[vid]):
            if c in t.vertices:
                parents.setdefault(c, []).append(vid)
    for vid in reachable:
        ps = parents.get(vid)
        if not ps:
            always[vid] = frozenset()
        else:
            acc = None
            for p in ps:
                s = always[p] | {p}
                acc = s if acc is None else acc & s
            always[vid] = frozenset(acc)
        for op in _operands(t.vertices[vid]):
            if isinstance(op, Var):
                target = t.vertices.get(op.ref)
                if op.ref not in always[vid]:
                    diags.append(f"vertex {vid!r}: variable {op.ref!r} is not a predecessor on every path")
                elif not isinstance(target, Computation):
                    diags.append(f"vertex {vid!r}: variable {op.ref!r} is not a computation vertex")
    return diags


@dataclass(frozen=True)
class Evaluation:
    accepted: bool
    leaf: str
    path_length: int


def _operand_value(op: Operand, x: Sequence[Fraction], env: dict[str, Fraction]) -> Fraction:
    if isinstance(op, Const):
        return op.value
    if isinstance(op, Input):
        return x[op.index - 1]
    return env[op.ref]


def evaluate(t: Tree, x: Sequence) -> Evaluation:
    t.require_valid()
    if len(x) != t.arity:
        raise InputError(f"point has {len(x)} coordinates, tree has {t.arity} inputs")
    pt = [Fraction(v) for v in x]
    env: dict[str, Fraction] = {}
    vid = t.root
    length = 1
    verts = t.vertices
    while True:
        v = verts[vid]
        if isinstance(v, Leaf):
            return Evaluation(v.accept, vid, length)
        if isinstance(v, Computation):
            a = _operand_value(v.left, pt, env)
            b = _operand_value(v.right, pt, env)
            env[vid] = a + b if v.op == "add" else a - b if v.op == "sub" else a * b
            vid = v.next
        else:
            y = _operand_value(v.test, pt, env)
            vid = v.gt if y > 0 else v.lt if y < 0 else v.eq
        length += 1


@dataclass(frozen=True)
class TreeMetrics:
    height: int
    leaf_count: int
    yes_leaf_count: int
    mult_count_max: int
    yes_depth_max: int  # longest root-to-Yes-leaf path, 0 if there is none


def tree_metrics(t: Tree) -> TreeMetrics:
    """Metrics of the unfolded tree, computed on the shared representation."""
    height: dict[str, int] = {}
    leaves: dict[str, int] = {}
    yes: dict[str, int] = {}
    mults: dict[str, int] = {}
    ydepth: dict[str, int] = {}
    for vid in reversed(t.order):
        v = t.vertices[vid]
        if isinstance(v, Leaf):
            height[vid], leaves[vid], yes[vid], mults[vid] = 1, 1, int(v.accept), 0
            ydepth[vid] = 1 if v.accept else 0
            continue
        kids = _children(v)
        height[vid] = 1 + max(height[c] for c in kids)
        leaves[vid] = sum(leaves[c] for c in kids)
        yes[vid] = sum(yes[c] for c in kids)
        bump = int(isinstance(v, Computation) and v.op == "mul")
        mults[vid] = bump + max(mults[c] for c in kids)
        deepest = max(ydepth[c] for c in kids)
        ydepth[vid] = deepest + 1 if deepest else 0
    r = t.root
    return TreeMetrics(height[r], leaves[r], yes[r], mults[r], ydepth[r])


def mult_counts_to(t: Tree) -> dict[str, int]:
    """For each vertex, the max number of multiplications on a root path ending at it (inclusive)."""
    above: dict[str, int] = {t.root: 0}
    out: dict[str, int] = {}
    for vid in t.order:
        v = t.vertices[vid]
        out[vid] = above[vid] + int(isinstance(v, Computation) and v.op == "mul")
        for c in _children(v):
            above[c] = max(above.get(c, 0), out[vid])
    return out


class TreeBuilder:
    """Accumulates vertices under fresh ids; ``build`` freezes the result."""

    def __init__(self, arity: int, prefix: str = "v"):
        self.arity = arity
        self.prefix = prefix
        self.vertices: dict[str, Vertex] = {}
        self._ids = count()

    def new_id(self) -> str:
        return f"{self.prefix}{next(self._ids)}"

    def put(self, vertex: Vertex, vid: str | None = None) -> str:
        vid = vid or self.new_id()
        self.vertices[vid] = vertex
        return vid

    def leaf(self, accept: bool) -> str:
        return self.put(Leaf(bool(accept)))

    def comp(self, op: str, left: Operand, right: Operand, nxt: str | None, vid: str | None = None) -> str:
        return self.put(Computation(op, left, right, nxt), vid)

    def branch(self, test: Operand, gt: str, eq: str, lt: str, vid: str | None = None) -> str:
        return self.put(Branch(test, gt, eq, lt), vid)

    def build(self, root: str) -> Tree:
        return Tree(self.arity, root, dict(self.vertices))


# -- serialization -------------------------------------------------------------

def _operand_json(op: Operand) -> dict:
    if isinstance(op, Const):
        return {"const": format_rational(op.value)}
    if isinstance(op, Input):
        return {"input": op.index}
    return {"var": op.ref}


def _operand_from_json(d) -> Operand:
    if not isinstance(d, dict) or len(d) != 1:
        raise InputError(f"bad operand {d!r}")
    ((k, v),) = d.items()
    if k == "const":
        return Const(parse_rational(v))
    if k == "input":
        if not isinstance(v, int) or isinstance(v, bool):
            raise InputError(f"input index must be an integer, got {v!r}")
        return Input(v)
    if k == "var":
        return Var(str(v))
    raise InputError(f"bad operand {d!r}")


def tree_to_json(t: Tree) -> dict:
    recs = []
    for vid, v in t.vertices.items():
        if isinstance(v, Computation):
            recs.append({"id": vid, "kind": "computation", "op": v.op,
                         "left": _operand_json(v.left), "right": _operand_json(v.right), "next": v.next})
        elif isinstance(v, Branch):
            recs.append({"id": vid, "kind": "branch", "test": _operand_json(v.test),
                         "gt": v.gt, "eq": v.eq, "lt": v.lt})
        else:
            recs.append({"id": vid, "kind": "leaf", "accept": v.accept})
    return {"inputs": t.arity, "root": t.root, "vertices": recs}


def tree_from_json(data: dict) -> Tree:
    try:
        arity = data["inputs"]
        root = data["root"]
        recs = data["vertices"]
    except (KeyError, TypeError) as exc:
        raise InputError("tree document needs 'inputs', 'root' and 'vertices'") from exc
    if not isinstance(arity, int) or isinstance(arity, bool):
        raise InputError("'inputs' must be an integer")
    verts: dict[str, Vertex] = {}
    for rec in recs:
        try:
            vid, kind = str(rec["id"]), rec["kind"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad vertex record {rec!r}") from exc
        if vid in verts:
            raise InputError(f"duplicate vertex id {vid!r}")
        if kind == "computation":
            verts[vid] = Computation(str(rec.get("op")), _operand_from_json(rec.get("left")),
                                     _operand_from_json(rec.get("right")), rec.get("next"))
        elif kind == "branch":
            verts[vid] = Branch(_operand_from_json(rec.get("test")),
                                rec.get("gt"), rec.get("eq"), rec.get("lt"))
        elif kind == "leaf":
            extra = {"next", "gt", "eq", "lt"} & set(rec)
            if extra:
                raise InputError(f"leaf {vid!r} has outgoing edges {sorted(extra)}")
            if not isinstance(rec.get("accept"), bool):
                raise InputError(f"leaf {vid!r} needs a boolean 'accept'")
            verts[vid] = Leaf(rec["accept"])
        else:
            raise InputError(f"vertex {vid!r}: unknown kind {kind!r}")
    return Tree(arity, str(root), verts)


def dumps_tree(t: Tree) -> str:
    return json.dumps(tree_to_json(t), indent=1) + "\n"


def loads_tree(text: str) -> Tree:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"tree file is not JSON: {exc}") from exc
    return tree_from_json(data)
