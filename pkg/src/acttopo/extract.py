"""From a tree to the semialgebraic set it decides, plus counting statistics."""

from __future__ import annotations

from dataclasses import dataclass

from .act import Branch, Computation, Const, Input, Leaf, Operand, Tree, Var
from .errors import InputError, ResourceLimitError
from .poly import Polynomial
from .semialg import BasicSet, Dnf, Sign, SignCondition

DEFAULT_TERM_LIMIT = 10**6


class _Expander:
    def __init__(self, t: Tree, term_limit: int | None):
        t.require_valid()
        self.t = t
        self.limit = term_limit
        self.memo: dict[str, Polynomial] = {}

    def operand(self, op: Operand) -> Polynomial:
        n = self.t.arity
        if isinstance(op, Const):
            return Polynomial.constant(n, op.value)
        if isinstance(op, Input):
            return Polynomial.variable(n, op.index)
        return self.vertex(op.ref)

    def vertex(self, vid: str) -> Polynomial:
        p = self.memo.get(vid)
        if p is not None:
            return p
        v = self.t.vertices[vid]
        if isinstance(v, Branch):
            p = self.operand(v.test)
        elif isinstance(v, Computation):
            a, b = self.operand(v.left), self.operand(v.right)
            p = a + b if v.op == "add" else a - b if v.op == "sub" else a * b
        else:
            raise InputError(f"vertex {vid!r} is a leaf and carries no polynomial")
        if self.limit is not None and len(p) > self.limit:
            raise ResourceLimitError(f"expansion at {vid!r} has {len(p)} terms (limit {self.limit})")
        self.memo[vid] = p
        return p


def vertex_polynomial(t: Tree, v: str, term_limit: int | None = DEFAULT_TERM_LIMIT) -> Polynomial:
    """Expand ``Y_v`` (or a branch test) as a polynomial in the inputs."""
    if v not in t.vertices:
        raise InputError(f"no vertex {v!r}")
    exp = _Expander(t, term_limit)
    if v not in t.order:
        raise InputError(f"vertex {v!r} is not reachable from the root")
    return exp.vertex(v)


_EDGE_SIGNS = (("gt", Sign.GT), ("eq", Sign.EQ), ("lt", Sign.LT))


def leaf_dnf(t: Tree, term_limit: int | None = DEFAULT_TERM_LIMIT) -> Dnf:
    """One basic set per Yes leaf of the unfolded tree, tagged with the leaf id.

    Shared subtrees are unfolded, so the output can be exponentially larger
    than the stored tree.
    """
    exp = _Expander(t, term_limit)
    out: list[BasicSet] = []
    stack: list[tuple[str, tuple[SignCondition, ...]]] = [(t.root, ())]
    while stack:
        vid, conds = stack.pop()
        v = t.vertices[vid]
        if isinstance(v, Leaf):
            if v.accept:
                out.append(BasicSet(t.arity, conds, vid))
        elif isinstance(v, Computation):
            stack.append((v.next, conds))
        else:
            f = exp.vertex(vid)
            for attr, sign in reversed(_EDGE_SIGNS):
                stack.append((getattr(v, attr), conds + (SignCondition(f, sign),)))
    return Dnf(t.arity, tuple(out))


@dataclass(frozen=True)
class DnfStats:
    s: int
    d: int
    disjunct_count: int
    max_conds_per_disjunct: int


def dnf_stats(f: Dnf) -> DnfStats:
    polys = f.polynomials()
    return DnfStats(
        s=len(polys),
        d=max((p.degree() for p in polys), default=0),
        disjunct_count=len(f.disjuncts),
        max_conds_per_disjunct=max((len(b.conds) for b in f.disjuncts), default=0),
    )
