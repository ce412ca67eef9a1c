"""Monotone families of compact approximations: S_delta, S_{delta,eps}, T_m(S).

Every function here works on formulas; the tree-level counterparts live in
:mod:`acttopo.transforms` and are checked against these.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence, Union

from .errors import InputError
from .poly import Polynomial, variables
from .semialg import BasicSet, Dnf, Sign, SignCondition, eval_formula

__all__ = [
    "Bounded", "Unbounded", "AmbientMode", "EpsDelta", "Schedule",
    "closure_delta", "closure_delta_eps", "t_m_formula", "validate_schedule",
    "eval_formula", "and_dnf", "fiber_product_formula", "projection_contains",
    "parse_schedule",
]


@dataclass(frozen=True)
class Bounded:
    """The set already lives in the ball |x|^2 <= ball_radius_sq; nothing is appended."""
    ball_radius_sq: Fraction

    def __post_init__(self):
        object.__setattr__(self, "ball_radius_sq", Fraction(self.ball_radius_sq))
        if self.ball_radius_sq <= 0:
            raise InputError("ball radius must be positive")


@dataclass(frozen=True)
class Unbounded:
    """Each level gains the conjunct |x|^2 - 1/delta <= 0."""


AmbientMode = Union[Bounded, Unbounded]


@dataclass(frozen=True)
class EpsDelta:
    eps: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.eps <= 0 or self.delta <= 0:
            raise InputError("eps and delta must be positive")

    @property
    def separated(self) -> bool:
        """eps < delta^2: the three relaxed sign regions of a polynomial are pairwise disjoint."""
        return self.eps < self.delta ** 2


@dataclass(frozen=True)
class Schedule:
    levels: tuple[EpsDelta, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise InputError("a schedule needs at least one level")

    @classmethod
    def of(cls, *pairs) -> Schedule:
        """``Schedule.of((eps0, delta0), (eps1, delta1), ...)``."""
        return cls(tuple(EpsDelta(e, d) for e, d in pairs))

    def flat(self) -> list[Fraction]:
        return [v for lv in self.levels for v in (lv.eps, lv.delta)]

    def __len__(self) -> int:
        return len(self.levels)


def parse_schedule(text: str) -> Schedule:
    """``"eps0,delta0,eps1,delta1,..."`` with exact rationals."""
    from .poly import parse_rational

    vals = [parse_rational(s) for s in text.split(",") if s.strip()]
    if not vals or len(vals) % 2:
        raise InputError("schedule needs an even, nonzero number of values")
    return Schedule.of(*zip(vals[::2], vals[1::2]))


def _names(sched: Schedule) -> list[str]:
    return [f"{k}{i}" for i in range(len(sched)) for k in ("eps", "delta")]


def validate_schedule(sched: Schedule, ratio: Fraction | int | None = 4) -> list[str]:
    """Check eps_0 < delta_0 < eps_1 < ... < delta_l < 1 and, if ``ratio`` is given,
    that every consecutive quotient is at least ``ratio``."""
    if ratio is not None:
        ratio = Fraction(ratio)
        if ratio <= 1:
            raise InputError("separation ratio must exceed 1")
    vals, names = sched.flat(), _names(sched)
    diags = []
    for (a, na), (b, nb) in zip(zip(vals, names), zip(vals[1:], names[1:])):
        if not a < b:
            diags.append(f"interleaving: {na}={a} is not below {nb}={b}")
        elif ratio is not None and b / a < ratio:
            diags.append(f"separation: {nb}/{na}={b / a} < {ratio}")
    if not vals[-1] < 1:
        diags.append(f"interleaving: {names[-1]}={vals[-1]} is not below 1")
    return diags


def _require_schedule(sched: Schedule) -> None:
    diags = validate_schedule(sched, None)
    if diags:
        raise InputError("invalid schedule: " + "; ".join(diags))


def _ball(arity: int, delta: Fraction) -> SignCondition:
    h = sum((x * x for x in variables(arity)), Polynomial.zero(arity))
    return SignCondition(h - 1 / delta, Sign.LE)


def _relax(f: Dnf, delta: Fraction, eps: Fraction | None, mode: AmbientMode) -> Dnf:
    delta = Fraction(delta)
    if delta <= 0:
        raise InputError("delta must be positive")
    if eps is not None and Fraction(eps) <= 0:
        raise InputError("eps must be positive")
    out = []
    for b in f.disjuncts:
        conds = []
        for c in b.conds:
            if c.sign is Sign.GT:
                conds.append(SignCondition(c.poly - delta, Sign.GE))
            elif c.sign is Sign.LT:
                conds.append(SignCondition(-c.poly - delta, Sign.GE))
            elif c.sign is Sign.EQ:
                conds.append(c if eps is None else SignCondition(c.poly * c.poly - eps, Sign.LE))
            else:
                raise InputError(f"closure expects strict signs or equations, found {c.sign.value}")
        if isinstance(mode, Unbounded):
            conds.append(_ball(f.arity, delta))
        out.append(BasicSet(f.arity, tuple(conds), b.leaf))
    return Dnf(f.arity, tuple(out))


def closure_delta(f: Dnf, delta, mode: AmbientMode = Unbounded()) -> Dnf:
    """S_delta: h>0 -> h-delta >= 0, h<0 -> -h-delta >= 0, equations kept."""
    return _relax(f, delta, None, mode)


def closure_delta_eps(f: Dnf, delta, eps, mode: AmbientMode = Unbounded()) -> Dnf:
    """S_{delta,eps}: as :func:`closure_delta` and additionally h=0 -> h^2-eps <= 0."""
    return _relax(f, delta, eps, mode)


def t_m_formula(f: Dnf, sched: Schedule, mode: AmbientMode = Unbounded()) -> Dnf:
    """Union of S_{delta_i, eps_i} over the levels of the schedule."""
    _require_schedule(sched)
    out: list[BasicSet] = []
    for lv in sched.levels:
        out.extend(closure_delta_eps(f, lv.delta, lv.eps, mode).disjuncts)
    return Dnf(f.arity, tuple(out))


def and_dnf(a: Dnf, b: Dnf) -> Dnf:
    """Conjunction, distributed back into disjunctive form."""
    if a.arity != b.arity:
        raise InputError("arity mismatch")
    return Dnf(a.arity, tuple(BasicSet(a.arity, x.conds + y.conds) for x, y in product(a.disjuncts, b.disjuncts)))


def fiber_product_formula(f: Dnf, r: int, p: int) -> Dnf:
    """(p+1)-fold fibered product of the set ``f`` over the projection dropping its last ``r`` coordinates.

    Variables of the result: the n-r base coordinates, then p+1 blocks of r fiber coordinates.
    """
    n = f.arity
    if not 0 < r < n or p < 0:
        raise InputError(f"need 0 < r < n and p >= 0, got n={n}, r={r}, p={p}")
    m = (n - r) + (p + 1) * r
    result = None
    for j in range(p + 1):
        index_map = list(range(1, n - r + 1)) + [n - r + j * r + i for i in range(1, r + 1)]
        copy = Dnf(m, tuple(
            BasicSet(m, tuple(SignCondition(c.poly.rename(m, index_map), c.sign) for c in b.conds))
            for b in f.disjuncts))
        result = copy if result is None else and_dnf(result, copy)
    return result


def projection_contains(f: Dnf, base: Sequence, fiber_points: Iterable[Sequence]) -> bool:
    """Fiber search: is some ``(base, y)`` with ``y`` among ``fiber_points`` in ``f``?"""
    base = list(base)
    return any(eval_formula(f, base + list(y)) for y in fiber_points)
