"""Sign conditions, basic sets and finite unions of them (DNF formulas).

Non-strict conditions keep their threshold inside the polynomial, so every
condition reads ``poly <sign> 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .errors import InputError
from .poly import Polynomial


class Sign(Enum):
    LT = "lt"
    EQ = "eq"
    GT = "gt"
    LE = "le"
    GE = "ge"

    @property
    def strict(self) -> bool:
        return self in (Sign.LT, Sign.GT)

    def admits(self, s: int) -> bool:
        """Whether a value of sign ``s`` (-1, 0, 1) satisfies ``value <self> 0``."""
        if self is Sign.LT:
            return s < 0
        if self is Sign.GT:
            return s > 0
        if self is Sign.EQ:
            return s == 0
        if self is Sign.LE:
            return s <= 0
        return s >= 0


@dataclass(frozen=True)
class SignCondition:
    poly: Polynomial
    sign: Sign

    def holds(self, x: Sequence[Fraction]) -> bool:
        return self.sign.admits(self.poly.sign_at(x))


@dataclass(frozen=True)
class BasicSet:
    arity: int
    conds: tuple[SignCondition, ...] = ()
    leaf: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "conds", tuple(self.conds))
        for c in self.conds:
            if c.poly.arity != self.arity:
                raise InputError(f"condition arity {c.poly.arity} differs from set arity {self.arity}")


@dataclass(frozen=True)
class Dnf:
    arity: int
    disjuncts: tuple[BasicSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        for b in self.disjuncts:
            if b.arity != self.arity:
                raise InputError(f"disjunct arity {b.arity} differs from formula arity {self.arity}")

    def polynomials(self) -> list[Polynomial]:
        """Distinct polynomials in first-occurrence order."""
        seen: dict[Polynomial, None] = {}
        for b in self.disjuncts:
            for c in b.conds:
                seen.setdefault(c.poly, None)
        return list(seen)

    def is_closed(self) -> bool:
        return all(not c.sign.strict for b in self.disjuncts for c in b.conds)


def eval_formula(f: Dnf, x: Sequence) -> bool:
    """Exact membership: OR over disjuncts of AND over conditions."""
    if len(x) != f.arity:
        raise InputError(f"point has {len(x)} coordinates, formula arity is {f.arity}")
    pt = [Fraction(v) for v in x]
    signs: dict[Polynomial, int] = {}
    for b in f.disjuncts:
        for c in b.conds:
            s = signs.get(c.poly)
            if s is None:
                s = signs[c.poly] = c.poly.sign_at(pt)
            if not c.sign.admits(s):
                break
        else:
            return True
    return False


# -- serialization -------------------------------------------------------------

def dnf_to_json(f: Dnf) -> dict:
    union = []
    for b in f.disjuncts:
        rec: dict = {"conds": [{"poly": c.poly.to_json(), "sign": c.sign.value} for c in b.conds]}
        if b.leaf is not None:
            rec["leaf"] = b.leaf
        union.append(rec)
    return {"inputs": f.arity, "union": union}


def dnf_from_json(data: dict) -> Dnf:
    try:
        arity = data["inputs"]
        union = data["union"]
    except (KeyError, TypeError) as exc:
        raise InputError("formula document needs 'inputs' and 'union'") from exc
    if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
        raise InputError("'inputs' must be a nonnegative integer")
    disjuncts = []
    for rec in union:
        conds = []
        for c in rec.get("conds", []):
            try:
                sign = Sign(c["sign"])
            except (KeyError, ValueError) as exc:
                raise InputError(f"bad sign in condition {c!r}") from exc
            conds.append(SignCondition(Polynomial.from_json(c.get("poly", []), arity), sign))
        disjuncts.append(BasicSet(arity, tuple(conds), rec.get("leaf")))
    return Dnf(arity, tuple(disjuncts))


def dumps_dnf(f: Dnf) -> str:
    return json.dumps(dnf_to_json(f), indent=1) + "\n"


def loads_dnf(text: str) -> Dnf:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"formula file is not JSON: {exc}") from exc
    return dnf_from_json(data)
