"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial in ``n`` variables is a map from exponent tuples of length ``n``
to nonzero :class:`fractions.Fraction` coefficients.  Instances are immutable
and hashable; equality is equality of the canonical term maps.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from .errors import InputError

Rational = Fraction
Exps = tuple[int, ...]


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` (or an integer string) into a Fraction, never via float."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"rational must be a string, got {type(text).__name__}")
    s = text.strip()
    if not s or any(ch in s for ch in "eEjJ") or s.lower() in {"nan", "inf", "-inf"}:
        raise InputError(f"not an exact rational: {text!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not an exact rational: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class Polynomial:
    __slots__ = ("_arity", "_terms", "_hash", "_intform")

    def __init__(self, arity: int, terms: Mapping[Sequence[int], object] | None = None):
        if arity < 0:
            raise InputError("arity must be nonnegative")
        clean: dict[Exps, Fraction] = {}
        for exps, coef in (terms or {}).items():
            e = tuple(int(k) for k in exps)
            if len(e) != arity or any(k < 0 for k in e):
                raise InputError(f"bad exponent vector {exps!r} for arity {arity}")
            c = Fraction(coef)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        self._arity = arity
        self._terms = clean
        self._hash = None
        self._intform = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, arity: int) -> Polynomial:
        return cls(arity)

    @classmethod
    def constant(cls, arity: int, value) -> Polynomial:
        return cls(arity, {(0,) * arity: value})

    @classmethod
    def variable(cls, arity: int, index: int) -> Polynomial:
        """The coordinate ``x_index`` (1-based)."""
        if not 1 <= index <= arity:
            raise InputError(f"variable index {index} out of range 1..{arity}")
        e = [0] * arity
        e[index - 1] = 1
        return cls(arity, {tuple(e): 1})

    @classmethod
    def _raw(cls, arity: int, terms: dict[Exps, Fraction]) -> Polynomial:
        p = cls.__new__(cls)
        p._arity = arity
        p._terms = terms
        p._hash = None
        p._intform = None
        return p

    # -- accessors ------------------------------------------------------
    @property
    def arity(self) -> int:
        return self._arity

    @property
    def terms(self) -> Mapping[Exps, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    # -- arithmetic -----------------------------------------------------
    def _check(self, other: Polynomial) -> None:
        if not isinstance(other, Polynomial):
            raise TypeError(f"expected Polynomial, got {type(other).__name__}")
        if other._arity != self._arity:
            raise InputError(f"arity mismatch: {self._arity} vs {other._arity}")

    def _lift(self, other) -> Polynomial:
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self._arity, other)
        self._check(other)
        return other

    def __add__(self, other) -> Polynomial:
        other = self._lift(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Polynomial._raw(self._arity, out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw(self._arity, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> Polynomial:
        return self._lift(other) - self

    def __mul__(self, other) -> Polynomial:
        other = self._lift(other)
        out: dict[Exps, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Polynomial._raw(self._arity, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise InputError("negative powers are not polynomials")
        result = Polynomial.constant(self._arity, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def rename(self, arity: int, index_map: Sequence[int]) -> Polynomial:
        """Move variable ``i`` (1-based) to position ``index_map[i-1]`` in a ring of ``arity`` variables."""
        if len(index_map) != self._arity:
            raise InputError("index map must cover every variable")
        out: dict[Exps, Fraction] = {}
        for e, c in self._terms.items():
            ne = [0] * arity
            for i, k in enumerate(e):
                if k:
                    ne[index_map[i] - 1] += k
            t = tuple(ne)
            out[t] = out.get(t, 0) + c
        return Polynomial(arity, out)

    # -- comparison -----------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._arity, frozenset(self._terms.items())))
        return self._hash

    # -- evaluation -----------------------------------------------------
    def _integer_form(self):
        # (L, [(exps, K)]) with L * p == sum K * x^exps and integer K.
        if self._intform is None:
            den = lcm(*(c.denominator for c in self._terms.values())) if self._terms else 1
            self._intform = (
                den,
                [(e, c.numerator * (den // c.denominator)) for e, c in self._terms.items()],
                self.degree(),
            )
        return self._intform

    def _scaled_value(self, point: Sequence[Fraction]) -> tuple[int, int]:
        """Return ``(V, S)`` with ``p(point) == V / S`` and ``S > 0``; integers only."""
        if len(point) != self._arity:
            raise InputError(f"point has {len(point)} coordinates, polynomial arity is {self._arity}")
        den, iterms, d = self._integer_form()
        pt = [Fraction(v) for v in point]
        D = lcm(*(v.denominator for v in pt)) if pt else 1
        a = [v.numerator * (D // v.denominator) for v in pt]
        dpow = [1]
        for _ in range(d):
            dpow.append(dpow[-1] * D)
        cache: dict[tuple[int, int], int] = {}
        total = 0
        for e, k in iterms:
            prod = k * dpow[d - sum(e)]
            for i, ei in enumerate(e):
                if ei:
                    key = (i, ei)
                    pw = cache.get(key)
                    if pw is None:
                        pw = cache[key] = a[i] ** ei
                    prod *= pw
            total += prod
        return total, den * dpow[d]

    def __call__(self, point: Sequence) -> Fraction:
        v, s = self._scaled_value(point)
        return Fraction(v, s)

    def sign_at(self, point: Sequence) -> int:
        v, _ = self._scaled_value(point)
        return (v > 0) - (v < 0)

    # -- serialization --------------------------------------------------
    def to_json(self) -> list[dict]:
        return [
            {"coef": format_rational(c), "exps": list(e)}
            for e, c in sorted(self._terms.items(), reverse=True)
        ]

    @classmethod
    def from_json(cls, data: Iterable[Mapping], arity: int) -> Polynomial:
        terms: dict[Exps, Fraction] = {}
        for rec in data:
            try:
                e = tuple(rec["exps"])
                c = parse_rational(rec["coef"])
            except (KeyError, TypeError) as exc:
                raise InputError(f"bad polynomial term {rec!r}") from exc
            if e in terms:
                raise InputError(f"duplicate exponent vector {list(e)}")
            terms[e] = c
        return cls(arity, terms)

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in sorted(self._terms.items(), reverse=True):
            mono = "*".join(
                f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def poly_arith(op: str, p: Polynomial, q: Polynomial) -> Polynomial:
    if p.arity != q.arity:
        raise InputError(f"arity mismatch: {p.arity} vs {q.arity}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise InputError(f"unsupported polynomial operation {op!r}")


def eval_poly(p: Polynomial, x: Sequence) -> Fraction:
    return p(x)


def total_degree(p: Polynomial) -> int:
    """Maximum exponent sum; 0 for the zero polynomial."""
    return p.degree()


def variables(arity: int) -> list[Polynomial]:
    return [Polynomial.variable(arity, i) for i in range(1, arity + 1)]
