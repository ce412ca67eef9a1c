"""Bound calculators with explicit constants.

The asymptotic lower and upper bounds take their absolute constants as
parameters; only :func:`invert_height_bound` is asserted against measured
trees.  Logarithms are base 2 and bracketed by dyadic rationals, so every
comparison happens on exact numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, log2
from typing import Mapping, Sequence

from .errors import InputError

DEFAULT_PRECISION = Fraction(1, 10**6)


@dataclass(frozen=True)
class BoundParams:
    c1: Fraction = Fraction(1)
    c2: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "c1", Fraction(self.c1))
        object.__setattr__(self, "c2", Fraction(self.c2))
        if self.c1 <= 0 or self.c2 <= 0:
            raise InputError("c1 and c2 must be positive")


@dataclass(frozen=True)
class Log2Bracket:
    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi


def _frac_bits(num: int, den_shift: int, bits: int, guard: int) -> int | None:
    """Leading ``bits`` binary digits of log2(num / 2**den_shift) for a ratio in [1, 2).

    Fixed-point repeated squaring with lower and upper bounds; returns None
    when the bounds straddle a digit decision and more guard bits are needed.
    """
    p = bits + guard
    lo = (num << p) >> den_shift
    hi = lo if lo << den_shift == num << p else lo + 1
    two = 2 << p
    out = 0
    for _ in range(bits):
        lo = (lo * lo) >> p
        hi = -((-hi * hi) >> p)
        if lo >= two:
            bit = 1
        elif hi < two:
            bit = 0
        else:
            return None
        out = (out << 1) | bit
        if bit:
            lo >>= 1
            hi = (hi + 1) >> 1
    return out


def log2_bracket(b: int, precision: Fraction = DEFAULT_PRECISION) -> Log2Bracket:
    """Dyadic lo <= log2(b) <= hi with hi - lo <= precision (lo == hi for powers of two)."""
    if b < 1:
        raise InputError("log2 needs an integer >= 1")
    precision = Fraction(precision)
    if precision <= 0:
        raise InputError("precision must be positive")
    e = b.bit_length() - 1
    if b == 1 << e:
        return Log2Bracket(Fraction(e), Fraction(e))
    bits = max(1, ceil(log2(1 / precision)))
    while Fraction(1, 1 << bits) > precision:
        bits += 1
    guard = 16
    while (frac := _frac_bits(b, e, bits, guard)) is None:
        guard *= 2
    lo = e + Fraction(frac, 1 << bits)
    return Log2Bracket(lo, lo + Fraction(1, 1 << bits))


def _log2(b: int, precision) -> Fraction:
    return log2_bracket(b, precision).lo


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InputError(msg)


def yao_lower(bBM: int, n: int, p: BoundParams = BoundParams(), precision=DEFAULT_PRECISION) -> Fraction:
    """c1 * log2(bBM) - c2 * n."""
    _require(bBM >= 1, "Betti argument must be >= 1")
    _require(n >= 1, "dimension must be >= 1")
    return p.c1 * _log2(bBM, precision) - p.c2 * n


def main_lower(bm: int, m: int, n: int, p: BoundParams = BoundParams(), precision=DEFAULT_PRECISION) -> Fraction:
    """c1 * log2(b_m) / (m+1) - c2 * n."""
    _require(bm >= 1, "Betti argument must be >= 1")
    _require(m >= 0, "m must be >= 0")
    _require(n >= 1, "dimension must be >= 1")
    return p.c1 * _log2(bm, precision) / (m + 1) - p.c2 * n


def proj_lower(bm: int, m: int, n: int, p: BoundParams = BoundParams(), precision=DEFAULT_PRECISION) -> Fraction:
    """c1 * log2(b_m) / (m+1)^2 - c2 * n / (m+1)."""
    _require(bm >= 1, "Betti argument must be >= 1")
    _require(m >= 0, "m must be >= 0")
    _require(n >= 1, "dimension must be >= 1")
    return p.c1 * _log2(bm, precision) / (m + 1) ** 2 - p.c2 * Fraction(n, m + 1)


def total_betti_upper(s: int, d: int, n: int, m: int = 0, C=1) -> tuple[Fraction, Fraction]:
    """((C s^2 d)^n, (C (m+1) s d)^n)."""
    C = Fraction(C)
    _require(s >= 1 and d >= 1, "s and d must be >= 1")
    _require(n >= 1 and m >= 0, "need n >= 1 and m >= 0")
    _require(C > 0, "C must be positive")
    return (C * s * s * d) ** n, (C * (m + 1) * s * d) ** n


def height_count_expression(k: int, n: int, C=1) -> Fraction:
    """C * n * ((k 3^k)^2 2^k)^n."""
    return Fraction(C) * n * ((k * 3**k) ** 2 * 2**k) ** n


def invert_height_bound(b: int, n: int, C=1) -> int:
    """Least k >= 1 with C * n * ((k 3^k)^2 2^k)^n >= b."""
    C = Fraction(C)
    _require(b >= 1, "Betti argument must be >= 1")
    _require(n >= 1, "dimension must be >= 1")
    _require(C > 0, "C must be positive")
    k = 1
    while height_count_expression(k, n, C) < b:
        k += 1
    return k


@dataclass(frozen=True)
class ProjectionCheck:
    m: int
    lhs: int
    rhs: int
    holds: bool
    slack: int
    terms: tuple[tuple[int, int, int], ...]  # (p, q, b_q(W_p))
    proof_factor: int
    proof_factor_adjusted: bool

    def to_json(self) -> dict:
        return {
            "m": self.m, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds, "slack": self.slack,
            "terms": [{"p": p, "q": q, "b": b} for p, q, b in self.terms],
            "proof_factor": self.proof_factor,
            "proof_factor_adjusted": self.proof_factor_adjusted,
        }


def projection_inequality_check(betti_W: Mapping[int, Sequence[int]], betti_target: int, m: int) -> ProjectionCheck:
    """b_m(Y) <= sum over p+q=m of b_q(W_p).

    ``betti_W[p]`` lists b_0, b_1, ... of W_p.  The cruder bound
    m * b(W_nu) from the same argument degenerates at m = 0, so the report
    carries the factor max(m, 1) and marks when that adjustment applied.
    """
    _require(m >= 0, "m must be >= 0")
    _require(betti_target >= 0, "Betti numbers are nonnegative")
    terms = []
    for p in range(m + 1):
        q = m - p
        row = betti_W.get(p)
        if row is None or len(row) <= q:
            raise InputError(f"table lacks b_{q}(W_{p})")
        if row[q] < 0:
            raise InputError("Betti numbers are nonnegative")
        terms.append((p, q, int(row[q])))
    rhs = sum(b for _, _, b in terms)
    return ProjectionCheck(
        m=m, lhs=betti_target, rhs=rhs, holds=betti_target <= rhs, slack=rhs - betti_target,
        terms=tuple(terms), proof_factor=max(m, 1), proof_factor_adjusted=m == 0,
    )
