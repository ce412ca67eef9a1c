"""Desk-scale homology of closed semialgebraic sets.

A closed formula is sampled at the centers of a regular grid of cells; the
occupied cells and all their faces form a cubical complex whose mod-2 Betti
numbers are computed exactly.

Cells of the complex live on the refined grid of ``2N+1`` points per axis: a
refined coordinate is even for a vertex position and odd for an open
interval, so the dimension of a cell is its number of odd coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from math import lcm, prod
from typing import Sequence

import numpy as np
from scipy import ndimage, sparse

from .errors import InputError, ResourceLimitError
from .poly import Polynomial, parse_rational
from .semialg import Dnf, Sign

DEFAULT_CELL_LIMIT = 5 * 10**6


@dataclass(frozen=True)
class Box:
    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]
    resolution: int

    def __post_init__(self):
        lo = tuple(Fraction(v) for v in self.lo)
        hi = tuple(Fraction(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not lo:
            raise InputError("box needs matching, nonempty lo/hi lists")
        if any(a >= b for a, b in zip(lo, hi)):
            raise InputError("box needs lo < hi on every axis")
        if self.resolution < 1:
            raise InputError("resolution must be at least 1")

    @classmethod
    def cube(cls, lo, hi, dim: int, resolution: int) -> Box:
        return cls((lo,) * dim, (hi,) * dim, resolution)

    @classmethod
    def parse(cls, spec: str, resolution: int) -> Box:
        """``"lo:hi,lo:hi,..."`` with exact rationals."""
        lo, hi = [], []
        for part in spec.split(","):
            try:
                a, b = part.split(":")
            except ValueError as exc:
                raise InputError(f"bad box interval {part!r}") from exc
            lo.append(parse_rational(a))
            hi.append(parse_rational(b))
        return cls(tuple(lo), tuple(hi), resolution)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def with_resolution(self, resolution: int) -> Box:
        return Box(self.lo, self.hi, resolution)

    def centers(self, axis: int) -> list[Fraction]:
        a, b, n = self.lo[axis], self.hi[axis], self.resolution
        return [a + (2 * j + 1) * (b - a) / (2 * n) for j in range(n)]

    def corners(self, axis: int) -> list[Fraction]:
        a, b, n = self.lo[axis], self.hi[axis], self.resolution
        return [a + j * (b - a) / n for j in range(n + 1)]


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    box: Box
    occupied: np.ndarray  # bool, shape (N,) * dim

    def count(self) -> int:
        return int(self.occupied.sum())


def _poly_sign_grid(p: Polynomial, coords: Sequence[Sequence[Fraction]]) -> np.ndarray:
    """Exact signs (-1/0/1) of ``p`` on the product grid of per-axis coordinates."""
    n = p.arity
    shape = tuple(len(c) for c in coords)
    if p.is_zero():
        return np.zeros(shape, dtype=np.int8)
    dens = [lcm(*(v.denominator for v in c)) for c in coords]
    ints = [[int(v * d) for v in c] for c, d in zip(coords, dens)]
    # integer coefficients K_e with  M * p(x) = sum_e K_e * prod a_i^e_i
    scaled = {e: c / prod(d ** k for d, k in zip(dens, e)) for e, c in p.items()}
    m = lcm(*(q.denominator for q in scaled.values()))
    iterms = [(e, int(q * m)) for e, q in scaled.items()]
    amax = [max(abs(v) for v in a) for a in ints]
    bound = sum(abs(k) * prod(am ** e for am, e in zip(amax, ex)) for ex, k in iterms)
    dtype = np.int64 if bound < 2**62 else object
    total = np.zeros(shape, dtype=dtype)
    powcache: dict[tuple[int, int], np.ndarray] = {}
    for ex, k in iterms:
        term = np.array(k, dtype=dtype)
        for axis, e in enumerate(ex):
            if not e:
                continue
            key = (axis, e)
            if key not in powcache:
                vec = np.array([v ** e for v in ints[axis]], dtype=dtype)
                view = [1] * n
                view[axis] = shape[axis]
                powcache[key] = vec.reshape(view)
            term = term * powcache[key]
        total = total + term
    return np.sign(total).astype(np.int8)


_SIGN_TEST = {
    Sign.LT: lambda s: s < 0,
    Sign.GT: lambda s: s > 0,
    Sign.EQ: lambda s: s == 0,
    Sign.LE: lambda s: s <= 0,
    Sign.GE: lambda s: s >= 0,
}


def formula_on_grid(f: Dnf, coords: Sequence[Sequence[Fraction]]) -> np.ndarray:
    """Exact membership of every product-grid point in ``f`` as a boolean array."""
    shape = tuple(len(c) for c in coords)
    if len(coords) != f.arity:
        raise InputError(f"grid has {len(coords)} axes, formula arity is {f.arity}")
    signs: dict[Polynomial, np.ndarray] = {}
    out = np.zeros(shape, dtype=bool)
    for b in f.disjuncts:
        acc = np.ones(shape, dtype=bool)
        for c in b.conds:
            s = signs.get(c.poly)
            if s is None:
                s = signs[c.poly] = _poly_sign_grid(c.poly, coords)
            acc &= _SIGN_TEST[c.sign](s)
            if not acc.any():
                break
        out |= acc
    return out


def occupancy_grid(f: Dnf, box: Box, corner_mode: bool = False,
                   cell_limit: int | None = DEFAULT_CELL_LIMIT) -> OccupancyGrid:
    """Cells whose center (or, in corner mode, some corner) satisfies the closed formula ``f``."""
    if not f.is_closed():
        raise InputError("occupancy needs a closed formula (no strict signs); compactify first")
    if f.arity != box.dim:
        raise InputError(f"formula arity {f.arity} differs from box dimension {box.dim}")
    if cell_limit is not None and box.resolution ** box.dim > cell_limit:
        raise ResourceLimitError(f"{box.resolution}^{box.dim} cells exceed the limit {cell_limit}")
    if not corner_mode:
        occ = formula_on_grid(f, [box.centers(i) for i in range(box.dim)])
    else:
        pts = formula_on_grid(f, [box.corners(i) for i in range(box.dim)])
        n = box.resolution
        occ = np.zeros((n,) * box.dim, dtype=bool)
        for shift in product((0, 1), repeat=box.dim):
            occ |= pts[tuple(slice(s, s + n) for s in shift)]
    return OccupancyGrid(box, occ)


class CubicalComplex:
    """Closed cubical complex on the refined grid.

    ``present`` is a boolean array of shape ``(2N+1,) * dim``.
    """

    def __init__(self, present: np.ndarray):
        self.present = present
        self.dim = present.ndim
        self.shape = present.shape

    @cached_property
    def cell_dims(self) -> np.ndarray:
        odd = [np.arange(s) % 2 for s in self.shape]
        grids = [o.reshape([-1 if i == a else 1 for i in range(self.dim)]) for a, o in enumerate(odd)]
        return reduce(np.add, grids).astype(np.int8) * np.ones(self.shape, dtype=np.int8)

    def cell_counts(self) -> list[int]:
        dims = self.cell_dims[self.present]
        return [int((dims == k).sum()) for k in range(self.dim + 1)]

    def is_empty(self) -> bool:
        return not self.present.any()

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.cell_counts()))

    def _cells(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.present & (self.cell_dims == k))

    def boundary_matrix(self, k: int) -> sparse.csc_matrix:
        """Incidence of k-cells (columns) on (k-1)-cells (rows), entries 0/1."""
        cols = self._cells(k)
        if k == 0:
            return sparse.csc_matrix((0, len(cols)), dtype=np.int64)
        rows_cells = self._cells(k - 1)
        lookup = np.full(self.present.size, -1, dtype=np.int64)
        lookup[rows_cells] = np.arange(len(rows_cells))
        coords = np.unravel_index(cols, self.shape)
        strides = [prod(self.shape[a + 1:]) for a in range(self.dim)]
        r_idx, c_idx = [], []
        for a in range(self.dim):
            sel = coords[a] % 2 == 1
            base = cols[sel]
            which = np.flatnonzero(sel)
            for sgn in (-1, 1):
                r_idx.append(lookup[base + sgn * strides[a]])
                c_idx.append(which)
        r = np.concatenate(r_idx) if r_idx else np.zeros(0, dtype=np.int64)
        c = np.concatenate(c_idx) if c_idx else np.zeros(0, dtype=np.int64)
        if (r < 0).any():
            raise AssertionError("complex is not closed")
        data = np.ones(len(r), dtype=np.int64)
        return sparse.csc_matrix((data, (r, c)), shape=(len(rows_cells), len(cols)))

    def check_boundary(self) -> bool:
        """d_k o d_{k+1} == 0 over GF(2) for every k."""
        for k in range(1, self.dim):
            prod_ = self.boundary_matrix(k) @ self.boundary_matrix(k + 1)
            if (prod_.data % 2).any():
                return False
        return True


def build_complex(g: OccupancyGrid, check: bool = False) -> CubicalComplex:
    """All occupied top cells together with all their faces."""
    occ = np.asarray(g.occupied, dtype=bool)
    n = occ.ndim
    seeds = np.zeros(tuple(2 * s + 1 for s in occ.shape), dtype=bool)
    seeds[tuple(slice(1, None, 2) for _ in range(n))] = occ
    present = ndimage.binary_dilation(seeds, structure=np.ones((3,) * n, dtype=bool))
    cx = CubicalComplex(present)
    if check and not cx.check_boundary():
        raise AssertionError("boundary of boundary is nonzero")
    return cx


@dataclass(frozen=True)
class BettiVector:
    b: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.b[k]

    def __iter__(self):
        return iter(self.b)

    def __len__(self) -> int:
        return len(self.b)

    def total(self) -> int:
        return sum(self.b)


def _axis_mask(shape: tuple[int, ...], offset: int) -> np.ndarray:
    """Bit a set where the cell is an open interval along axis a (coordinate - offset odd)."""
    n = len(shape)
    parts = [(((np.arange(s) - offset) % 2) << a).reshape([-1 if i == a else 1 for i in range(n)])
             for a, s in enumerate(shape)]
    return reduce(np.add, parts).astype(np.int64) * np.ones(shape, dtype=np.int64)


def _collapse(cx: CubicalComplex) -> tuple[np.ndarray, np.ndarray]:
    """Elementary collapses (free face + its unique coface) until none is left.

    Each collapse is a homotopy equivalence, so homology is unchanged.
    Returns the surviving cells as a padded presence array and its axis mask.
    """
    n = cx.dim
    pres = np.pad(cx.present, 1)
    shape = pres.shape
    strides = [prod(shape[a + 1:]) for a in range(n)]
    mask = _axis_mask(shape, 1)

    cnt = np.zeros(shape, dtype=np.int64)
    for a in range(n):
        nb = np.zeros(shape, dtype=np.int64)
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[a] = slice(0, -1)
        hi[a] = slice(1, None)
        nb[tuple(lo)] += pres[tuple(hi)]
        nb[tuple(hi)] += pres[tuple(lo)]
        cnt += np.where((mask >> a) & 1 == 0, nb, 0)
    cnt = np.where(pres, cnt, 0)

    odd_st = [[s for a, s in enumerate(strides) if m >> a & 1] for m in range(1 << n)]
    even_st = [[s for a, s in enumerate(strides) if not m >> a & 1] for m in range(1 << n)]

    P = pres.ravel().tolist()
    C = cnt.ravel().tolist()
    M = mask.ravel().tolist()
    stack = np.flatnonzero(cnt.ravel() == 1).tolist()
    while stack:
        s = stack.pop()
        if not P[s] or C[s] != 1:
            continue
        tau = -1
        for st in even_st[M[s]]:
            if P[s + st]:
                tau = s + st
                break
            if P[s - st]:
                tau = s - st
                break
        if tau < 0 or C[tau] != 0:
            continue
        P[s] = P[tau] = False
        for st in odd_st[M[tau]]:
            for f in (tau + st, tau - st):
                if f != s:
                    C[f] -= 1
                    if C[f] == 1:
                        stack.append(f)
        for st in odd_st[M[s]]:
            for f in (s + st, s - st):
                C[f] -= 1
                if C[f] == 1:
                    stack.append(f)
    return np.array(P, dtype=bool).reshape(shape), mask


def _gf2_rank(columns: list[int]) -> int:
    """Rank over GF(2) of columns given as integer bitmasks."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            p = pivots.get(low)
            if p is None:
                pivots[low] = col
                rank += 1
                break
            col ^= p
    return rank


def _betti_from_cells(present: np.ndarray, mask: np.ndarray) -> list[int]:
    n = present.ndim
    strides = [prod(present.shape[a + 1:]) for a in range(n)]
    flat_p = present.ravel()
    flat_m = mask.ravel()
    dims = np.zeros(flat_m.shape, dtype=np.int64)
    for a in range(n):
        dims += (flat_m >> a) & 1
    cells = [np.flatnonzero(flat_p & (dims == k)) for k in range(n + 1)]
    counts = [len(c) for c in cells]
    ranks = [0] * (n + 2)
    for k in range(1, n + 1):
        if not counts[k]:
            continue
        index = {v: i for i, v in enumerate(cells[k - 1].tolist())}
        cols = []
        for c, m in zip(cells[k].tolist(), flat_m[cells[k]].tolist()):
            bits = 0
            for a in range(n):
                if m >> a & 1:
                    bits |= (1 << index[c - strides[a]]) | (1 << index[c + strides[a]])
            cols.append(bits)
        ranks[k] = _gf2_rank(cols)
    return [counts[k] - ranks[k] - ranks[k + 1] for k in range(n + 1)]


def betti_numbers(c: CubicalComplex, mmax: int | None = None, collapse: bool = True) -> BettiVector:
    """Mod-2 Betti numbers b_0..b_mmax.

    With ``collapse`` the complex is first shrunk by elementary collapses;
    the remaining boundary matrices are reduced by exact GF(2) elimination.
    """
    top = c.dim if mmax is None else mmax
    if not 0 <= top <= c.dim:
        raise InputError(f"mmax must lie in 0..{c.dim}")
    if c.is_empty():
        return BettiVector((0,) * (top + 1))
    if collapse:
        present, mask = _collapse(c)
    else:
        present, mask = c.present, _axis_mask(c.shape, 0)
    full = _betti_from_cells(present, mask)
    return BettiVector(tuple(full[: top + 1]))


def component_count(g: OccupancyGrid) -> int:
    """Connected components of the occupied cells, cells touching at a corner counted as connected."""
    occ = np.asarray(g.occupied, dtype=bool)
    _, k = ndimage.label(occ, structure=np.ones((3,) * occ.ndim, dtype=bool))
    return int(k)


def complement_component_count(g: OccupancyGrid) -> int:
    """Components of the unoccupied cells of the box, joined only across shared faces.

    The open complement of a closed union of cells connects only through
    (n-1)-faces, hence face adjacency here versus corner adjacency for the set.
    """
    free = ~np.asarray(g.occupied, dtype=bool)
    _, k = ndimage.label(free, structure=ndimage.generate_binary_structure(free.ndim, 1))
    return int(k)


def betti_of_formula(f: Dnf, box: Box, mmax: int | None = None, **kw) -> BettiVector:
    return betti_numbers(build_complex(occupancy_grid(f, box, **kw)), mmax)
