import random
from fractions import Fraction as F

import numpy as np
import pytest

from acttopo.errors import InputError, ResourceLimitError
from acttopo.poly import variables
from acttopo.semialg import BasicSet, Dnf, Sign, SignCondition
from acttopo.topology import (
    Box, OccupancyGrid, betti_numbers, build_complex, complement_component_count, component_count,
    occupancy_grid,
)


def closed(n, *cs):
    return Dnf(n, (BasicSet(n, tuple(SignCondition(p, s) for p, s in cs)),))


def grid_of(cells, shape):
    occ = np.zeros(shape, dtype=bool)
    for c in cells:
        occ[c] = True
    return OccupancyGrid(Box.cube(0, shape[0], len(shape), shape[0]), occ)


def test_disk_center_sampling():
    x, y = variables(2)
    g = occupancy_grid(closed(2, (x * x + y * y - 1, Sign.LE)), Box.cube(-2, 2, 2, 4))
    assert sorted(map(tuple, np.argwhere(g.occupied))) == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_false_formula_empty():
    g = occupancy_grid(Dnf(2), Box.cube(-1, 1, 2, 5))
    assert g.count() == 0
    cx = build_complex(g)
    assert cx.is_empty() and cx.cell_counts() == [0, 0, 0]
    assert betti_numbers(cx).b == (0, 0, 0)


def test_halfline():
    (x,) = variables(1)
    g = occupancy_grid(closed(1, (x, Sign.GE)), Box.cube(-1, 1, 1, 4))
    assert list(np.flatnonzero(g.occupied)) == [2, 3]


def test_strict_sign_rejected():
    (x,) = variables(1)
    with pytest.raises(InputError):
        occupancy_grid(closed(1, (x, Sign.GT)), Box.cube(-1, 1, 1, 4))
    with pytest.raises(InputError):
        occupancy_grid(closed(1, (x, Sign.GE)), Box.cube(-1, 1, 2, 4))


def test_cell_limit():
    with pytest.raises(ResourceLimitError):
        occupancy_grid(Dnf(2), Box.cube(-1, 1, 2, 100), cell_limit=1000)


def test_box_validation():
    with pytest.raises(InputError):
        Box((F(1),), (F(0),), 3)
    with pytest.raises(InputError):
        Box.parse("0:1,2", 4)
    assert Box.parse("-1/2:1/2,0:3", 6).lo == (F(-1, 2), F(0))


def test_corner_mode_thickens():
    x, y = variables(2)
    f = closed(2, (x, Sign.EQ))  # the line x = 0 lies on cell boundaries
    box = Box.cube(-2, 2, 2, 4)
    assert occupancy_grid(f, box).count() == 0
    assert occupancy_grid(f, box, corner_mode=True).count() == 8


def test_single_square_cells():
    cx = build_complex(grid_of([(1, 1)], (3, 3)))
    assert cx.cell_counts() == [4, 4, 1]


def test_diagonal_squares():
    g = grid_of([(0, 0), (1, 1)], (2, 2))
    cx = build_complex(g)
    assert cx.cell_counts() == [7, 8, 2]
    assert component_count(g) == 1 == betti_numbers(cx)[0]


def test_two_separated_squares():
    g = grid_of([(0, 0), (2, 2)], (3, 3))
    assert component_count(g) == 2
    assert betti_numbers(build_complex(g)).b == (2, 0, 0)


def test_betti_filled_and_ring():
    full = grid_of([(i, j) for i in range(3) for j in range(3)], (3, 3))
    assert betti_numbers(build_complex(full), 1).b == (1, 0)
    ring = grid_of([(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)], (3, 3))
    assert betti_numbers(build_complex(ring), 1).b == (1, 1)


def test_known_spaces_3d():
    X, Y, Z = variables(3)
    r2 = X * X + Y * Y + Z * Z
    box = Box.cube(-2, 2, 3, 24)
    ball = closed(3, (r2 - 1, Sign.LE))
    assert betti_numbers(build_complex(occupancy_grid(ball, box), check=True)).b == (1, 0, 0, 0)
    two = Dnf(3, (
        BasicSet(3, (SignCondition((X - 1) ** 2 + Y * Y + Z * Z - F(1, 2), Sign.LE),)),
        BasicSet(3, (SignCondition((X + 1) ** 2 + Y * Y + Z * Z - F(1, 2), Sign.LE),)),
    ))
    assert betti_numbers(build_complex(occupancy_grid(two, box), check=True)).b == (2, 0, 0, 0)
    # thickened unit circle in the plane z = 0
    tube = closed(3, ((X * X + Y * Y - 1) ** 2 + Z * Z - F(1, 25), Sign.LE))
    assert betti_numbers(build_complex(occupancy_grid(tube, box), check=True), 2).b == (1, 1, 0)


def test_annulus_2d():
    x, y = variables(2)
    f = closed(2, (x * x + y * y - 4, Sign.LE), (1 - x * x - y * y, Sign.LE))
    assert betti_numbers(build_complex(occupancy_grid(f, Box.cube(-3, 3, 2, 40)))).b == (1, 1, 0)


def test_collapse_agrees_with_plain_elimination():
    rng = np.random.default_rng(7)
    for shape in ((6, 6), (4, 4, 4)):
        for _ in range(5):
            g = OccupancyGrid(Box.cube(0, 1, len(shape), shape[0]), rng.random(shape) < 0.5)
            cx = build_complex(g)
            assert cx.check_boundary()
            a = betti_numbers(cx)
            b = betti_numbers(cx, collapse=False)
            assert a == b
            assert sum((-1) ** k * v for k, v in enumerate(a)) == cx.euler_characteristic()


def test_b0_matches_union_find_on_random_grids():
    rng = np.random.default_rng(11)
    for i in range(50):
        shape = (12, 12) if i % 2 else (6, 6, 6)
        g = OccupancyGrid(Box.cube(0, 1, len(shape), shape[0]), rng.random(shape) < 0.4)
        assert betti_numbers(build_complex(g), 0)[0] == component_count(g)


def test_complement_components():
    ring = grid_of([(i, j) for i in range(1, 4) for j in range(1, 4) if (i, j) != (2, 2)], (5, 5))
    assert complement_component_count(ring) == 2
    # diagonal contact blocks face-connected passage
    diag = grid_of([(0, 1), (1, 0)], (2, 2))
    assert complement_component_count(diag) == 2


def test_large_coordinates_use_exact_path():
    (x,) = variables(1)
    big = F(10**30)
    f = closed(1, ((x - big) ** 2 - 1, Sign.LE))
    g = occupancy_grid(f, Box((big - 2,), (big + 2,), 8))
    assert list(np.flatnonzero(g.occupied)) == [2, 3, 4, 5]


def test_mmax_bounds():
    g = grid_of([(0, 0)], (2, 2))
    with pytest.raises(InputError):
        betti_numbers(build_complex(g), 3)
