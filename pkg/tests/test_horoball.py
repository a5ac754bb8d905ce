"""Combinatorial horoball distances against the BFS oracle."""

import math
import random

import pytest

from coarse_teich.horoball import (
    HoroPoint,
    compare_to_horodisk,
    horo_distance,
    horo_distance_bfs,
    horo_distances_from,
    horo_normal_path,
    width,
)


def test_width_values():
    assert [width(m) for m in range(7)] == [1, 2, 7, 20, 54, 148, 403]


def test_horo_distance_example():
    # apex level 2: up 2, across ceil(10/7) = 2, down 2
    assert horo_distance(HoroPoint(0, 0), HoroPoint(10, 0)) == 6


def test_horo_distance_basics():
    assert horo_distance(HoroPoint(3, 2), HoroPoint(3, 2)) == 0
    assert horo_distance(HoroPoint(0, 0), HoroPoint(0, 5)) == 5
    assert horo_distance(HoroPoint(0, 3), HoroPoint(1, 3)) == 1
    assert horo_distance(HoroPoint(0, 0), HoroPoint(1, 0)) == 1
    # symmetry
    rng = random.Random(3)
    for _ in range(200):
        u = HoroPoint(rng.randint(-40, 40), rng.randint(0, 5))
        v = HoroPoint(rng.randint(-40, 40), rng.randint(0, 5))
        assert horo_distance(u, v) == horo_distance(v, u)


def test_horo_distance_matches_bfs():
    rng = random.Random(5)
    for _ in range(60):
        u = HoroPoint(rng.randint(-25, 25), rng.randint(0, 4))
        v = HoroPoint(rng.randint(-25, 25), rng.randint(0, 4))
        assert horo_distance(u, v) == horo_distance_bfs(u, v)


def test_horo_distance_triangle_inequality():
    rng = random.Random(7)
    for _ in range(300):
        pts = [
            HoroPoint(rng.randint(-60, 60), rng.randint(0, 6)) for _ in range(3)
        ]
        a, b, c = pts
        assert horo_distance(a, b) <= horo_distance(a, c) + horo_distance(c, b)


def test_horo_distance_log_growth():
    # level-0 pairs grow like 2 ln(gap) within +-6 once gap >= 3
    for gap in [3, 10, 100, 1000, 10**6, 10**9]:
        d = horo_distance(HoroPoint(0, 0), HoroPoint(gap, 0))
        assert 2 * math.log(gap) - 6 <= d <= 2 * math.log(gap) + 6, (gap, d)


def test_horo_normal_path_is_geodesic():
    rng = random.Random(11)
    for _ in range(150):
        u = HoroPoint(rng.randint(-200, 200), rng.randint(0, 6))
        v = HoroPoint(rng.randint(-200, 200), rng.randint(0, 6))
        path = horo_normal_path(u, v)
        assert path[0] == u and path[-1] == v
        assert len(path) - 1 == horo_distance(u, v)
        for a, b in zip(path, path[1:]):
            if a.level == b.level:
                assert 0 < abs(a.x - b.x) <= width(a.level)
            else:
                assert a.x == b.x and abs(a.level - b.level) == 1


def test_single_source_oracle_consistency():
    src = HoroPoint(0, 0)
    table = horo_distances_from(src, -30, 30, 8)
    for v, d in table.items():
        if abs(v.x) <= 20 and v.level <= 3:
            assert d == horo_distance(src, v), v


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        HoroPoint(0, -1)


def test_compare_to_horodisk_small_grid():
    report = compare_to_horodisk(40, 5)
    assert report.max_mult <= 4.0
    assert report.max_add <= 8.0
    assert report.pairs > 0
