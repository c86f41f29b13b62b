import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhgeo.errors import InvalidParameterError
from qhgeo.geometry import Polyline
from qhgeo.qh import (
    coarse_qh_length,
    greedy_walks,
    kmatrix,
    length_space_upper_bound,
    lower_bounds,
    node_geodesic,
    qh_distance,
    qh_geodesic,
    qh_length,
    qh_query,
    quasigeodesic_check,
    sample_interior_points,
    sample_node_pairs,
    solidness,
    solidness_from_matrix,
    subarc_coarse_lengths,
)

APOTHEM = math.cos(math.pi / 512)


def test_closed_form_bounds():
    a, b = lower_bounds((0, 0), (0.5, 0), 1.0, 0.5)
    assert a == pytest.approx(math.log(2.0)) and b == pytest.approx(math.log(2.0))
    assert length_space_upper_bound((0, 0), (0.5, 0), 1.0) == pytest.approx(1.0)
    assert length_space_upper_bound((0, 0), (1.5, 0), 1.0) == math.inf


def test_radial_distance_matches_integral(disk32):
    t = math.pi / 512
    y = (0.9 * math.cos(t), 0.9 * math.sin(t))
    exact = math.log(APOTHEM / (APOTHEM - 0.9))
    assert qh_distance(disk32, (0, 0), y) == pytest.approx(exact, rel=1e-2)
    assert qh_distance(disk32, (0, 0), (0.5, 0)) == pytest.approx(math.log(2.0), rel=1e-3)


def test_symmetry_is_exact(disk16):
    x, y = (0.123, -0.456), (-0.3, 0.61)
    assert qh_distance(disk16, x, y) == qh_distance(disk16, y, x)
    assert qh_distance(disk16, x, x) == 0.0


pts = st.tuples(st.floats(0.05, 0.95), st.floats(0.05, 0.95))


@given(pts, pts)
@settings(max_examples=20, deadline=None)
def test_lower_bounds_hold(square16, x, y):
    d = square16.domain.distance([x, y])
    k = qh_distance(square16, x, y)
    assert k >= max(lower_bounds(x, y, d[0], d[1])) - 1e-6


def test_triangle_inequality_on_nodes(square16):
    rng = np.random.default_rng(3)
    nodes = rng.choice(square16.n_nodes, 12, replace=False)
    K = kmatrix(square16, nodes)
    via = (K[:, :, None] + K[None, :, :]).min(axis=1)
    assert np.all(K <= via + 1e-12)
    assert np.allclose(K, K.T)


def test_query_reports_snap(disk16):
    q = qh_query(disk16, (0, 0), (0.33, 0.01))
    assert q.value > 0 and not q.flagged
    assert q.snap[0] == 0.0 and q.snap[1] > 0


def test_geodesic_consistency(disk16):
    g = qh_geodesic(disk16, (-0.5, 0.2), (0.6, -0.3))
    assert g.k_length == pytest.approx(qh_distance(disk16, (-0.5, 0.2), (0.6, -0.3)), rel=1e-12)
    assert np.all(np.diff(g.cumulative) > 0)
    assert g.cumulative[-1] == pytest.approx(g.k_length)
    m = len(g.nodes) // 2
    assert g.k_between(0, m) + g.k_between(m, len(g.nodes) - 1) == pytest.approx(g.k_length)
    r = g.reversed()
    assert np.array_equal(r.nodes, g.nodes[::-1])


def test_geodesic_node_path_agrees_with_distance(square16):
    i, j = sample_node_pairs(square16, 1, 5)[0]
    geo = node_geodesic(square16, int(i), int(j))
    assert geo.k_length == pytest.approx(square16.distance(int(i), int(j)))
    lk = qh_length(square16.domain, geo.path)
    assert lk == pytest.approx(geo.k_length, rel=1e-4)


def test_sample_interior_points_deterministic(slit_disk):
    a = sample_interior_points(slit_disk, 50, 7)
    b = sample_interior_points(slit_disk, 50, 7)
    assert np.array_equal(a, b)
    assert all(slit_disk.is_interior(p) for p in a)
    assert not np.array_equal(a, sample_interior_points(slit_disk, 50, 8))


def line_metric(pos):
    p = np.asarray(pos, dtype=float)
    return np.abs(p[:, None] - p[None, :])


def test_coarse_length_on_a_line():
    K = line_metric([0, 0.3, 0.9, 1.4, 2.0])
    C = subarc_coarse_lengths(K, 0.0)
    assert C[0, -1] == pytest.approx(2.0)
    # h = 0.6 forces gaps of at least 0.6: 0 -> 0.9 -> 2.0 from the first sample
    assert subarc_coarse_lengths(K, 0.6)[0, -1] == pytest.approx(2.0)
    assert subarc_coarse_lengths(K, 5.0)[0, -1] == 0.0
    W = greedy_walks(K, 0.0)
    assert np.allclose(np.tril(W, -1), 0.0)


def test_solidness_detects_backtracking():
    pos = [0, 1, 2, 1, 0]
    K = line_metric(pos)
    s = np.arange(5.0)
    pts = np.column_stack([s, np.zeros(5)])
    rep = solidness_from_matrix(s, pts, K, 0.0)
    assert rep.nu == pytest.approx(3.0)
    assert solidness_from_matrix(s, pts, line_metric(s), 0.0).nu == pytest.approx(1.0)


@pytest.mark.parametrize("h", [0.0, 0.5, 1.0])
def test_geodesic_is_solid(disk16, h):
    geo = qh_geodesic(disk16, (-0.7, 0.1), (0.8, 0.2))
    assert solidness(disk16, geo, h).nu == pytest.approx(1.0, abs=0.05)


def test_coarse_length_of_geodesic(disk16):
    geo = qh_geodesic(disk16, (-0.7, 0.1), (0.8, 0.2))
    assert coarse_qh_length(disk16, geo, 0.0) == pytest.approx(geo.k_length, rel=1e-9)
    with pytest.raises(InvalidParameterError):
        coarse_qh_length(disk16, geo, -1.0)


def test_quasigeodesic_check(disk16):
    geo = qh_geodesic(disk16, (-0.6, 0.0), (0.6, 0.0))
    assert quasigeodesic_check(disk16, geo, 1.0, 0.0).ok
    detour = Polyline([(-0.6, 0.0), (0.0, 0.9), (0.6, 0.0)])
    rep = quasigeodesic_check(disk16, detour, 1.0, 0.0)
    assert not rep.ok and rep.ratio > 1.5
    with pytest.raises(InvalidParameterError):
        quasigeodesic_check(disk16, geo, 0.5, 0.0)
