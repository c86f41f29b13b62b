import math

import numpy as np
import pytest

from qhgeo.errors import InvalidParameterError
from qhgeo.qh import node_geodesic
from qhgeo.uniformization import (
    band_check,
    deform,
    deformed_distance,
    deformed_qh,
    geodesic_cone_eps,
    image_solidness,
    uniformity_of_deformation,
)


@pytest.fixture(scope="module")
def ds(square16):
    return deform(square16, epsilon=0.2)


def test_density_and_weights(ds, square16):
    assert ds.rho[ds.w_index] == 1.0
    assert np.all((ds.rho > 0) & (ds.rho <= 1))
    assert np.allclose(ds.rho, np.exp(-0.2 * ds.k_from_w))
    assert np.all(ds.edge_weights_eps <= square16.w * (1 + 1e-12))
    assert np.all(ds.boundary_distance_eps > 0)
    assert np.allclose(ds.w, (0.5, 0.5), atol=square16.h0)


def test_deformed_metric_is_bounded(ds):
    assert np.max(ds.dgraph.distances(ds.w_index)) <= 1 / ds.epsilon
    assert deformed_distance(ds, (0.2, 0.2), (0.8, 0.7)) > 0
    assert deformed_distance(ds, (0.2, 0.2), (0.8, 0.7)) == deformed_distance(ds, (0.8, 0.7), (0.2, 0.2))
    assert deformed_qh(ds, (0.3, 0.3), (0.3, 0.3)) == 0.0


def test_band_check(ds):
    b = band_check(ds, pairs=40, seed=1)
    assert b.band_upper_ok
    assert b.diam_eps <= 2 / ds.epsilon * 1.05
    assert 0 < b.c0_empirical <= b.ratio_max
    assert b.M_empirical >= 1
    assert b == band_check(ds, pairs=40, seed=1)


def test_uniformity_and_solidness(ds, square16):
    assert 1.0 <= uniformity_of_deformation(ds, 10, 0) < 3.0
    geo = node_geodesic(ds.dgraph, ds.w_index, int(np.argmin(ds.boundary_distance_eps)))
    assert geodesic_cone_eps(ds, geo) > 0
    base = node_geodesic(square16, 0, square16.n_nodes - 1)
    assert image_solidness(ds, base, 0.0).nu >= 1.0


def test_attached_base_point(square16):
    ds = deform(square16, w=(0.4123, 0.5), epsilon=0.1)
    assert ds.w == (0.4123, 0.5)
    assert ds.k_from_w[ds.w_index] == 0.0


@pytest.mark.parametrize("eps", [0.0, 1.5, -0.1])
def test_invalid_epsilon(square16, eps):
    with pytest.raises(InvalidParameterError):
        deform(square16, epsilon=eps)
