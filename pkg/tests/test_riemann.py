import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import SymbolicCurvature
from warpfield.charts import euclidean, hyperbolic_halfspace, round_sphere
from warpfield.errors import DomainError, SPDError
from warpfield.expr import Const, Coord, cos, exp, sin, tanh
from warpfield.grids import random_points
from warpfield.riemann import (MetricField, PointGeometry, christoffel, covariant_hessian,
                               curvature_sample, gradient_and_laplacian, scalar_curvature)

r = Coord(0)
POLAR = MetricField.diagonal([1.0, r * r], [(0, math.inf), (0, 2 * math.pi)])
CIGAR = MetricField.diagonal([1.0, tanh(r) ** 2], [(0, math.inf), (0, 2 * math.pi)])


def test_euclidean_christoffel_and_curvature_vanish():
    s = curvature_sample(euclidean(3), [0.2, -1.0, 4.0])
    assert not s.christoffel.any()
    assert not s.riemann.any()
    assert s.scalar == 0.0


def test_polar_christoffel():
    G = christoffel(POLAR, [2.0, 1.0])
    assert G[0, 1, 1] == pytest.approx(-2.0, abs=1e-15)
    assert G[1, 0, 1] == pytest.approx(0.5, abs=1e-15)
    assert G[1, 1, 0] == pytest.approx(0.5, abs=1e-15)
    mask = np.ones_like(G, dtype=bool)
    mask[0, 1, 1] = mask[1, 0, 1] = mask[1, 1, 0] = False
    assert np.all(G[mask] == 0.0)


def test_adapted_chart_christoffel_structure():
    # dr^2 + g_ij(r, th) with a generic r-dependent slice block
    th = Coord(1)
    g = MetricField.from_matrix(
        [[1.0, 0.0, 0.0],
         [0.0, exp(r) * (2 + sin(th)), 0.1 * r * cos(th)],
         [0.0, 0.1 * r * cos(th), (1 + r * r) * (2 + cos(th))]],
        [(-2, 2), (-2, 2), (-2, 2)])
    p = np.array([0.4, 0.7, -0.3])
    geo = PointGeometry(g, p)
    G = geo.gamma
    assert G[0, 0, 0] == 0.0
    assert np.allclose(G[0, 0, 1:], 0.0, atol=1e-15)
    np.testing.assert_allclose(G[0, 1:, 1:], -0.5 * geo.dg[0, 1:, 1:], atol=1e-14)


def test_hyperbolic_plane_scalar():
    assert scalar_curvature(hyperbolic_halfspace(2), [0.0, 1.0]) == pytest.approx(-2.0, abs=1e-12)


@pytest.mark.parametrize("rv", [0.5, 1.0, 2.0, 4.0])
def test_cigar_scalar(rv):
    assert scalar_curvature(CIGAR, [rv, 1.0]) == pytest.approx(4 / math.cosh(rv) ** 2, abs=1e-8)


def test_cigar_scalar_at_one():
    assert scalar_curvature(CIGAR, [1.0, 1.0]) == pytest.approx(1.679897, abs=1e-6)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_round_sphere_scalar(k):
    sphere = round_sphere(k)
    for p in random_points(sphere.window(), 10, seed=k):
        assert scalar_curvature(sphere, p) == pytest.approx(k * (k - 1), abs=1e-8)


def test_sphere_radius_scaling():
    assert scalar_curvature(round_sphere(3, radius=2.0), [1.0, 1.0, 1.0]) == pytest.approx(6 / 4, abs=1e-12)


def test_hessian_examples():
    x = [Coord(i) for i in range(3)]
    h = (x[0] ** 2 + x[1] ** 2 + x[2] ** 2) / 2
    np.testing.assert_allclose(covariant_hessian(euclidean(3), h, [0.3, 0.1, -2]), np.eye(3), atol=1e-15)
    H = covariant_hessian(POLAR, -r * r / 2, [2.0, 0.5])
    np.testing.assert_allclose(H, np.diag([-1.0, -4.0]), atol=1e-14)
    assert not covariant_hessian(CIGAR, Const(3.0), [1.0, 1.0]).any()


def test_gradient_laplacian_examples():
    grad, n2, lap = gradient_and_laplacian(euclidean(2), Coord(0), [1.0, 2.0])
    np.testing.assert_array_equal(grad, [1.0, 0.0])
    assert (n2, lap) == (1.0, 0.0)
    _, _, lap = gradient_and_laplacian(POLAR, r, [2.0, 1.0])
    assert lap == pytest.approx(0.5, abs=1e-15)
    _, n2, _ = gradient_and_laplacian(hyperbolic_halfspace(3), 1 / Coord(2), [0.0, 0.0, 1.0])
    assert n2 == pytest.approx(1.0, abs=1e-15)


def test_spd_and_domain_errors():
    bad = MetricField.diagonal([1.0, Coord(0)], [(-1, 1), (-1, 1)])
    with pytest.raises(SPDError):
        PointGeometry(bad, [-0.5, 0.0])
    with pytest.raises(DomainError):
        PointGeometry(POLAR, [-1.0, 1.0])


# ---- generic metrics against the symbolic oracle ----------------------------

def _generic_metric(a, b, c):
    x, y, z = Coord(0), Coord(1), Coord(2)
    return MetricField.from_matrix(
        [[2 + sin(a * x + y), 0.3 * cos(z), 0.2 * x * y],
         [0.3 * cos(z), 3 + b * x * x, 0.1 * sin(x * z)],
         [0.2 * x * y, 0.1 * sin(x * z), exp(c * y)]],
        [(-1, 1)] * 3)


_METRIC = _generic_metric(1.3, 0.7, 0.4)
_ORACLE = SymbolicCurvature(_METRIC)
pts = st.tuples(*[st.floats(-0.9, 0.9)] * 3).map(np.array)


@settings(max_examples=30, deadline=None)
@given(pts)
def test_generic_metric_matches_symbolic_oracle(p):
    geo = PointGeometry(_METRIC, p)
    np.testing.assert_allclose(geo.gamma, _ORACLE.christoffel_at(p), atol=1e-12)
    lowered = np.einsum("in,nklm->iklm", geo.g, geo.riemann)
    np.testing.assert_allclose(lowered, _ORACLE.riemann_lower_at(p), atol=1e-10)
    assert geo.scalar == pytest.approx(_ORACLE.scalar_at(p), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(pts)
def test_curvature_symmetries(p):
    geo = PointGeometry(_METRIC, p)
    G, Rm = geo.gamma, geo.riemann
    np.testing.assert_allclose(G, G.transpose(0, 2, 1), atol=1e-15)
    bianchi = Rm + Rm.transpose(0, 2, 3, 1) + Rm.transpose(0, 3, 1, 2)
    assert np.abs(bianchi).max() < 1e-8
    low = geo.riemann_lower()
    np.testing.assert_allclose(low, -low.transpose(1, 0, 2, 3), atol=1e-10)
    np.testing.assert_allclose(low, -low.transpose(0, 1, 3, 2), atol=1e-10)
    np.testing.assert_allclose(low, low.transpose(2, 3, 0, 1), atol=1e-10)
    ric = np.einsum("lilk->ik", Rm)
    assert np.abs(ric - ric.T).max() <= 1e-9 * max(1.0, np.abs(ric).max())
    assert geo.scalar == pytest.approx(float(np.einsum("ik,ik->", geo.ginv, geo.ricci)), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(pts)
def test_metric_compatibility(p):
    geo = PointGeometry(_METRIC, p)
    # d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il = 0
    lhs = geo.dg - np.einsum("lki,lj->kij", geo.gamma, geo.g) - np.einsum("lkj,il->kij", geo.gamma, geo.g)
    assert np.abs(lhs).max() < 1e-8


@settings(max_examples=40, deadline=None)
@given(pts)
def test_hessian_symmetric(p):
    h = sin(Coord(0) * Coord(1)) + exp(Coord(2)) * Coord(0)
    H = PointGeometry(_METRIC, p).hessian(h)
    assert np.abs(H - H.T).max() <= 1e-10


def test_scalar_gradient_by_differences():
    geo = PointGeometry(CIGAR, [1.0, 1.0])
    exact = -8 * math.tanh(1.0) / math.cosh(1.0) ** 2
    assert geo.scalar_gradient()[0] == pytest.approx(exact, rel=1e-6)
    assert abs(geo.scalar_gradient()[1]) < 1e-9


def test_sample_json_shape():
    doc = curvature_sample(POLAR, [2.0, 1.0], with_scalar_gradient=True).to_json()
    assert set(doc) == {"point", "christoffel", "riemann", "ricci", "scalar", "scalar_gradient"}
    assert np.array(doc["riemann"]).shape == (2, 2, 2, 2)
