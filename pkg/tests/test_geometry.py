"""Grids, distances, and eigenfunction data on the circle and sphere."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chernoff import (
    EigenIndex,
    InvalidResolution,
    ManifoldSpec,
    PointNotOnManifold,
    ShapeMismatch,
    build_grid,
    chordal_sq,
    double_laplacian_chordal,
    eigenfunction,
    eigenvalue,
    geodesic_distance,
    integrate,
    project_tangent,
    scalar_curvature,
)
from chernoff.geometry import basis_indices, default_cap

CIRCLE = ManifoldSpec("circle", 1.0)
SPHERE = ManifoldSpec("sphere", 1.0)


def test_manifold_spec_properties():
    assert CIRCLE.ambient_dim == 2 and CIRCLE.intrinsic_dim == 1
    assert SPHERE.ambient_dim == 3 and SPHERE.intrinsic_dim == 2
    assert math.isclose(CIRCLE.volume, 2 * math.pi)
    assert math.isclose(SPHERE.volume, 4 * math.pi)
    big = ManifoldSpec("sphere", 2.0)
    assert math.isclose(big.volume, 16 * math.pi)
    # diameter is the chordal one: the largest straight-line separation
    assert math.isclose(big.diameter, 4.0)


def test_manifold_spec_rejects_bad_input():
    with pytest.raises(ValueError):
        ManifoldSpec("torus", 1.0)
    with pytest.raises(ValueError):
        ManifoldSpec("circle", -1.0)


@pytest.mark.parametrize("n", [8, 64, 129])
def test_circle_grid_nodes_and_weights(n):
    grid = build_grid(CIRCLE, n)
    assert grid.n_nodes == n
    radii = np.linalg.norm(grid.nodes, axis=1)
    np.testing.assert_allclose(radii, 1.0, atol=1e-14)
    assert math.isclose(grid.weights.sum(), 2 * math.pi, rel_tol=1e-12)
    assert np.allclose(grid.weights, grid.weights[0])


def test_sphere_grid_weights_sum_to_area():
    grid = build_grid(ManifoldSpec("sphere", 1.5), (16, 32))
    assert grid.n_nodes == 16 * 32
    np.testing.assert_allclose(np.linalg.norm(grid.nodes, axis=1), 1.5, atol=1e-12)
    assert math.isclose(grid.weights.sum(), 4 * math.pi * 1.5**2, rel_tol=1e-12)


@pytest.mark.parametrize("resolution", [4, 7, (4, 32), (16, 7)])
def test_build_grid_rejects_coarse_resolution(resolution):
    spec = SPHERE if isinstance(resolution, tuple) else CIRCLE
    with pytest.raises(InvalidResolution):
        build_grid(spec, resolution)


def test_circle_adjacency_wraps_around():
    grid = build_grid(CIRCLE, 8)
    ia, ib = grid.adjacent_pairs()
    pairs = set(zip(ia.tolist(), ib.tolist()))
    assert (7, 0) in pairs or (0, 7) in pairs
    assert len(pairs) == 8


def test_chordal_sq_matches_direct_norm():
    grid = build_grid(SPHERE, (8, 16))
    p = grid.nodes[3]
    expected = np.sum((grid.nodes - p) ** 2, axis=1)
    np.testing.assert_allclose(chordal_sq(grid.nodes, p), expected, atol=1e-14)


def test_geodesic_distances_on_circle():
    r = 2.0
    spec = ManifoldSpec("circle", r)
    a = np.array([r, 0.0])
    assert math.isclose(geodesic_distance(spec, a, np.array([-r, 0.0])), math.pi * r)
    assert math.isclose(geodesic_distance(spec, a, np.array([0.0, r])), math.pi * r / 2)
    assert geodesic_distance(spec, a, a) == 0.0


def test_geodesic_dominates_chord_on_sphere():
    grid = build_grid(SPHERE, (12, 24))
    p = grid.nodes[0]
    geo = geodesic_distance(SPHERE, grid.nodes, p)
    chord = np.sqrt(chordal_sq(grid.nodes, p))
    assert np.all(geo >= chord - 1e-12)


def test_geodesic_rejects_off_manifold_points():
    with pytest.raises(PointNotOnManifold):
        geodesic_distance(CIRCLE, np.array([2.0, 0.0]), np.array([1.0, 0.0]))


def test_eigen_index_validation():
    with pytest.raises(ValueError):
        EigenIndex.circle(0, "sin")
    with pytest.raises(ValueError):
        EigenIndex.circle(-1)
    with pytest.raises(ValueError):
        EigenIndex.sphere(1, 2)


@pytest.mark.parametrize(
    "spec,idx,expected",
    [
        (CIRCLE, EigenIndex.circle(0), 0.0),
        (CIRCLE, EigenIndex.circle(3), 9.0),
        (ManifoldSpec("circle", 2.0), EigenIndex.circle(3), 9.0 / 4.0),
        (SPHERE, EigenIndex.sphere(2, -1), 6.0),
        (ManifoldSpec("sphere", 0.5), EigenIndex.sphere(1, 0), 8.0),
    ],
)
def test_eigenvalues_are_nonnegative_laplacian_spectrum(spec, idx, expected):
    assert math.isclose(eigenvalue(spec, idx), expected)


@pytest.mark.parametrize(
    "spec,grid_res,cap",
    [
        (CIRCLE, 64, 5),
        (ManifoldSpec("circle", 3.0), 64, 5),
        (SPHERE, (24, 48), 4),
        (ManifoldSpec("sphere", 2.0), (24, 48), 4),
    ],
)
def test_eigenfunctions_are_orthonormal(spec, grid_res, cap):
    grid = build_grid(spec, grid_res)
    basis = np.stack([eigenfunction(spec, idx, grid.nodes) for idx in basis_indices(spec, cap)])
    gram = (basis * grid.weights) @ basis.T
    np.testing.assert_allclose(gram, np.eye(len(basis)), atol=1e-10)


def test_curvature_and_chordal_laplacian_constants():
    assert scalar_curvature(CIRCLE) == 0.0
    assert math.isclose(scalar_curvature(SPHERE), 2.0)
    assert math.isclose(scalar_curvature(ManifoldSpec("sphere", 2.0)), 0.5)
    assert math.isclose(double_laplacian_chordal(CIRCLE), -2.0)
    assert math.isclose(double_laplacian_chordal(ManifoldSpec("circle", 2.0)), -0.5)
    assert math.isclose(double_laplacian_chordal(SPHERE), -8.0)


def test_project_tangent_kills_radial_directions():
    base = np.array([0.0, 0.0, 1.0])
    radial = project_tangent(SPHERE, base, 5.0 * base)
    np.testing.assert_allclose(radial, 0.0, atol=1e-14)
    v = np.array([1.0, 2.0, 0.0])
    np.testing.assert_allclose(project_tangent(SPHERE, base, v), v, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(
    theta=st.floats(0, 2 * math.pi, allow_nan=False),
    vx=st.floats(-5, 5),
    vy=st.floats(-5, 5),
)
def test_tangent_projection_is_idempotent_and_orthogonal(theta, vx, vy):
    base = np.array([math.cos(theta), math.sin(theta)])
    v = np.array([vx, vy])
    p = project_tangent(CIRCLE, base, v)
    np.testing.assert_allclose(project_tangent(CIRCLE, base, p), p, atol=1e-12)
    assert abs(np.dot(p, base)) < 1e-12


def test_integrate_closed_forms():
    grid = build_grid(CIRCLE, 128)
    theta = grid.angles()
    assert math.isclose(integrate(grid, np.cos(theta) ** 2), math.pi, rel_tol=1e-12)
    sphere_grid = build_grid(SPHERE, (16, 32))
    z = sphere_grid.nodes[:, 2]
    assert math.isclose(integrate(sphere_grid, z**2), 4 * math.pi / 3, rel_tol=1e-10)


def test_integrate_rejects_wrong_length():
    grid = build_grid(CIRCLE, 16)
    with pytest.raises(ShapeMismatch):
        integrate(grid, np.ones(17))


def test_default_cap_tracks_resolution():
    assert default_cap(build_grid(CIRCLE, 64)) == 16
    assert default_cap(build_grid(SPHERE, (16, 32))) == 7
