import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccworkbench.errors import CoincidentPoints, NotRealizable, WrongRank
from ccworkbench.geometry import (
    Configuration,
    MassVector,
    SquaredDistanceMatrix,
    barycentric_coordinates,
    cayley_menger,
    center_of_mass,
    embed,
    gauge_fix,
    oriented_volumes,
    point_flat_distance,
    realizability_residual,
    squared_distances,
)

from .conftest import UNIT_SQUARE

TETRA = np.array([
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.5, math.sqrt(3) / 2, 0.0],
    [0.5, math.sqrt(3) / 6, math.sqrt(2.0 / 3.0)],
])


def test_mass_vector_validation():
    assert MassVector([1, 2, 3]).total == 6
    with pytest.raises(ValueError):
        MassVector([1, 0, 1])
    with pytest.raises(ValueError):
        MassVector([1, 2])


def test_square_distances():
    s = squared_distances(UNIT_SQUARE).entries
    assert s[0, 1] == s[2, 3] == 2
    assert s[0, 2] == s[0, 3] == s[1, 2] == s[1, 3] == 1


def test_equilateral_distances():
    tri = TETRA[:3, :2]
    np.testing.assert_allclose(squared_distances(tri).entries, 1 - np.eye(3), atol=1e-15)


def test_coincident_points():
    with pytest.raises(CoincidentPoints):
        squared_distances([[0, 0], [1, 0], [0, 0]])


def test_distance_matrix_rejects_zero_off_diagonal():
    with pytest.raises(CoincidentPoints):
        SquaredDistanceMatrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]])


def test_center_of_mass():
    np.testing.assert_allclose(center_of_mass(UNIT_SQUARE, [1, 1, 1, 1]), [0.5, 0.5])
    assert center_of_mass([[0.0], [4.0], [4.0]], [1, 1.5, 1.5])[0] == pytest.approx(3.0)
    p = [[2.0, -1.0]] * 3
    np.testing.assert_allclose(center_of_mass(p, [1, 2, 3]), [2.0, -1.0])


def test_cayley_menger_values():
    assert abs(cayley_menger(squared_distances(UNIT_SQUARE))) < 1e-12
    # 288 V^2 with V^2 = 1/72
    assert abs(cayley_menger(squared_distances(TETRA))) == pytest.approx(4.0, rel=1e-12)
    line = squared_distances([[0, 0], [1, 0], [3, 0], [0, 1]])
    assert abs(cayley_menger(line, [0, 1, 2])) < 1e-12


def test_embed_round_trip():
    s = squared_distances(UNIT_SQUARE)
    q = embed(s, 2)
    np.testing.assert_allclose(squared_distances(q).entries, s.entries, atol=1e-12)


def test_embed_rejects_tetrahedron_in_plane():
    with pytest.raises(NotRealizable):
        embed(squared_distances(TETRA), 2)


def test_embed_rejects_inflated_diagonal():
    s = squared_distances(UNIT_SQUARE).entries.copy()
    s[0, 1] = s[1, 0] = 2.2
    # oracle: the centered Gram matrix has a clearly negative eigenvalue
    n = 4
    j = np.eye(n) - 1.0 / n
    assert np.linalg.eigvalsh(-0.5 * j @ s @ j).min() < -1e-3
    with pytest.raises(NotRealizable):
        embed(s, 2)
    assert realizability_residual(s, 2) > 1e-3


def test_barycentric_square():
    d = barycentric_coordinates(UNIT_SQUARE)
    np.testing.assert_allclose(d / d[2], [-1, -1, 1, 1], atol=1e-12)
    assert np.allclose(d @ UNIT_SQUARE, 0, atol=1e-12)


def test_barycentric_centroid():
    q = np.vstack([TETRA[:3, :2], TETRA[:3, :2].mean(axis=0)])
    d = barycentric_coordinates(q)
    np.testing.assert_allclose(d / d[0], [1, 1, 1, -3], atol=1e-12)


def test_barycentric_collinear():
    with pytest.raises(WrongRank):
        barycentric_coordinates([[0, 0], [1, 0], [2, 0], [5, 0]])


def test_oriented_volumes_square():
    ov = oriented_volumes(UNIT_SQUARE)
    np.testing.assert_allclose(np.abs(ov.values), 0.5)


def test_oriented_volumes_interior_point_flips_sign():
    convex = oriented_volumes(UNIT_SQUARE)
    inner = UNIT_SQUARE.copy()
    inner[0] = [0.6, 0.4]  # inside triangle q2 q3 q4
    nonconvex = oriented_volumes(inner)
    assert np.sign(nonconvex.deltas[0]) != np.sign(nonconvex.deltas[1])
    assert np.sign(convex.deltas[0]) == np.sign(convex.deltas[1])


def test_oriented_volumes_proportional_to_barycentric():
    rng = np.random.default_rng(3)
    q = rng.standard_normal((4, 2))
    ov = oriented_volumes(q)
    ray = barycentric_coordinates(q)
    kappa = ov.deltas @ ray / (ray @ ray)
    np.testing.assert_allclose(ov.deltas, kappa * ray, atol=1e-12)


def test_point_flat_distance():
    assert point_flat_distance([0.0, 3.0], [[-1.0, 0.0], [2.0, 0.0]]) == pytest.approx(3.0)
    assert point_flat_distance([1, 1, 2.0], [[0, 0, 0], [1, 0, 0], [0, 1, 0.0]]) == pytest.approx(2.0)


def test_gauge_fix_is_isometry():
    rng = np.random.default_rng(5)
    q = rng.standard_normal((5, 3))
    g = gauge_fix(q)
    np.testing.assert_allclose(squared_distances(g).entries, squared_distances(q).entries, atol=1e-12)


points4 = st.lists(
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=4, max_size=4
).filter(lambda p: min(
    (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 for i, a in enumerate(p) for b in p[i + 1:]
) > 1e-2)


@settings(max_examples=60, deadline=None)
@given(points4, st.floats(0, 2 * math.pi), st.floats(-3, 3), st.floats(-3, 3))
def test_distances_isometry_invariant(pts, theta, tx, ty):
    q = np.array(pts)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    q2 = q @ rot.T + [tx, ty]
    s1, s2 = squared_distances(q).entries, squared_distances(q2).entries
    np.testing.assert_allclose(s1, s2, atol=1e-9 * (1 + s1.max()))


@settings(max_examples=60, deadline=None)
@given(points4)
def test_embed_round_trip_property(pts):
    q = np.array(pts)
    s = squared_distances(q)
    back = squared_distances(embed(s, 2, tol=1e-6))
    np.testing.assert_allclose(back.entries, s.entries, atol=1e-8 * (1 + s.entries.max()))


def test_configuration_dim():
    c = Configuration(TETRA)
    assert (c.n, c.dim) == (4, 3)
