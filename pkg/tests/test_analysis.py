
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccworkbench.analysis import (
    analysis_report,
    convexity_class,
    opposite_products,
    ordering_report,
    product_relation_residual,
    routh_residual,
    symmetry_report,
)
from ccworkbench.dziobek import solution_from_positions, solve_normalized
from ccworkbench.geometry import oriented_volumes


@pytest.fixture(scope="module")
def sol_1123():
    return solve_normalized([1, 1, 2, 3], -1.5, "--++")


@pytest.fixture(scope="module")
def sol_1211():
    return solve_normalized([1, 2, 1, 1], -1.5, "--++")


def test_symmetry_equal_first_pair(sol_1123):
    rep = symmetry_report(sol_1123)
    assert rep[0].symmetric
    assert abs(sol_1123.s[0, 2] - sol_1123.s[1, 2]) < 1e-9
    assert not rep[1].symmetric


def test_symmetry_equal_second_pair(sol_1211):
    about_q3q4, about_q1q2 = symmetry_report(sol_1211)
    assert about_q1q2.symmetric
    assert not about_q3q4.symmetric
    assert about_q3q4.axis_or_plane == (2, 3)


def test_symmetry_square(square_newton):
    assert all(r.symmetric for r in symmetry_report(square_newton))


def test_ordering_unequal(sol_1211):
    rep = ordering_report(sol_1211)
    assert rep.mass_order == -1
    assert rep.consistent
    vols = oriented_volumes(sol_1211.positions.points)
    assert abs(vols.of([0, 2, 3])) < abs(vols.of([1, 2, 3]))
    s = sol_1211.s
    assert s[0, 2] < s[1, 2] and s[0, 3] < s[1, 3]


def test_ordering_symmetric(sol_1123):
    rep = ordering_report(sol_1123)
    assert rep.mass_order == rep.area_order == rep.height_order == 0
    assert rep.distance_orders == (0, 0)
    assert rep.consistent


def test_ordering_five_body():
    sol = solve_normalized([1, 2, 1, 1, 1], -1.5, "--+++")
    rep = ordering_report(sol)
    assert rep.mass_order == -1 and rep.area_order == -1


def test_routh(sol_1123, generic_1234):
    assert routh_residual(sol_1123) < 1e-8
    assert routh_residual(generic_1234) < 1e-8


def test_product_relation(generic_1234, square_newton):
    assert product_relation_residual(generic_1234) < 1e-9
    assert product_relation_residual(square_newton) < 1e-9


def test_product_relation_vortex_square(square_vortex):
    # c = 1 and S_ij = 1/s_ij with s_diag = 3/2, s_side = 3/4
    p = opposite_products(square_vortex)
    diag, side = (2 / 3 - 1) ** 2, (4 / 3 - 1) ** 2
    np.testing.assert_allclose(p, [diag, side, side], rtol=1e-10)


def test_negative_controls():
    rng = np.random.default_rng(8)
    for _ in range(5):
        q = rng.uniform(-1, 1, (4, 2))
        sol = solution_from_positions(q, [1, 2, 3, 4], -1.5)
        assert not sol.accepted
        assert routh_residual(sol) > 1e-2
        assert product_relation_residual(sol) > 1e-2


def test_convexity_examples():
    assert str(convexity_class([-1, -1, 1, 1])) == "convex_diagonal{1,2}"
    c = convexity_class([-3, 1, 1, 1])
    assert c.classification == "nonconvex" and c.indices == (0,)
    assert str(convexity_class([-1, -1, 0.5, 0.5, 1])) == "convex_diagonal{1,2}"
    assert convexity_class([-1, 0, 0.5, 0.5]).classification == "degenerate"
    assert convexity_class([1, 1, -1, -1, -1, 1, 1, -1]).classification == "convex_other"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), min_size=4, max_size=7),
       st.randoms(use_true_random=False))
def test_convexity_permutation_equivariant(d, rnd):
    perm = list(range(len(d)))
    rnd.shuffle(perm)
    a = convexity_class(d)
    b = convexity_class([d[p] for p in perm])
    assert a.classification == b.classification
    assert sorted(perm[i] for i in b.indices) == sorted(a.indices)


def test_analysis_report_keys(generic_1234):
    rep = analysis_report(generic_1234)
    assert set(rep) == {"symmetry", "ordering", "convexity", "routh_residual", "product_residual"}
