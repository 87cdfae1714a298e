import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from ccworkbench.dziobek import (
    CCSolution,
    Exponent,
    build_solution,
    delta_to_distances,
    find_roots,
    fit_lambda_mu,
    parse_pattern,
    solution_from_positions,
    solve_normalized,
    t_gap,
    t_spread,
    t_values,
    validate,
)
from ccworkbench.errors import DomainViolation, NotRealizable
from ccworkbench.geometry import squared_distances

from .conftest import UNIT_SQUARE


def delta_star(a):
    al = 1.0 / a
    return brentq(lambda d: 2 * (1 + d * d) ** al - (1 - d * d) ** al, 1e-6, 1 - 1e-12, xtol=1e-15)


def test_exponent():
    e = Exponent(-1.5)
    assert e.alpha * e.a == pytest.approx(1.0)
    assert e.theorem_regime
    with pytest.raises(ValueError):
        Exponent(0.0)
    with pytest.raises(ValueError):
        Exponent(1.0)
    assert not Exponent(1.0, no_guarantee=True).theorem_regime


def test_parse_pattern():
    np.testing.assert_array_equal(parse_pattern("--++"), [-1, -1, 1, 1])
    with pytest.raises(ValueError):
        parse_pattern("-x+")


def test_zero_product_gives_unit_distance():
    s = delta_to_distances([-1.0, 0.0, 0.5, 0.5], [2, 1, 1, 1], -1.5).entries
    assert s[0, 1] == 1.0 and s[1, 2] == 1.0


def test_vortex_square_distances():
    d = 3 ** -0.5
    s = delta_to_distances([-d, -d, d, d], [1, 1, 1, 1], -1.0).entries
    assert s[0, 1] == pytest.approx(1.5, abs=1e-14)
    assert s[2, 3] == pytest.approx(1.5, abs=1e-14)
    for i, j in [(0, 2), (0, 3), (1, 2), (1, 3)]:
        assert s[i, j] == pytest.approx(0.75, abs=1e-14)


def test_domain_boundary():
    with pytest.raises(DomainViolation):
        delta_to_distances([-1.0, -1.0, 1.0, 1.0], [1, 1, 1, 1], -1.5)


def test_t_values_square():
    s = squared_distances(UNIT_SQUARE)
    np.testing.assert_allclose(t_values([-1, -1, 1, 1], s), 0.0, atol=1e-15)
    d = 3 ** -0.5
    dd = [-d, -d, d, d]
    s2 = delta_to_distances(dd, [1, 1, 1, 1], -1.0)
    assert t_spread(dd, s2) < 1e-12


def test_t_spread_detects_perturbation():
    d = 3 ** -0.5
    dd = np.array([-d, -d, d + 0.1, d - 0.1])
    s = delta_to_distances(dd, [1, 1, 1, 1], -1.0)
    assert t_spread(dd, s) > 1e-3


def test_t_gap():
    s = squared_distances(UNIT_SQUARE)
    assert t_gap(0, 1, [-1, -1, 1, 1], s) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        t_gap(2, 2, [-1, -1, 1, 1], s)


def test_t_gap_matches_t_values():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        q = rng.standard_normal((4, 2))
        s = squared_distances(q)
        d = rng.standard_normal(4)
        d -= d.mean()
        t = t_values(d, s)
        for i in range(4):
            for j in range(4):
                if i != j:
                    worst = max(worst, abs(t_gap(i, j, d, s) - (t[i] - t[j])))
    assert worst < 1e-12


def test_fit_lambda_mu_normalized():
    d = np.array([-0.3, -0.2, 0.35, 0.15])
    m = [1.0, 2.0, 1.5, 0.7]
    s = delta_to_distances(d, m, -1.5)
    c, mu, res = fit_lambda_mu(s, d, m, -1.5)
    assert c == pytest.approx(1.0, abs=1e-12)
    assert mu == pytest.approx(-1.0, abs=1e-12)
    assert res < 1e-12


def test_fit_lambda_mu_negative_control():
    rng = np.random.default_rng(2)
    s = squared_distances(rng.standard_normal((4, 2)))
    _, _, res = fit_lambda_mu(s, [-0.3, -0.2, 0.35, 0.15], [1, 1, 1, 1], -1.5)
    assert res > 1e-2


@pytest.mark.parametrize("a", [-1.5, -1.0, -0.5])
def test_square_matches_bisection(a):
    sol = solve_normalized([1, 1, 1, 1], a, "--++")
    np.testing.assert_allclose(np.abs(sol.deltas), delta_star(a), atol=1e-10)
    assert sol.s[0, 1] / sol.s[0, 2] == pytest.approx(2.0, abs=1e-9)


def test_frozen_oracle_values():
    # brentq on 2(1+d^2)^alpha = (1-d^2)^alpha
    assert delta_star(-1.5) == pytest.approx(0.6910804946404703, abs=1e-12)
    assert delta_star(-1.0) == pytest.approx(3 ** -0.5, abs=1e-14)
    assert delta_star(-0.5) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)


def test_square_validation(square_newton):
    rep = validate(square_newton)
    assert rep.accepted
    assert all(v < 1e-9 for v in rep.residuals.values())
    assert square_newton.mu < 0


@pytest.mark.parametrize("m34", [(2.0, 3.0), (0.3, 4.0), (1.0, 0.5)])
def test_equal_pair_gives_equal_deltas(m34):
    sol = solve_normalized([1, 1, *m34], -1.5, "--++")
    assert sol.deltas[0] == pytest.approx(sol.deltas[1], abs=1e-9)


def test_validate_flags_nonplanar():
    # five-point distances of a genuine 3D configuration are not realizable in 2D
    d = np.array([-0.3, -0.2, 0.2, 0.2, 0.1])
    with pytest.raises(NotRealizable):
        build_solution(d, [1, 1, 1, 1, 1], -1.5)


def test_validate_flags_perturbed_mass(generic_1234):
    sol = generic_1234
    from ccworkbench.geometry import MassVector
    from dataclasses import replace

    bad = replace(sol, masses=MassVector([1.0, 2.0, 3.0, 4.4]))
    rep = validate(bad)
    assert "direct" in rep.failures


def test_solution_round_trip(generic_1234):
    back = CCSolution.from_dict(generic_1234.to_dict())
    np.testing.assert_array_equal(back.deltas, generic_1234.deltas)
    np.testing.assert_array_equal(back.s, generic_1234.s)
    assert back.accepted


def test_solution_from_positions_recovers_normalization(generic_1234):
    q = generic_1234.positions.points * 1.7 + [0.3, -2.0]
    sol = solution_from_positions(q, generic_1234.masses, -1.5)
    assert sol.accepted
    assert sol.lambda_over_M == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(np.sort(sol.s.ravel()), np.sort(generic_1234.s.ravel()), rtol=1e-8)


def test_find_roots_pattern_validation():
    with pytest.raises(ValueError):
        find_roots([1, 1, 1, 1], -1.5, "++++")
    with pytest.raises(ValueError):
        find_roots([1, 1, 1, 1], -1.5, "--+")
    with pytest.raises(ValueError):
        find_roots([1, 1, 1, 1], 1.0, "--++")


def test_five_body_equal_masses():
    sol = solve_normalized([1, 1, 1, 1, 1], -1.5, "--+++")
    assert sol.accepted
    d = sol.deltas
    assert d[0] == pytest.approx(d[1], abs=1e-9)
    np.testing.assert_allclose(d[2:], d[2], atol=1e-9)


masses4 = st.lists(st.floats(0.2, 5.0), min_size=4, max_size=4)


@settings(max_examples=15, deadline=None)
@given(masses4, st.floats(0.3, 3.0))
def test_scale_covariance(m, c):
    # Delta/m is invariant when every mass is multiplied by c
    sol = solve_normalized(m, -1.5, "--++")
    sol2 = solve_normalized([c * x for x in m], -1.5, "--++")
    np.testing.assert_allclose(sol2.deltas / c, sol.deltas, atol=1e-8)
    np.testing.assert_allclose(sol2.s, sol.s, rtol=1e-8)


@settings(max_examples=15, deadline=None)
@given(masses4)
def test_relabeling(m):
    # swapping the two diagonal pairs relabels the same configuration
    sol = solve_normalized(m, -1.5, "--++")
    perm = [2, 3, 0, 1]
    sol2 = solve_normalized([m[i] for i in perm], -1.5, "++--")
    np.testing.assert_allclose(sol2.deltas, sol.deltas[perm], atol=1e-8)
