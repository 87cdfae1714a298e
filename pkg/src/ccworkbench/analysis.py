"""Theorem-level reports on solved configurations.

Mirror symmetry about a diagonal, the ordering chain linking masses to
areas and distances, Routh's relation for four bodies, the product
relation among the three pairs of opposite sides, and the classification
of barycentric sign patterns.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dziobek import CCSolution
from .geometry import oriented_volumes, point_flat_distance

SYMMETRY_TOL = 1e-7
SIGN_TOL = 1e-9
ROUTH_FLOOR = 1e-6


@dataclass(frozen=True)
class SymmetryReport:
    """Reflection that swaps the pair ``swapped`` and fixes the other particles.

    ``axis_or_plane`` lists the fixed particles: the axis [q3, q4] for the
    four-body diagonal (q1, q2), or the plane [q3, q4, q5] for five bodies.
    """

    swapped: tuple
    axis_or_plane: tuple
    distance_asymmetry: float
    delta_gap: float
    symmetric: bool


@dataclass(frozen=True)
class OrderingReport:
    pair: tuple
    mass_order: int
    area_order: int
    height_order: int
    distance_orders: tuple
    consistent: bool


@dataclass(frozen=True)
class ConvexityClass:
    negative_indices: tuple
    classification: str
    indices: tuple

    def __str__(self):
        return f"{self.classification}{{{','.join(str(i + 1) for i in self.indices)}}}"


def symmetry_about(sol: CCSolution, swapped=(0, 1), tolerance: float = SYMMETRY_TOL) -> SymmetryReport:
    """Compare s_ik with s_jk for every fixed k, and Delta_i with Delta_j."""
    i, j = swapped
    s = sol.s
    fixed = tuple(k for k in range(sol.n) if k not in (i, j))
    asym = max(abs(s[i, k] - s[j, k]) for k in fixed) / float(np.max(s))
    gap = abs(sol.deltas[i] - sol.deltas[j]) / float(np.max(np.abs(sol.deltas)))
    return SymmetryReport(
        swapped=(i, j),
        axis_or_plane=fixed,
        distance_asymmetry=float(asym),
        delta_gap=float(gap),
        symmetric=bool(asym < tolerance and gap < tolerance),
    )


def symmetry_report(sol: CCSolution, tolerance: float = SYMMETRY_TOL) -> list[SymmetryReport]:
    """Reflections named by the symmetry theorems.

    Four bodies: swapping (q1, q2) about the axis [q3, q4] and swapping
    (q3, q4) about the axis [q1, q2].  Five bodies: swapping (q1, q2) about
    the plane [q3, q4, q5].
    """
    if sol.n == 4:
        return [symmetry_about(sol, (0, 1), tolerance), symmetry_about(sol, (2, 3), tolerance)]
    return [symmetry_about(sol, (0, 1), tolerance)]


def _sign(x: float, scale: float, tol: float = SIGN_TOL) -> int:
    if abs(x) <= tol * scale:
        return 0
    return 1 if x > 0 else -1


def ordering_report(sol: CCSolution, pair=(0, 1), tol: float = SIGN_TOL) -> OrderingReport:
    """Signs of m_i - m_j, |vol without j| - |vol without i|, the heights of
    q_i and q_j over the flat of the other particles, and s_ik - s_jk.

    All of them agree for a convex central configuration with diagonal
    (q_i, q_j) when a < 0.
    """
    i, j = pair
    mv = sol.masses.masses
    q = sol.positions.points
    s = sol.s
    others = [k for k in range(sol.n) if k not in (i, j)]
    vols = oriented_volumes(q).values
    # the simplex on i and the others omits j
    area_i, area_j = abs(vols[j]), abs(vols[i])
    h_i = point_flat_distance(q[i], q[others])
    h_j = point_flat_distance(q[j], q[others])
    mass_order = _sign(mv[i] - mv[j], mv[i] + mv[j], 1e-12)
    area_order = _sign(area_i - area_j, area_i + area_j, tol)
    height_order = _sign(h_i - h_j, h_i + h_j, tol)
    dist = tuple(_sign(s[i, k] - s[j, k], s[i, k] + s[j, k], tol) for k in others)
    signs = {mass_order, area_order, height_order, *dist}
    return OrderingReport(
        pair=(i, j),
        mass_order=mass_order,
        area_order=area_order,
        height_order=height_order,
        distance_orders=dist,
        consistent=len(signs) == 1,
    )


def routh_terms(sol: CCSolution) -> tuple[float, float]:
    """The two summands m3 D123 (S13 - S23) and m4 D124 (S14 - S24)."""
    if sol.n != 4:
        raise ValueError("Routh's relation is a four-body identity")
    vols = oriented_volumes(sol.positions.points).values
    d123, d124 = vols[3], vols[2]
    big_s = np.where(sol.s > 0, sol.s, 1.0) ** sol.exponent.a
    m = sol.masses.masses
    t3 = m[2] * d123 * (big_s[0, 2] - big_s[1, 2])
    t4 = m[3] * d124 * (big_s[0, 3] - big_s[1, 3])
    return float(t3), float(t4)


def routh_residual(sol: CCSolution) -> float:
    """|T3 + T4| / (max(|T3|, |T4|) + floor).

    The floor is 1e-6 times the undifferenced magnitude
    m3 |D123| (S13 + S23) + m4 |D124| (S14 + S24), so symmetric solutions,
    where both summands are rounding noise, score near zero.
    """
    t3, t4 = routh_terms(sol)
    vols = oriented_volumes(sol.positions.points).values
    S = np.where(sol.s > 0, sol.s, 1.0) ** sol.exponent.a
    m = sol.masses.masses
    gross = m[2] * abs(vols[3]) * (S[0, 2] + S[1, 2]) + m[3] * abs(vols[2]) * (S[0, 3] + S[1, 3])
    floor = ROUTH_FLOOR * gross
    return float(abs(t3 + t4) / (max(abs(t3), abs(t4)) + floor))


def opposite_products(sol: CCSolution, c: float | None = None) -> np.ndarray:
    """(S12 - c)(S34 - c), (S13 - c)(S24 - c), (S14 - c)(S23 - c) with c = lambda/M."""
    if sol.n != 4:
        raise ValueError("the product relation is a four-body identity")
    c = sol.lambda_over_M if c is None else c
    S = np.where(sol.s > 0, sol.s, 1.0) ** sol.exponent.a
    return np.array([
        (S[0, 1] - c) * (S[2, 3] - c),
        (S[0, 2] - c) * (S[1, 3] - c),
        (S[0, 3] - c) * (S[1, 2] - c),
    ])


def product_relation_residual(sol: CCSolution) -> float:
    """Largest gap between the three opposite-pair products, relative to their mean magnitude."""
    p = opposite_products(sol)
    gap = max(abs(p[0] - p[1]), abs(p[0] - p[2]), abs(p[1] - p[2]))
    return float(gap / np.mean(np.abs(p)))


def convexity_class(deltas, tol: float = 0.0) -> ConvexityClass:
    """Classify a configuration from the signs of its barycentric coordinates.

    Only the smaller sign class matters (Delta and -Delta describe the same
    configuration): one entry means that particle lies inside the hull of the
    others, two entries form the diagonal of a convex configuration made of
    two simplices glued along a face, three or more give another convex type.
    Any zero entry is degenerate.
    """
    d = np.asarray(deltas, dtype=float)
    scale = float(np.max(np.abs(d)))
    neg = tuple(int(k) for k in np.flatnonzero(d < -tol * scale))
    pos = tuple(int(k) for k in np.flatnonzero(d > tol * scale))
    zero = tuple(k for k in range(d.size) if k not in neg and k not in pos)
    if zero:
        return ConvexityClass(neg, "degenerate", zero)
    minority = neg if len(neg) <= len(pos) else pos
    if len(minority) == 1:
        return ConvexityClass(neg, "nonconvex", minority)
    if len(minority) == 2:
        return ConvexityClass(neg, "convex_diagonal", minority)
    return ConvexityClass(neg, "convex_other", minority)


def analysis_report(sol: CCSolution, tolerance: float = SYMMETRY_TOL) -> dict:
    """JSON-ready bundle of every report that applies to ``sol``."""
    out = {
        "symmetry": [asdict(r) for r in symmetry_report(sol, tolerance)],
        "ordering": asdict(ordering_report(sol)),
        "convexity": str(convexity_class(sol.deltas)),
    }
    if sol.n == 4:
        out["routh_residual"] = routh_residual(sol)
        out["product_residual"] = product_relation_residual(sol)
    return out
