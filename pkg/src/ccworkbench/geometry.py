"""Euclidean configuration handling.

Squared distances, barycenters, Cayley-Menger determinants, signed simplex
volumes, homogeneous barycentric coordinates and the embedding of a squared
distance matrix back into coordinates (classical MDS).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, DimensionMismatch, NotRealizable, WrongRank

COINCIDENT_EPS = 1e-12
RANK_TOL = 1e-9


@dataclass(frozen=True)
class MassVector:
    """Positive masses m_1..m_n with their total M."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=float).reshape(-1)
        if m.size < 3:
            raise ValueError("need at least 3 masses")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ValueError("masses must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def total(self) -> float:
        return math.fsum(self.masses)

    @property
    def n(self) -> int:
        return self.masses.size

    def __len__(self):
        return self.masses.size


@dataclass(frozen=True)
class Configuration:
    """n labeled points in d-dimensional Euclidean space (rows are particles)."""

    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] < 1:
            raise DimensionMismatch("points must form an (n, d) array with d >= 1")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class SquaredDistanceMatrix:
    """Symmetric matrix of squared mutual distances with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        s = np.array(self.entries, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise DimensionMismatch("squared distances must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(s)))) if s.size else 1.0
        if not np.allclose(s, s.T, rtol=0, atol=1e-12 * scale):
            raise ValueError("squared distance matrix must be symmetric")
        if np.any(np.abs(np.diag(s)) > 1e-12 * scale):
            raise ValueError("squared distance matrix must have zero diagonal")
        s = 0.5 * (s + s.T)
        np.fill_diagonal(s, 0.0)
        off = s[~np.eye(s.shape[0], dtype=bool)]
        if off.size and np.min(off) <= 0:
            raise CoincidentPoints("off-diagonal squared distances must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "entries", s)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class OrientedVolumes:
    """Signed (n-2)-simplex volumes, indexed by the omitted particle.

    ``values[i]`` is the signed volume of the simplex formed by the other
    particles in increasing label order, so for n = 4 (0-based labels)
    ``values[3]`` is the area Delta_123 and ``values[2]`` is Delta_124.
    ``kappa`` relates them to a barycentric ray: ``(-1)**(n-1-i) * values[i]
    == kappa * deltas[i]``.
    """

    values: np.ndarray
    kappa: float
    deltas: np.ndarray

    def omitting(self, i: int) -> float:
        return float(self.values[i])

    def of(self, indices) -> float:
        """Signed volume of the simplex on ``indices`` (must be n-1 labels in increasing order)."""
        idx = tuple(indices)
        n = self.values.size
        missing = set(range(n)) - set(idx)
        if len(idx) != n - 1 or len(missing) != 1 or list(idx) != sorted(idx):
            raise ValueError("indices must list n-1 distinct labels in increasing order")
        return float(self.values[missing.pop()])


def _points(config) -> np.ndarray:
    if isinstance(config, Configuration):
        return config.points
    return Configuration(config).points


def _sq(s) -> np.ndarray:
    if isinstance(s, SquaredDistanceMatrix):
        return s.entries
    return np.asarray(s, dtype=float)


def _masses(m) -> np.ndarray:
    if isinstance(m, MassVector):
        return m.masses
    return MassVector(m).masses


def squared_distances(config, eps: float = COINCIDENT_EPS) -> SquaredDistanceMatrix:
    """Exact squared Euclidean distances between all pairs of points.

    Raises
    ------
    CoincidentPoints
        If two points are closer than ``eps`` (in squared distance, relative
        to the squared diameter).
    """
    q = _points(config)
    diff = q[:, None, :] - q[None, :, :]
    s = np.einsum("ijk,ijk->ij", diff, diff)
    n = q.shape[0]
    off = s[~np.eye(n, dtype=bool)]
    scale = max(float(off.max()) if off.size else 0.0, 1e-300)
    if off.size and off.min() <= eps * scale:
        i, j = np.argwhere((s <= eps * scale) & ~np.eye(n, dtype=bool))[0]
        raise CoincidentPoints(f"points {i} and {j} coincide")
    return SquaredDistanceMatrix(s)


def center_of_mass(config, m) -> np.ndarray:
    q = _points(config)
    w = _masses(m)
    if w.size != q.shape[0]:
        raise DimensionMismatch(f"{w.size} masses for {q.shape[0]} points")
    return w @ q / w.sum()


def diameter(config) -> float:
    q = _points(config)
    diff = q[:, None, :] - q[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


def cayley_menger(s, subset=None) -> float:
    """Cayley-Menger determinant of the bordered matrix over ``subset``.

    For k points this is the determinant of the (k+1)x(k+1) matrix
    ``[[0, 1...], [1, s]]``.  It vanishes when the points span fewer than
    k-1 dimensions; for a tetrahedron it equals 288 V^2.
    """
    s = _sq(s)
    idx = list(range(s.shape[0])) if subset is None else list(subset)
    k = len(idx)
    if k < 3 or k > s.shape[0] or len(set(idx)) != k:
        raise ValueError("subset must hold between 3 and n distinct indices")
    if min(idx) < 0 or max(idx) >= s.shape[0]:
        raise IndexError("subset index out of range")
    b = np.ones((k + 1, k + 1))
    b[0, 0] = 0.0
    b[1:, 1:] = s[np.ix_(idx, idx)]
    return float(np.linalg.det(b))


def cayley_menger_relative(s, subset=None) -> float:
    """|Cayley-Menger determinant| scaled by (max s)^(k-1), dimensionless."""
    s = _sq(s)
    k = s.shape[0] if subset is None else len(list(subset))
    scale = float(np.max(s)) ** (k - 1)
    return abs(cayley_menger(s, subset)) / scale


def gram_matrix(s) -> np.ndarray:
    """Double-centered Gram matrix -J s J / 2 of a squared distance matrix."""
    s = _sq(s)
    n = s.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    g = -0.5 * j @ s @ j
    return 0.5 * (g + g.T)


def gauge_fix(points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Rotate/reflect centered points into the axis-aligned gauge.

    Walking the points in label order, each point that is linearly
    independent of the previously chosen ones defines the next axis, and
    gets a positive coordinate along it.
    """
    q = np.asarray(points, dtype=float)
    d = q.shape[1]
    scale = max(float(np.max(np.linalg.norm(q, axis=1))), 1e-300)
    basis = []
    for p in q:
        r = p.copy()
        for b in basis:
            r -= (r @ b) * b
        nr = np.linalg.norm(r)
        if nr > tol * scale:
            basis.append(r / nr)
            if len(basis) == d:
                break
    if len(basis) < d:
        # rank-deficient: complete with a deterministic orthonormal complement
        for e in np.eye(d):
            r = e.copy()
            for b in basis:
                r -= (r @ b) * b
            nr = np.linalg.norm(r)
            if nr > 1e-6:
                basis.append(r / nr)
            if len(basis) == d:
                break
    out = q @ np.array(basis).T
    out[np.abs(out) < 1e-15 * scale] = 0.0
    return out


def embed(s, target_dim: int, tol: float = RANK_TOL) -> Configuration:
    """Recover coordinates from squared distances by classical MDS.

    The result is centered at the origin and put in the axis-aligned gauge
    (see :func:`gauge_fix`).

    Raises
    ------
    NotRealizable
        If the Gram matrix has an eigenvalue below ``-tol * largest`` or more
        than ``target_dim`` eigenvalues above ``tol * largest``.
    """
    g = gram_matrix(s)
    evals, evecs = np.linalg.eigh(g)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    top = max(float(evals[0]), 1e-300)
    cutoff = tol * top
    rank = int(np.sum(evals > cutoff))
    min_eval = float(min(evals[-1], 0.0))
    if min_eval < -cutoff or rank > target_dim:
        raise NotRealizable(
            f"not realizable in dimension {target_dim}: most negative Gram "
            f"eigenvalue {min_eval:.3e} (largest {top:.3e}), rank excess "
            f"{max(rank - target_dim, 0)}",
            min_eigenvalue=min_eval,
            excess_rank=max(rank - target_dim, 0),
        )
    lam = np.clip(evals[:target_dim], 0.0, None)
    y = evecs[:, :target_dim] * np.sqrt(lam)
    if y.shape[1] < target_dim:
        y = np.hstack([y, np.zeros((y.shape[0], target_dim - y.shape[1]))])
    return Configuration(gauge_fix(y))


def realizability_residual(s, target_dim: int) -> float:
    """Relative mismatch between s and the squared distances of its best rank-d embedding.

    Negative Gram eigenvalues and eigenvalues beyond ``target_dim`` both show
    up here; 0 for exactly realizable input.
    """
    s = _sq(s)
    g = gram_matrix(s)
    evals, evecs = np.linalg.eigh(g)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    y = evecs[:, :target_dim] * np.sqrt(np.clip(evals[:target_dim], 0.0, None))
    diff = y[:, None, :] - y[None, :, :]
    s2 = np.einsum("ijk,ijk->ij", diff, diff)
    return float(np.max(np.abs(s2 - s)) / np.max(s))


def _affine_matrix(q: np.ndarray) -> np.ndarray:
    return np.vstack([np.ones(q.shape[0]), q.T])


def barycentric_coordinates(config, tol: float = RANK_TOL) -> np.ndarray:
    """Homogeneous barycentric coordinates: a unit vector Delta with
    sum(Delta) = 0 and sum(Delta_i q_i) = 0.

    The sign is fixed so that the first entry that is not numerically zero
    is negative.

    Raises
    ------
    WrongRank
        If the solution space is not one-dimensional, i.e. the points do not
        span exactly n-2 dimensions.
    """
    q = _points(config)
    n = q.shape[0]
    a = _affine_matrix(q)
    scale = max(1.0, float(np.max(np.abs(q))))
    a = a / np.array([1.0] + [scale] * q.shape[1])[:, None]
    _, sv, vt = np.linalg.svd(a, full_matrices=True)
    sv_full = np.zeros(n)
    sv_full[: sv.size] = sv
    null_dim = int(np.sum(sv_full <= tol * max(sv_full[0], 1e-300)))
    if null_dim != 1:
        raise WrongRank(f"barycentric solution space has dimension {null_dim}, expected 1")
    delta = vt[-1].copy()
    delta /= np.linalg.norm(delta)
    nz = np.flatnonzero(np.abs(delta) > 1e-12)
    if delta[nz[0]] > 0:
        delta = -delta
    return delta


def signed_simplex_volume(points) -> float:
    """Signed volume of the simplex on d+1 points in R^d (det / d!)."""
    p = np.asarray(points, dtype=float)
    d = p.shape[1]
    if p.shape[0] != d + 1:
        raise DimensionMismatch(f"a {d}-simplex needs {d + 1} points")
    return float(np.linalg.det(p[1:] - p[0]) / math.factorial(d))


def oriented_volumes(config) -> OrientedVolumes:
    """Signed volumes of all sub-simplices of an n-point configuration in dimension n-2.

    With the sign convention Delta_n = Delta_{1..n-1}, Delta_{n-1} =
    -Delta_{1..n-2,n}, ... (alternating from the last label) the volumes are
    proportional to the barycentric coordinates; the factor is ``kappa``.
    """
    q = _points(config)
    n, d = q.shape
    if d != n - 2:
        raise DimensionMismatch(f"{n} points need dimension {n - 2}, got {d}")
    vals = np.array([signed_simplex_volume(np.delete(q, i, axis=0)) for i in range(n)])
    signed = vals * np.array([(-1.0) ** (n - 1 - i) for i in range(n)])
    delta = barycentric_coordinates(q)
    kappa = float(signed @ delta)
    return OrientedVolumes(values=vals, kappa=kappa, deltas=delta)


def point_flat_distance(point, flat_points) -> float:
    """Euclidean distance from a point to the affine hull of ``flat_points``."""
    p = np.asarray(point, dtype=float)
    f = np.asarray(flat_points, dtype=float)
    base = f[0]
    dirs = (f[1:] - base).T
    if dirs.size == 0:
        return float(np.linalg.norm(p - base))
    coef, *_ = np.linalg.lstsq(dirs, p - base, rcond=None)
    return float(np.linalg.norm(p - base - dirs @ coef))


def pairs(n: int):
    return itertools.combinations(range(n), 2)
