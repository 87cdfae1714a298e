"""Position-space ground truth for central configurations.

Forces gamma_i = sum_k m_k |q_i - q_k|^(2a) (q_i - q_k), the residual of
gamma_i = lambda (q_i - q_G), and a multi-start least-squares solver that
serves as an oracle independent of the barycentric-coordinate solver.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import CoincidentPoints, NoConvergence
from .geometry import (
    Configuration,
    MassVector,
    center_of_mass,
    diameter,
    gauge_fix,
    squared_distances,
)

log = logging.getLogger(__name__)


def _a(e) -> float:
    return float(getattr(e, "a", e))


def _m(m) -> np.ndarray:
    return m.masses if isinstance(m, MassVector) else MassVector(m).masses


def _q(config) -> np.ndarray:
    return config.points if isinstance(config, Configuration) else Configuration(config).points


@dataclass(frozen=True)
class ForceField:
    gammas: np.ndarray

    def momentum(self, m) -> np.ndarray:
        return _m(m) @ self.gammas


def _gamma_array(q: np.ndarray, m: np.ndarray, a: float) -> np.ndarray:
    diff = q[:, None, :] - q[None, :, :]
    s = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(s, 1.0)
    w = s**a * m[None, :]
    np.fill_diagonal(w, 0.0)
    return np.einsum("ik,ikd->id", w, diff)


def gamma(config, m, e) -> ForceField:
    """gamma_i = sum_{k != i} m_k s_ik^a (q_i - q_k)."""
    q = _q(config)
    masses = _m(m)
    squared_distances(q)  # raises CoincidentPoints
    return ForceField(_gamma_array(q, masses, _a(e)))


def cc_residual(config, m, e, lam: float) -> float:
    """max_i |gamma_i - lam (q_i - q_G)| / (lam * diameter); zero exactly at a central configuration."""
    q = _q(config)
    masses = _m(m)
    g = gamma(q, masses, e).gammas
    qg = center_of_mass(q, masses)
    r = g - lam * (q - qg)
    return float(np.max(np.linalg.norm(r, axis=1)) / (abs(lam) * diameter(q)))


def fit_lambda(config, m, e) -> float:
    """Least-squares lambda for gamma_i ~ lambda (q_i - q_G)."""
    q = _q(config)
    masses = _m(m)
    g = gamma(q, masses, e).gammas
    x = q - center_of_mass(q, masses)
    return float(np.sum(g * x) / np.sum(x * x))


@dataclass(frozen=True)
class StartLog:
    start_id: int
    iterations: int
    final_residual: float


def write_convergence_csv(path, logs) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["start_id", "iterations", "final_residual"])
        for rec in logs:
            w.writerow([rec.start_id, rec.iterations, repr(rec.final_residual)])


def _signature(q: np.ndarray) -> np.ndarray:
    n = q.shape[0]
    iu = np.triu_indices(n, 1)
    diff = q[:, None, :] - q[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)[iu]


def solve_positions(
    m,
    dim: int,
    e,
    starts: int = 64,
    seed: int = 0,
    tol: float = 1e-9,
    log_records: list | None = None,
) -> list[Configuration]:
    """Multi-start search for central configurations with lambda = M.

    Each start draws every coordinate uniformly from [-r, r] with
    r = M^(1/(2-2a)) and minimizes sum_i |gamma_i - M (q_i - q_G)|^2 with a
    trust-region least-squares solver.  Converged configurations are moved to
    the barycenter, put in the axis-aligned gauge and merged when their
    labeled squared-distance vectors agree to 1e-6 relative.

    Returns the distinct solutions sorted by their distance signature.
    Per-start diagnostics are appended to ``log_records`` when given.
    """
    masses = _m(m)
    a = _a(e)
    n = masses.size
    if a >= 0:
        raise ValueError("the position solver requires a < 0")
    if dim not in (n - 2, n - 1):
        raise ValueError(f"dim must be n-2 or n-1 (got {dim} for n={n})")
    M = masses.sum()
    radius = M ** (1.0 / (2.0 - 2.0 * a))
    rng = np.random.default_rng(seed)

    def resid(x):
        q = x.reshape(n, dim)
        qg = masses @ q / M
        return (_gamma_array(q, masses, a) - M * (q - qg)).ravel()

    found: list[tuple[np.ndarray, np.ndarray]] = []
    for sid in range(starts):
        x0 = rng.uniform(-radius, radius, size=n * dim)
        try:
            with np.errstate(all="ignore"):
                res = least_squares(resid, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                    max_nfev=2000)
            q = res.x.reshape(n, dim)
            q = q - masses @ q / M
            r = cc_residual(q, masses, a, M)
        except (CoincidentPoints, FloatingPointError, ValueError, np.linalg.LinAlgError):
            r = float("inf")
            res = None
        if log_records is not None:
            log_records.append(StartLog(sid, int(res.nfev) if res is not None else 0, r))
        if not np.isfinite(r) or r >= tol:
            continue
        q = gauge_fix(q)
        sig = _signature(q)
        if any(np.max(np.abs(sig - s0)) <= 1e-6 * np.max(s0) for s0, _ in found):
            continue
        found.append((sig, q))

    if not found:
        raise NoConvergence(f"none of {starts} starts converged", best_residual=float("inf"))
    found.sort(key=lambda item: tuple(np.round(np.sort(item[0]), 9)) + tuple(np.round(item[0], 9)))
    log.debug("solve_positions: %d distinct solutions from %d starts", len(found), starts)
    return [Configuration(q) for _, q in found]
