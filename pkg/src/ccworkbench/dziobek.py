"""Barycentric-coordinate (Dziobek) calculus and the normalized solver.

A normalized central configuration of n bodies in dimension n-2 is encoded
by its barycentric coordinates Delta, with sum(Delta) = 0, and the squared
mutual distances

    s_ij = (1 - Delta_i Delta_j / (m_i m_j)) ** (1/a).

The solver looks for Delta making every t_i = sum_j Delta_j s_ij equal.
Each root is post-validated (realizability, Cayley-Menger, and the force
balance on embedded positions) since the t-system alone does not promise
a Euclidean configuration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from . import direct
from .errors import DomainViolation, NoConvergence, NotRealizable, SpuriousRoot
from .geometry import (
    Configuration,
    MassVector,
    SquaredDistanceMatrix,
    barycentric_coordinates,
    cayley_menger_relative,
    embed,
    realizability_residual,
    squared_distances,
)

log = logging.getLogger(__name__)

DOMAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class Exponent:
    """Interaction exponent a (S_ij = s_ij^a) and alpha = 1/a.

    ``a < 0`` is the regime where the symmetry theorems hold; positive
    exponents must be requested with ``no_guarantee=True``.
    """

    a: float
    no_guarantee: bool = False

    def __post_init__(self):
        a = float(self.a)
        if a == 0 or not math.isfinite(a):
            raise ValueError("exponent a must be finite and nonzero")
        if a > 0 and not self.no_guarantee:
            raise ValueError("a > 0 is outside the theorem regime; pass no_guarantee=True")
        object.__setattr__(self, "a", a)

    @property
    def alpha(self) -> float:
        return 1.0 / self.a

    @property
    def theorem_regime(self) -> bool:
        return self.a < 0


def as_exponent(e) -> Exponent:
    if isinstance(e, Exponent):
        return e
    return Exponent(float(e), no_guarantee=float(e) > 0)


def as_masses(m) -> MassVector:
    return m if isinstance(m, MassVector) else MassVector(m)


def _s(s) -> np.ndarray:
    return s.entries if isinstance(s, SquaredDistanceMatrix) else np.asarray(s, dtype=float)


def parse_pattern(pattern) -> np.ndarray:
    """Turn '--++' or [-1, -1, 1, 1] into an array of +-1."""
    if isinstance(pattern, str):
        table = {"-": -1.0, "+": 1.0}
        try:
            return np.array([table[c] for c in pattern])
        except KeyError:
            raise ValueError(f"sign pattern may contain only '+' and '-': {pattern!r}") from None
    out = np.sign(np.asarray(pattern, dtype=float))
    if np.any(out == 0):
        raise ValueError("sign pattern entries must be nonzero")
    return out


# ---------------------------------------------------------------------------
# Delta <-> distances


def mass_products(deltas, m) -> np.ndarray:
    """Matrix of Delta_i Delta_j / (m_i m_j)."""
    d = np.asarray(deltas, dtype=float)
    w = d / as_masses(m).masses
    return np.outer(w, w)


def delta_to_distances(deltas, m, e) -> SquaredDistanceMatrix:
    """s_ij = (1 - Delta_i Delta_j / (m_i m_j))^alpha.

    Raises
    ------
    DomainViolation
        If some Delta_i Delta_j >= m_i m_j.
    """
    e = as_exponent(e)
    d = np.asarray(deltas, dtype=float)
    masses = as_masses(m)
    if d.size != masses.n:
        raise ValueError(f"{d.size} coordinates for {masses.n} masses")
    p = mass_products(d, masses)
    off = ~np.eye(d.size, dtype=bool)
    if np.any(p[off] >= 1.0):
        i, j = np.argwhere((p >= 1.0) & off)[0]
        raise DomainViolation(f"Delta_{i}Delta_{j} >= m_{i}m_{j}")
    np.fill_diagonal(p, 0.0)
    s = np.exp(e.alpha * np.log1p(-p))
    np.fill_diagonal(s, 0.0)
    return SquaredDistanceMatrix(s)


def t_values(deltas, s) -> np.ndarray:
    """t_i = sum_{j != i} Delta_j s_ij."""
    return _s(s) @ np.asarray(deltas, dtype=float)


def t_gap(i: int, j: int, deltas, s) -> float:
    """t_i - t_j written as (Delta_j - Delta_i) s_ij + sum_{k != i,j} Delta_k (s_ik - s_jk)."""
    if i == j:
        raise ValueError("t_gap needs two distinct indices")
    d = np.asarray(deltas, dtype=float)
    s = _s(s)
    k = np.array([x for x in range(d.size) if x not in (i, j)], dtype=int)
    return float((d[j] - d[i]) * s[i, j] + d[k] @ (s[i, k] - s[j, k]))


def t_spread(deltas, s) -> float:
    """(max t - min t) / (max |t| + 1)."""
    t = t_values(deltas, s)
    return float((t.max() - t.min()) / (np.max(np.abs(t)) + 1.0))


def fit_lambda_mu(s, deltas, m, e) -> tuple[float, float, float]:
    """Least-squares fit of S_ij - lambda/M = mu Delta_i Delta_j / (m_i m_j) over all pairs.

    Returns ``(lambda_over_M, mu, max_abs_residual)``.
    """
    e = as_exponent(e)
    s = _s(s)
    n = s.shape[0]
    iu = np.triu_indices(n, 1)
    big_s = s[iu] ** e.a
    p = mass_products(deltas, m)[iu]
    design = np.column_stack([np.ones_like(p), p])
    (c, mu), *_ = np.linalg.lstsq(design, big_s, rcond=None)
    res = big_s - c - mu * p
    return float(c), float(mu), float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# Solutions and validation


@dataclass(frozen=True)
class Tolerances:
    t_spread: float = 1e-11
    dziobek_fit: float = 1e-9
    cayley_menger: float = 1e-8
    realizability: float = 1e-8
    direct: float = 1e-8


@dataclass(frozen=True)
class ValidationReport:
    residuals: dict
    tolerances: Tolerances
    failures: tuple

    @property
    def accepted(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class CCSolution:
    masses: MassVector
    exponent: Exponent
    deltas: np.ndarray
    distances: SquaredDistanceMatrix
    positions: Configuration
    lambda_over_M: float
    mu: float
    residuals: dict = field(default_factory=dict)
    accepted: bool = False

    @property
    def n(self) -> int:
        return self.masses.n

    @property
    def s(self) -> np.ndarray:
        return self.distances.entries

    def to_dict(self) -> dict:
        return {
            "masses": [float(x) for x in self.masses.masses],
            "a": self.exponent.a,
            "deltas": [float(x) for x in self.deltas],
            "s": [[float(x) for x in row] for row in self.s],
            "positions": [[float(x) for x in row] for row in self.positions.points],
            "mu": self.mu,
            "lambda_over_M": self.lambda_over_M,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "accepted": bool(self.accepted),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CCSolution":
        return cls(
            masses=MassVector(data["masses"]),
            exponent=as_exponent(data["a"]),
            deltas=np.array(data["deltas"], dtype=float),
            distances=SquaredDistanceMatrix(data["s"]),
            positions=Configuration(data["positions"]),
            lambda_over_M=float(data["lambda_over_M"]),
            mu=float(data["mu"]),
            residuals=dict(data.get("residuals", {})),
            accepted=bool(data.get("accepted", False)),
        )


def validate(candidate: CCSolution, tolerances: Tolerances | None = None) -> ValidationReport:
    """Recompute every diagnostic of a candidate solution from scratch.

    Residuals: t-spread, Dziobek fit, Cayley-Menger determinant of all
    points, realizability in dimension n-2, and the force balance on the
    stored positions with lambda = M.
    """
    tol = tolerances or Tolerances()
    n = candidate.n
    s = candidate.s
    _, _, fit_res = fit_lambda_mu(s, candidate.deltas, candidate.masses, candidate.exponent)
    res = {
        "t_spread": t_spread(candidate.deltas, s),
        "dziobek_fit": fit_res,
        "cayley_menger": cayley_menger_relative(s),
        "realizability": realizability_residual(s, n - 2),
        "direct": direct.cc_residual(
            candidate.positions, candidate.masses, candidate.exponent, candidate.masses.total
        ),
    }
    failures = tuple(k for k, v in res.items() if not (v < getattr(tol, k)))
    return ValidationReport(residuals=res, tolerances=tol, failures=failures)


def build_solution(deltas, m, e, tolerances: Tolerances | None = None) -> CCSolution:
    """Assemble and validate a CCSolution from normalized coordinates.

    Raises
    ------
    NotRealizable
        If the distances do not embed in dimension n-2.
    """
    masses = as_masses(m)
    e = as_exponent(e)
    d = np.array(deltas, dtype=float)
    s = delta_to_distances(d, masses, e)
    pos = embed(s, masses.n - 2)
    c, mu, _ = fit_lambda_mu(s, d, masses, e)
    sol = CCSolution(masses, e, d, s, pos, c, mu)
    rep = validate(sol, tolerances)
    return replace(sol, residuals=rep.residuals, accepted=rep.accepted)


def solution_from_positions(config, m, e, tolerances: Tolerances | None = None) -> CCSolution:
    """Wrap an arbitrary (n, n-2) configuration as a CCSolution for diagnostics.

    Delta is the barycentric ray rescaled so the fitted mu is -1 when mu < 0.
    The configuration is rescaled by the fitted lambda so that lambda = M
    holds for a genuine central configuration; ``residuals`` reports how far
    it is from one.
    """
    masses = as_masses(m)
    e = as_exponent(e)
    q = config.points if isinstance(config, Configuration) else Configuration(config).points
    lam = direct.fit_lambda(q, masses, e)
    if lam > 0:
        # gamma scales as c^(2a+1): choose c with lam c^(2a) = M
        c = (masses.total / lam) ** (1.0 / (2.0 * e.a))
        q = q * c
    q = q - masses.masses @ q / masses.total
    ray = barycentric_coordinates(q)
    s = squared_distances(q)
    _, mu, _ = fit_lambda_mu(s, ray, masses, e)
    d = ray * math.sqrt(abs(mu)) if mu != 0 else ray
    c_fit, mu_fit, _ = fit_lambda_mu(s, d, masses, e)
    sol = CCSolution(masses, e, d, s, Configuration(q), c_fit, mu_fit)
    rep = validate(sol, tolerances)
    return replace(sol, residuals=rep.residuals, accepted=rep.accepted)


# ---------------------------------------------------------------------------
# Solver


def t_system(deltas, m, e) -> np.ndarray:
    """Residual vector [sum Delta; t_1 - t_2; ...; t_{n-1} - t_n]."""
    d = np.asarray(deltas, dtype=float)
    s = _raw_distances(d, as_masses(m).masses, as_exponent(e).alpha)
    t = s @ d
    return np.concatenate([[d.sum()], t[:-1] - t[1:]])


def _raw_distances(d, masses, alpha):
    w = d / masses
    p = np.outer(w, w)
    np.fill_diagonal(p, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.exp(alpha * np.log1p(-p))
    np.fill_diagonal(s, 0.0)
    return s


def _in_domain(d, masses, margin=DOMAIN_MARGIN) -> bool:
    w = d / masses
    p = np.outer(w, w)
    np.fill_diagonal(p, -np.inf)
    return bool(np.all(p < 1.0 - margin))


def _fd_jacobian(fun, x, f0):
    n = x.size
    jac = np.empty((f0.size, n))
    for k in range(n):
        h = 1e-7 * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        jac[:, k] = (fun(xp) - fun(xm)) / (2 * h)
    return jac


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool


def damped_newton(fun, x0, in_domain, ftol=1e-14, max_iter=100) -> NewtonResult:
    """Newton iteration with a central-difference Jacobian and step halving.

    A step is halved until the trial point is inside the domain and reduces
    the residual norm.
    """
    x = np.array(x0, dtype=float)
    f = fun(x)
    norm = np.linalg.norm(f)
    for it in range(1, max_iter + 1):
        if norm <= ftol:
            return NewtonResult(x, norm, it - 1, True)
        jac = _fd_jacobian(fun, x, f)
        try:
            dx = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, -f, rcond=None)[0]
        step = 1.0
        for _ in range(60):
            xt = x + step * dx
            if in_domain(xt):
                ft = fun(xt)
                nt = np.linalg.norm(ft)
                if np.isfinite(nt) and nt < (1 - 1e-4 * step) * norm:
                    break
            step *= 0.5
        else:
            return NewtonResult(x, norm, it, norm <= ftol)
        x, f, norm = xt, ft, nt
    return NewtonResult(x, norm, max_iter, norm <= ftol)


@dataclass(frozen=True)
class RootSearch:
    """All roots found for one sign pattern.

    ``accepted`` is sorted lexicographically by Delta; ``rejected`` holds
    roots of the t-system that failed post-validation (spurious roots) as
    ``(deltas, reason, residuals)`` tuples.
    """

    accepted: list
    rejected: list
    best_residual: float
    starts: int


def _initial_guess(masses, sigma, fill=0.7, jitter=None):
    """Balanced start: equal |Delta| within each sign group (optionally jittered),
    scaled to ``fill`` times the largest in-domain multiple."""
    b = np.where(sigma < 0, -1.0 / np.sum(sigma < 0), 1.0 / np.sum(sigma > 0))
    if jitter is not None:
        b = b * jitter
        neg = b < 0
        b[~neg] *= -b[neg].sum() / b[~neg].sum()
    w = b / masses
    p = np.outer(w, w)
    np.fill_diagonal(p, 0.0)
    return fill / math.sqrt(p.max()) * b


def _pattern_ok(d, sigma):
    scale = np.max(np.abs(d))
    return scale > 1e-8 and bool(np.all(np.sign(d) == sigma)) and bool(
        np.all(np.abs(d) > 1e-8 * scale)
    )


def find_roots(
    m,
    e,
    sign_pattern,
    seed: int = 0,
    starts: int = 16,
    tolerances: Tolerances | None = None,
    cm_weight: float = 1.0,
) -> RootSearch:
    """Multi-start damped Newton on the t-system, with validation of each root.

    Start 0 puts equal |Delta| within each sign group at 0.7 of the domain
    boundary; the others jitter entries (log-normal) and the fill fraction.
    Newton runs on the residuals multiplied by 1 + |m|^2/|Delta|^2 so the
    trivial root Delta = 0 repels rather than attracts.  Starts where Newton
    stalls fall back to a least-squares solve of the same residuals augmented
    by the weighted Cayley-Menger determinant.
    """
    masses = as_masses(m)
    e = as_exponent(e)
    if e.a >= 0:
        raise ValueError("solver requires a < 0")
    sigma = parse_pattern(sign_pattern)
    if sigma.size != masses.n:
        raise ValueError(f"sign pattern has {sigma.size} entries for {masses.n} masses")
    if np.all(sigma > 0) or np.all(sigma < 0):
        raise ValueError("sign pattern needs both signs (coordinates sum to zero)")
    mv = masses.masses
    alpha = e.alpha
    fun = lambda x: t_system(x, masses, e)  # noqa: E731
    dom = lambda x: _in_domain(x, mv)  # noqa: E731

    scale2 = float(mv @ mv)
    # deflate the trivial root Delta = 0, which attracts many starts
    deflated = lambda x: fun(x) * (1.0 + scale2 / max(float(x @ x), 1e-300))  # noqa: E731

    rng = np.random.default_rng(seed)
    roots, best = [], float("inf")
    for k in range(starts):
        if k == 0:
            x0 = _initial_guess(mv, sigma)
        else:
            x0 = _initial_guess(mv, sigma, fill=rng.uniform(0.3, 0.95),
                                jitter=np.exp(0.3 * rng.standard_normal(mv.size)))
        nr = damped_newton(deflated, x0, dom)
        x = nr.x
        r = float(np.linalg.norm(fun(x)))
        if not r <= 1e-13 * (1 + float(np.max(np.abs(mv)))):
            def aug(y):
                if not dom(y):
                    return np.full(mv.size + 1, 1e6)
                s = _raw_distances(y, mv, alpha)
                cm = cayley_menger_relative(s)
                return np.concatenate([deflated(y), [cm_weight * cm]])

            ls = least_squares(aug, x, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
            if dom(ls.x):
                x = damped_newton(fun, ls.x, dom).x
                r = float(np.linalg.norm(fun(x)))
        best = min(best, r)
        if not r <= 1e-12 * (1 + np.max(np.abs(mv))) or not _pattern_ok(x, sigma):
            continue
        if any(np.max(np.abs(x - y)) < 1e-8 * np.max(np.abs(y)) for y in roots):
            continue
        roots.append(x)

    accepted, rejected = [], []
    for x in roots:
        try:
            sol = build_solution(x, masses, e, tolerances)
        except NotRealizable as exc:
            rejected.append((x, f"not realizable: {exc}", {}))
            log.info("spurious root %s: %s", x, exc)
            continue
        if sol.accepted:
            accepted.append(sol)
        else:
            rejected.append((x, "validation failed", sol.residuals))
            log.info("spurious root %s: residuals %s", x, sol.residuals)
    accepted.sort(key=lambda sol: tuple(sol.deltas))
    return RootSearch(accepted=accepted, rejected=rejected, best_residual=best, starts=starts)


def solve_normalized(
    m,
    e,
    sign_pattern,
    seed: int = 0,
    starts: int = 16,
    tolerances: Tolerances | None = None,
) -> CCSolution:
    """Normalized central configuration (lambda = M) with the given Delta sign pattern.

    Returns the lexicographically first accepted root; use :func:`find_roots`
    to see all of them.

    Raises
    ------
    NoConvergence
        If no start produced a root with the requested sign pattern.
    SpuriousRoot
        If roots were found but none passed validation.
    """
    search = find_roots(m, e, sign_pattern, seed=seed, starts=starts, tolerances=tolerances)
    if search.accepted:
        return search.accepted[0]
    if search.rejected:
        raise SpuriousRoot(
            f"{len(search.rejected)} root(s) failed validation",
            reports=search.rejected,
        )
    raise NoConvergence(
        f"no root with pattern {sign_pattern!r} from {starts} starts",
        best_residual=search.best_residual,
    )
