"""Scalar functions behind the symmetry lemmas, with sampling certification.

Everything here is a direct evaluation: the two-variable function A and
its stationary point rho_0, the proof's intermediates B and C, the
trinomial-type function f(q, u), the pairwise products
(Delta_i/m_i - Delta_j/m_j)(Delta_i - Delta_j), and the t_1 - t_2 >= Z
bound.  The ``*_property`` functions sample seeded random points and
return a :class:`PropertyReport`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from .dziobek import as_exponent, as_masses, delta_to_distances, t_values
from .errors import DomainViolation, HypothesisViolation

DEFAULT_SEED = 7


@dataclass(frozen=True)
class Lemma2Point:
    rho1: float
    rho2: float
    rho: float
    alpha: float

    def __post_init__(self):
        if not self.rho1 < self.rho2 <= 0:
            raise DomainViolation(f"need rho1 < rho2 <= 0, got {self.rho1}, {self.rho2}")
        if not self.rho1 * self.rho2 < 1:
            raise DomainViolation("need rho1 * rho2 < 1")
        if not self.rho >= 0:
            raise DomainViolation("need rho >= 0")
        if not self.alpha < 0:
            raise DomainViolation("need alpha < 0")

    @property
    def q(self) -> float:
        return self.rho2 / self.rho1

    @property
    def u(self) -> float:
        return 1.0 / (self.alpha - 1.0)


def _pow1m(x, alpha):
    """(1 - x)^alpha via log1p."""
    return np.exp(alpha * np.log1p(-x))


def _pow1m_minus1(x, alpha):
    """(1 - x)^alpha - 1 without cancellation."""
    return np.expm1(alpha * np.log1p(-x))


def lemma2_A_array(rho1, rho2, rho, alpha):
    """Vectorized A = (rho2 - rho1) s12 - (rho1 + rho2)(s13 - s23).

    Evaluated as a sum of nonnegative terms plus 2 rho2, which avoids the
    cancellation of the naive form near rho2 = 0.
    """
    s12m1 = _pow1m_minus1(rho1 * rho2, alpha)
    s13 = _pow1m(rho1 * rho, alpha)
    s23m1 = _pow1m_minus1(rho2 * rho, alpha)
    return (rho2 - rho1) * s12m1 + 2.0 * rho2 - (rho1 + rho2) * s13 + (rho1 + rho2) * s23m1


def lemma2_A(p: Lemma2Point) -> float:
    return float(lemma2_A_array(p.rho1, p.rho2, p.rho, p.alpha))


def lemma2_g(p: Lemma2Point, rho) -> float:
    """g(rho) = (1 - rho1 rho)^alpha - (1 - rho2 rho)^alpha."""
    return float(_pow1m(p.rho1 * rho, p.alpha) - _pow1m(p.rho2 * rho, p.alpha))


def _require_interior(p: Lemma2Point):
    if p.rho2 == 0:
        raise DomainViolation("rho2 = 0 has no interior stationary point")


def lemma2_rho0(p: Lemma2Point) -> float:
    """Unique stationary point of g, from rho1 rho0 = (1 - q^u) / (1 - q^(u+1))."""
    _require_interior(p)
    lq = math.log(p.q)
    ratio = math.expm1(p.u * lq) / math.expm1((p.u + 1.0) * lq)
    return ratio / p.rho1


def lemma2_g_min(p: Lemma2Point) -> float:
    """Closed form g(rho0) = (q^(1+u) - 1) ((1 - q) / (1 - q^(1+u)))^alpha."""
    _require_interior(p)
    q, u = p.q, p.u
    one_minus = -math.expm1((1.0 + u) * math.log(q))
    return -one_minus * ((1.0 - q) / one_minus) ** p.alpha


def lemma2_B(p: Lemma2Point, rho=None) -> float:
    """B = A / (-rho1) = (1 - q)(1 - rho1^2 q)^alpha + (1 + q) g(rho); rho defaults to rho0."""
    q = p.q
    g = lemma2_g_min(p) if rho is None else lemma2_g(p, rho)
    return (1.0 - q) * float(_pow1m(p.rho1**2 * q, p.alpha)) + (1.0 + q) * g


def lemma2_C(q: float, alpha: float) -> float:
    """C = (1 - q)(1 - (1 + q)(1 - q)^(alpha-1) / (1 - q^(1+u))^(alpha-1)), u = 1/(alpha-1)."""
    u = 1.0 / (alpha - 1.0)
    one_minus = -math.expm1((1.0 + u) * math.log(q))
    return (1.0 - q) * (1.0 - (1.0 + q) * ((1.0 - q) / one_minus) ** (alpha - 1.0))


def lemma2_margin(p: Lemma2Point) -> float:
    """A / ((rho2 - rho1) s13): A with its trivial vanishing factors divided out."""
    s13 = float(_pow1m(p.rho1 * p.rho, p.alpha))
    return lemma2_A(p) / ((p.rho2 - p.rho1) * s13)


def laguerre_f(q, u):
    """f(q) = (1 + q)^u (1 - q) + q^(1+u) - 1, computed without cancellation."""
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        second = q * np.expm1(u * np.log(q))
    out = (1.0 - q) * np.expm1(u * np.log1p(q)) + np.where(q > 0, second, 0.0)
    return float(out) if out.ndim == 0 else out


def laguerre_fprime(q, u):
    """f'(q) = -(1 + u)(1 + q)^u + 2u (1 + q)^(u-1) + (1 + u) q^u."""
    q = np.asarray(q, dtype=float)
    return -(1 + u) * (1 + q) ** u + 2 * u * (1 + q) ** (u - 1) + (1 + u) * q**u


def laguerre_trinomial(x, u):
    """The factor -(1 + u) + 2u (1 - x) + (1 + u) x^u of f'(q)/(1 + q)^u, x = q/(1+q)."""
    x = np.asarray(x, dtype=float)
    return -(1 + u) + 2 * u * (1 - x) + (1 + u) * x**u


def sign_changes(values) -> int:
    v = np.sign(np.asarray(values, dtype=float))
    v = v[v != 0]
    return int(np.sum(v[1:] != v[:-1]))


def lemma1_products(deltas, m) -> dict:
    """(Delta_i/m_i - Delta_j/m_j)(Delta_i - Delta_j) for every pair i < j."""
    d = np.asarray(deltas, dtype=float)
    w = d / as_masses(m).masses
    return {
        (i, j): float((w[i] - w[j]) * (d[i] - d[j]))
        for i, j in itertools.combinations(range(d.size), 2)
    }


@dataclass(frozen=True)
class Lemma3Point:
    deltas: np.ndarray
    masses: object
    exponent: object

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        m = as_masses(self.masses)
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "exponent", as_exponent(self.exponent))
        mv = m.masses
        if d.size != mv.size:
            raise HypothesisViolation("coordinate and mass counts differ")
        if abs(d.sum()) > 1e-12 * max(1.0, np.max(np.abs(d))):
            raise HypothesisViolation("coordinates must sum to zero")
        if not d[0] / mv[0] < d[1] / mv[1]:
            raise HypothesisViolation("Delta_1/m_1 < Delta_2/m_2 fails")
        if not d[1] / mv[1] <= 0:
            raise HypothesisViolation("Delta_2/m_2 <= 0 fails")
        if not d[0] * d[1] < mv[0] * mv[1]:
            raise HypothesisViolation("Delta_1 Delta_2 < m_1 m_2 fails")
        if np.any(d[2:] < 0):
            raise HypothesisViolation("Delta_i >= 0 for i >= 3 fails")

    def distances(self) -> np.ndarray:
        return delta_to_distances(self.deltas, self.masses, self.exponent).entries


@dataclass(frozen=True)
class Lemma3Result:
    t1_minus_t2: float
    Z: float
    k: int
    s1: float
    s2: float
    A: float | None


def lemma3_check(p: Lemma3Point) -> Lemma3Result:
    """t_1 - t_2 and its lower bound Z.

    Z = (Delta_2 - Delta_1) s12 - (Delta_1 + Delta_2)(s1k - s2k) where k >= 3
    minimizes s1k - s2k.  ``A`` is the lemma-2 function at (Delta_1/m_1,
    Delta_2/m_2, Delta_k/m_k), which bounds Z/m_2 from below when m_1 >= m_2.
    """
    d, mv = p.deltas, p.masses.masses
    s = p.distances()
    t = t_values(d, s)
    diffs = s[0, 2:] - s[1, 2:]
    k = 2 + int(np.argmin(diffs))
    z = (d[1] - d[0]) * s[0, 1] - (d[0] + d[1]) * (s[0, k] - s[1, k])
    s1 = -s[0, 1] - s[0, k] + s[1, k]
    s2 = s[0, 1] - s[0, k] + s[1, k]
    try:
        a = lemma2_A(Lemma2Point(d[0] / mv[0], d[1] / mv[1], d[k] / mv[k], p.exponent.alpha))
    except DomainViolation:
        a = None
    return Lemma3Result(float(t[0] - t[1]), float(z), k, float(s1), float(s2), a)


# ---------------------------------------------------------------------------
# Sampling certification


@dataclass
class PropertyReport:
    lemma: str
    samples: int
    min_value: float
    argmin: dict
    seed: int
    passed: bool
    details: dict | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out


def sample_lemma2(n: int, rng, rho1_range=(-50.0, 0.0), rho_max=50.0, alpha_range=(-8.0, -0.02)):
    """Seeded points with rho1 < rho2 <= 0, rho1 rho2 < 1, 0 <= rho <= rho_max."""
    rho1 = -rng.uniform(0.0, -rho1_range[0], n)
    rho1 = np.where(rho1 == 0.0, -1e-9, rho1)
    lower = np.where(rho1 < -1.0, 1.0 / rho1, rho1)
    # uniform on (lower, 0]; rho1 * rho2 < 1 holds since |rho2| < 1/|rho1| when rho1 < -1
    rho2 = lower * rng.uniform(0.0, 1.0, n)
    rho = rng.uniform(0.0, rho_max, n)
    alpha = rng.uniform(alpha_range[0], alpha_range[1], n)
    return rho1, rho2, rho, alpha


def lemma2_property(samples: int = 100_000, seed: int = DEFAULT_SEED, threshold: float = 1e-12) -> PropertyReport:
    """A > threshold on seeded samples, plus B > C > 0 where rho2 < 0."""
    rng = np.random.default_rng(seed)
    r1, r2, r, al = sample_lemma2(samples, rng)
    a = lemma2_A_array(r1, r2, r, al)
    i = int(np.argmin(a))
    chain_fail = 0
    interior = np.flatnonzero(r2 < 0)
    for j in interior[: min(interior.size, 2000)]:
        p = Lemma2Point(r1[j], r2[j], r[j], al[j])
        b = lemma2_B(p, rho=r[j])
        b0 = lemma2_B(p)
        c = lemma2_C(p.q, p.alpha)
        if not (b >= b0 * (1 - 1e-12) - 1e-300 and b0 > c > 0):
            chain_fail += 1
    return PropertyReport(
        lemma="lemma2",
        samples=samples,
        min_value=float(a[i]),
        argmin={"rho1": float(r1[i]), "rho2": float(r2[i]), "rho": float(r[i]), "alpha": float(al[i])},
        seed=seed,
        passed=bool(a[i] > threshold and chain_fail == 0),
        details={"chain_checked": int(min(interior.size, 2000)), "chain_failures": chain_fail},
    )


def _unpack_box(x):
    rho1 = -50.0 * x[0]
    qmax = min(1.0, 1.0 / rho1**2)
    rho2 = rho1 * x[1] * qmax * (1 - 1e-12)
    return float(rho1), float(rho2), float(50.0 * x[2]), float(-8.0 + (8.0 - 0.02) * x[3])


def lemma2_minimize(runs: int = 100, seed: int = DEFAULT_SEED, objective: str = "A") -> PropertyReport:
    """Bounded L-BFGS-B searches for small values over the sampling box.

    ``objective="A"`` minimizes A itself; ``"margin"`` minimizes
    :func:`lemma2_margin`, which does not tend to zero on the boundary
    faces rho2 = rho1 and rho2 = 0.  The report passes when no run gets
    to 1e-12 or below.
    """
    rng = np.random.default_rng(seed)

    def obj(x):
        r1, r2, r, al = _unpack_box(x)
        p = Lemma2Point(r1, r2 if r2 > r1 else r1 * (1 - 1e-15), r, al)
        return lemma2_A(p) if objective == "A" else lemma2_margin(p)

    bounds = [(1e-9, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]
    best, best_x = math.inf, None
    for _ in range(runs):
        x0 = rng.uniform(0.01, 0.99, 4)
        res = minimize(obj, x0, method="L-BFGS-B", bounds=bounds,
                       options={"ftol": 1e-300, "gtol": 1e-300, "maxiter": 10_000})
        if res.fun < best:
            best, best_x = float(res.fun), res.x
    r1, r2, r, al = _unpack_box(best_x)
    return PropertyReport(
        lemma=f"lemma2-minimizer-{objective}",
        samples=runs,
        min_value=best,
        argmin={"rho1": r1, "rho2": r2, "rho": r, "alpha": al},
        seed=seed,
        passed=bool(best > 1e-12),
    )


def laguerre_property(samples: int = 10_000, seed: int = DEFAULT_SEED, n_u: int = 50) -> PropertyReport:
    """f > 0 on sampled (q, u) in (0,1) x (-1,0); f(1) = 0 and f'(1) < 0 for
    ``n_u`` values of u; at most two sign changes of f' on a q-grid."""
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.0, 1.0, samples)
    q = np.where(q == 0.0, 1e-12, q)
    u = -rng.uniform(0.0, 1.0, samples)
    u = np.where(u == 0.0, -1e-12, u)
    u = np.where(u == -1.0, -1 + 1e-12, u)
    f = np.array([laguerre_f(qi, ui) for qi, ui in zip(q, u)])
    i = int(np.argmin(f))
    us = -np.linspace(0.0, 1.0, n_u + 2)[1:-1]
    f_at_1 = [laguerre_f(1.0, ui) for ui in us]
    fp_at_1 = [-(2.0**ui) + 1.0 + ui for ui in us]
    qgrid = np.geomspace(1e-8, 1e4, 4000)
    max_changes = max(sign_changes(laguerre_fprime(qgrid, ui)) for ui in us)
    ok = bool(f[i] > 0 and all(v == 0.0 for v in f_at_1) and all(v < 0 for v in fp_at_1)
              and max_changes <= 2)
    return PropertyReport(
        lemma="laguerre",
        samples=samples,
        min_value=float(f[i]),
        argmin={"q": float(q[i]), "u": float(u[i])},
        seed=seed,
        passed=ok,
        details={"max_fprime_at_1": float(max(fp_at_1)), "max_sign_changes": max_changes},
    )


def sample_lemma3(rng, n: int = 4, a_range=(-3.0, -0.1), mass_range=(0.2, 5.0)) -> Lemma3Point:
    """One seeded point satisfying the hypotheses of the t_1 > t_2 lemma."""
    lo, hi = np.log(mass_range[0]), np.log(mass_range[1])
    while True:
        mv = np.exp(rng.uniform(lo, hi, n))
        a = rng.uniform(*a_range)
        w1 = -rng.uniform(0.0, 3.0)
        lower = 1.0 / w1 if w1 < -1.0 else w1
        w2 = lower * rng.uniform()
        if not w1 < w2 <= 0 or w1 == 0:
            continue
        d = np.empty(n)
        d[0], d[1] = w1 * mv[0], w2 * mv[1]
        split = rng.dirichlet(np.ones(n - 2))
        d[2:] = -(d[0] + d[1]) * split
        d[2:] = np.maximum(d[2:], 0.0)
        d[-1] = -(d[:-1].sum())
        w = d / mv
        p = np.outer(w, w)
        np.fill_diagonal(p, 0.0)
        if np.all(p < 1.0 - 1e-9) and d[-1] >= 0:
            try:
                return Lemma3Point(d, mv, a)
            except HypothesisViolation:
                continue


def lemma3_property(samples: int = 10_000, seed: int = DEFAULT_SEED, n: int = 4) -> PropertyReport:
    """t_1 - t_2 >= Z everywhere; t_1 - t_2 > 0 and Z/m_2 >= A > 0 when m_1 >= m_2."""
    rng = np.random.default_rng(seed)
    bound_viol = pos_viol = chain_viol = 0
    worst, worst_arg = math.inf, {}
    for _ in range(samples):
        p = sample_lemma3(rng, n=n)
        r = lemma3_check(p)
        slack = 1e-12 * (abs(r.Z) + abs(r.t1_minus_t2) + 1.0)
        gap = r.t1_minus_t2 - r.Z
        if gap < -slack:
            bound_viol += 1
        mv = p.masses.masses
        if mv[0] >= mv[1]:
            if not (r.t1_minus_t2 > 0 and r.Z > 0):
                pos_viol += 1
            if r.A is None or not (r.Z / mv[1] >= r.A * (1 - 1e-12) and r.A > 0):
                chain_viol += 1
            if r.t1_minus_t2 < worst:
                worst = r.t1_minus_t2
                worst_arg = {"deltas": p.deltas.tolist(), "masses": mv.tolist(), "a": p.exponent.a}
    return PropertyReport(
        lemma="lemma3",
        samples=samples,
        min_value=float(worst),
        argmin=worst_arg,
        seed=seed,
        passed=bound_viol == pos_viol == chain_viol == 0,
        details={"bound_violations": bound_viol, "positivity_violations": pos_viol,
                 "chain_violations": chain_viol},
    )


def lemma1_property(samples: int = 20, seed: int = DEFAULT_SEED) -> PropertyReport:
    """Lemma-1 products >= 0 on solver outputs for seeded random 4-body masses."""
    from .dziobek import find_roots

    rng = np.random.default_rng(seed)
    worst, worst_arg, checked = math.inf, {}, 0
    for k in range(samples):
        mv = np.exp(rng.uniform(np.log(0.2), np.log(5.0), 4))
        a = float(rng.choice([-1.5, -1.0, -0.5]))
        for sol in find_roots(mv, a, "--++", seed=k).accepted:
            checked += 1
            prods = lemma1_products(sol.deltas, sol.masses)
            v = min(prods.values())
            if v < worst:
                worst, worst_arg = v, {"masses": mv.tolist(), "a": a, "deltas": sol.deltas.tolist()}
    return PropertyReport(
        lemma="lemma1",
        samples=checked,
        min_value=float(worst),
        argmin=worst_arg,
        seed=seed,
        passed=bool(checked > 0 and worst >= -1e-12),
    )


PROPERTY_SUITES = {
    "lemma1": lemma1_property,
    "lemma2": lemma2_property,
    "lemma3": lemma3_property,
    "laguerre": laguerre_property,
}
