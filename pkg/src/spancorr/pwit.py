"""Root degree of the limiting MST on the Poisson weighted infinite tree.

theta(lam) is the survival probability of a Poisson(lam) Galton-Watson tree
and q = 1 - theta.  The root degree is N = D1 + D2 + D3 where, given the
first outlet weight lam (with theta(lam) uniform on (0, 1)) and the first
pond size Z:
  D1 is the degree of a uniform root in a uniform labelled tree on Z vertices,
  D2 ~ Poisson(alpha(lam)) with alpha(lam) = int_lam^inf q(x) dx,
  D3 ~ Bernoulli(1/Z).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from numba import njit
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln, spence

from . import mc
from .checks import ensure

log = logging.getLogger(__name__)

POND_CAP = 10**7
PGW_CAP = 10**6
THETA_TOL = 1e-13
PI2_6 = math.pi**2 / 6
TAIL_RESAMPLES = 0


class PondOverflowError(RuntimeError):
    """The pond-size draw would exceed the hard cap."""


# ------------------------------------------------------------------ theta


def _solve_q_large(lam: float) -> float:
    # q = exp(-lam (1 - q)) is a strong contraction once lam q is small
    q = math.exp(-lam)
    for _ in range(100):
        nq = math.exp(-lam * (1 - q))
        if nq == q:
            break
        q = nq
    return q


def theta_q(lam: float) -> tuple[float, float]:
    """(theta, q) with q computed directly so it keeps full relative precision for large lam."""
    if not lam > 1:
        return 0.0, 1.0
    if lam >= 5:
        q = _solve_q_large(lam)
        return 1 - q, q
    # L(t) = -log(1-t)/t increases from 1 to infinity on (0, 1); solve L(t) = lam
    L = lambda t: -math.log1p(-t) / t - lam
    # L(t) < 1 + t near 0, so t = min(1e-12, lam - 1) lies below the root
    lo = min(1e-12, lam - 1)
    t = brentq(L, lo, 1 - 1e-15, xtol=1e-17, rtol=4 * np.finfo(float).eps, maxiter=500)
    # one Newton polish on g(t) = 1 - t - exp(-lam t)
    g = 1 - t - math.exp(-lam * t)
    dg = -1 + lam * math.exp(-lam * t)
    if dg != 0:
        t2 = t - g / dg
        if 0 < t2 < 1 and abs(1 - t2 - math.exp(-lam * t2)) <= abs(g):
            t = t2
    return t, 1 - t


def theta(lam: float) -> float:
    """Survival probability of PGW(lam); 0 for lam <= 1."""
    if not lam > 1:
        log.debug("theta(%r): subcritical, returning 0", lam)
    return theta_q(lam)[0]


def theta_residual(lam: float) -> float:
    t, q = theta_q(lam)
    return abs(q - math.exp(-lam * t))


def theta_inv(F):
    """The lam with theta(lam) = F, i.e. -log(1-F)/F."""
    F = np.asarray(F, dtype=float)
    if np.any((F <= 0) | (F >= 1)):
        raise ValueError("theta_inv needs F in (0, 1)")
    out = -np.log1p(-F) / F
    return float(out) if out.ndim == 0 else out


def theta_prime(lam: float) -> float:
    _, q = theta_q(lam)
    return q * (1 - q) / (1 - lam * q)


def beta_fn(lam: float) -> float:
    """E[1/|PGW(lam)|] with 1/inf = 0, equal to q - lam q^2 / 2."""
    _, q = theta_q(lam)
    return q - lam * q * q / 2


def alpha_closed(lam):
    """int_lam^inf q(x) dx in closed form: pi^2/6 - Li2(theta) - lam q.  Vectorised over lam via theta."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        _, q = theta_q(float(lam))
        return float(PI2_6 - spence(q) - lam * q)
    return np.array([alpha_closed(float(x)) for x in lam])


def _alpha_from_theta(F: np.ndarray, lam: np.ndarray) -> np.ndarray:
    q = 1 - F
    return np.maximum(PI2_6 - spence(q) - lam * q, 0.0)


def alpha_fn(lam: float, epsabs: float = 1e-12) -> float:
    """int_lam^inf q(x) dx by adaptive quadrature, truncated where q < 1e-16."""
    if not lam > 1:
        raise ValueError("alpha_fn needs lam > 1")
    q = lambda x: theta_q(x)[1]
    # q(x) < exp(-x/2) once theta > 1/2, so q < 1e-16 beyond x = 2*37
    upper = max(lam, 80.0)
    pts = [p for p in (1.5, 2.0, 4.0, 10.0) if lam < p < upper]
    val, err = quad(q, lam, upper, points=pts or None, epsabs=epsabs, epsrel=1e-13, limit=400)
    ensure(err <= 1e-10, f"alpha_fn quadrature error {err} at lam={lam}")
    return val


@dataclass
class ThetaTable:
    """Memoised (theta, q, theta', alpha, beta) per lam, with invariant checks."""

    tol: float = THETA_TOL
    cache: dict = field(default_factory=dict)

    def __call__(self, lam: float) -> tuple[float, float, float, float, float]:
        if lam not in self.cache:
            t, q = theta_q(lam)
            ensure(abs(q - math.exp(-lam * t)) <= self.tol, f"fixed-point residual too large at {lam}")
            ensure(0 < q < 1 / lam, f"q out of range at {lam}")
            tp = q * (1 - q) / (1 - lam * q)
            ensure(tp > 0, f"theta' not positive at {lam}")
            self.cache[lam] = (t, q, tp, alpha_closed(lam), q - lam * q * q / 2)
        return self.cache[lam]


# ------------------------------------------------------- Borel and ponds


def borel_pmf(lam: float, m):
    """e^{-lam m} (lam m)^{m-1} / m!, computed in log space."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 1):
        raise ValueError("borel_pmf needs m >= 1")
    out = np.exp(-lam * m + (m - 1) * np.log(lam * m) - gammaln(m + 1))
    return float(out) if out.ndim == 0 else out


def pond_pmf(lam: float, m):
    """P[Z = m | lam] = theta/theta' * m * borel_pmf(lam, m)."""
    t, q = theta_q(lam)
    tp = q * (1 - q) / (1 - lam * q)
    m = np.asarray(m, dtype=float)
    out = np.exp(math.log(t / tp) + np.log(m) - lam * m + (m - 1) * np.log(lam * m) - gammaln(m + 1))
    return float(out) if out.ndim == 0 else out


def pond_expectations(lam: float, mass_tol: float = 1e-13, cap: int = POND_CAP) -> dict:
    """Total mass, E[1/Z] and E[1/Z^2] given lam by direct pmf summation, with closed forms."""
    t, q = theta_q(lam)
    tp = q * (1 - q) / (1 - lam * q)
    total = e1 = e2 = 0.0
    start, block = 1, 4096
    while start <= cap:
        m = np.arange(start, min(start + block, cap + 1), dtype=float)
        p = pond_pmf(lam, m)
        total += p.sum()
        e1 += (p / m).sum()
        e2 += (p / m**2).sum()
        if 1 - total < mass_tol and p[-1] < mass_tol * 1e-3:
            break
        start += block
        block *= 2
    beta = q - lam * q * q / 2
    return {
        "lam": lam, "mass": total,
        "E_inv_Z": e1, "E_inv_Z_closed": t * q / tp,
        "E_inv_Z2": e2, "E_inv_Z2_closed": t * beta / tp,
    }


def pond_size_sampler(lam: float, seed, cap: int = POND_CAP) -> int:
    """One draw of Z given lam by inverse CDF over the exact pmf.

    The table is extended only as far as the uniform draw requires.  If the
    draw lands in the floating-point residue past cumulative mass 1 - 1e-12
    it is redrawn (and counted in ``TAIL_RESAMPLES``); a draw that needs the
    table beyond ``cap`` raises PondOverflowError.  Nothing is clipped.
    """
    global TAIL_RESAMPLES
    if not lam > 1:
        raise ValueError("pond_size_sampler needs lam > 1")
    rng = np.random.default_rng(seed)
    while True:
        u = rng.random()
        acc = 0.0
        start, block = 1, 1024
        while start <= cap:
            m = np.arange(start, min(start + block, cap + 1), dtype=float)
            p = pond_pmf(lam, m)
            c = acc + np.cumsum(p)
            k = int(np.searchsorted(c, u, side="right"))
            if k < len(m):
                return int(m[k])
            acc = c[-1]
            if acc >= 1 - 1e-12 and p[-1] < 1e-18:
                break
            start += block
            block *= 2
        else:
            raise PondOverflowError(f"pond size beyond cap {cap} at lam={lam}")
        TAIL_RESAMPLES += 1
        log.info("pond_size_sampler: redraw from tail residue %.3g at lam=%r", 1 - acc, lam)


@njit(cache=True, nogil=True)
def _borel_tanner(mu, k, cap):
    """Total progeny of a PGW(mu) forest with k roots; -1 past the cap."""
    total = k
    cur = k
    while cur > 0:
        cur = np.random.poisson(mu * cur)
        total += cur
        if total > cap:
            return -1
    return total


@njit(cache=True, nogil=True)
def _pond_root_batch(mu, alpha, seed, cap, Z, D1, D2, D3):
    np.random.seed(seed)
    over = 0
    for i in range(mu.shape[0]):
        # size-biased Borel(mu) = sum of L+1 independent Borel(mu), L geometric
        L = np.random.geometric(1.0 - mu[i]) - 1 if mu[i] > 0 else 0
        if L + 1 > cap:
            z = -1
        else:
            z = _borel_tanner(mu[i], L + 1, cap)
        D2[i] = np.random.poisson(alpha[i])
        if z < 0:
            # huge pond: D1 - 1 ~ Binomial(Z-2, 1/Z) -> Poisson(1), D3 -> 0
            over += 1
            Z[i] = -1
            D1[i] = 1 + np.random.poisson(1.0)
            D3[i] = 0
            continue
        Z[i] = z
        if z == 1:
            D1[i] = 0
        else:
            D1[i] = 1 + np.random.binomial(z - 2, 1.0 / z)
        D3[i] = 1 if np.random.random() < 1.0 / z else 0
    return over


@njit(cache=True, nogil=True)
def _pgw_batch(lam, n, seed, cap, out):
    np.random.seed(seed)
    for i in range(n):
        out[i] = _borel_tanner(lam, 1, cap)


# --------------------------------------------------------- labelled trees


def uniform_labelled_tree(size: int, seed) -> tuple[nx.Graph, int]:
    """A uniform labelled tree on ``size`` vertices from a random Pruefer code, and a uniform root."""
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = np.random.default_rng(seed)
    if size == 1:
        T = nx.Graph()
        T.add_node(0)
    elif size == 2:
        T = nx.Graph([(0, 1)])
    else:
        T = nx.from_prufer_sequence(rng.integers(0, size, size - 2).tolist())
    return T, int(rng.integers(0, size))


# ---------------------------------------------------------------- samples


@dataclass(frozen=True)
class PwitSample:
    lam: float
    Z1: int
    D1: int
    D2: int
    D3: int

    @property
    def N(self) -> int:
        return self.D1 + self.D2 + self.D3

    def check(self) -> None:
        ensure(self.N >= 1, f"N = 0 in {self}")
        ensure(self.D3 in (0, 1), f"D3 not in {{0,1}} in {self}")
        ensure(self.D1 <= self.Z1 - 1, f"D1 >= Z1 in {self}")
        if self.Z1 == 1:
            ensure(self.D1 == 0 and self.D3 == 1, f"Z1 = 1 but {self}")


def sample_root_degree(seed, tree_limit: int = 10**4) -> PwitSample:
    """One root-degree sample through the exact single-draw path.

    Ponds up to ``tree_limit`` vertices are built as explicit labelled trees;
    larger ones use the exact degree marginal 1 + Binomial(Z-2, 1/Z).
    PondOverflowError propagates.
    """
    ss = np.random.SeedSequence(seed)
    s_f, s_z, s_t, s_rest = ss.spawn(4)
    F = np.random.default_rng(s_f).random()
    while F == 0.0:
        F = np.random.default_rng(s_f.spawn(1)[0]).random()
    lam = theta_inv(F)
    Z = pond_size_sampler(lam, s_z)
    rng = np.random.default_rng(s_rest)
    if Z <= tree_limit:
        T, root = uniform_labelled_tree(Z, s_t)
        D1 = T.degree(root)
    else:
        D1 = 1 + int(rng.binomial(Z - 2, 1 / Z))
    D2 = int(rng.poisson(float(_alpha_from_theta(np.array([F]), np.array([lam]))[0])))
    D3 = int(rng.random() < 1 / Z)
    s = PwitSample(float(lam), Z, int(D1), D2, D3)
    s.check()
    return s


@dataclass
class RootDegreeBatch:
    lam: np.ndarray
    Z: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    D3: np.ndarray
    overflow: int

    @property
    def N(self) -> np.ndarray:
        return self.D1 + self.D2 + self.D3


def sample_root_degrees(n: int, seed, cap: int = POND_CAP) -> RootDegreeBatch:
    """Vectorised root-degree draws.  Z = -1 marks a pond that passed ``cap``."""
    ss = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    s_f, s_k = ss.spawn(2)
    F = np.random.default_rng(s_f).random(n)
    F[F == 0.0] = 2.0**-53
    lam = -np.log1p(-F) / F
    mu = lam * (1 - F)
    alpha = _alpha_from_theta(F, lam)
    Z = np.empty(n, dtype=np.int64)
    D1 = np.empty(n, dtype=np.int64)
    D2 = np.empty(n, dtype=np.int64)
    D3 = np.empty(n, dtype=np.int64)
    over = _pond_root_batch(mu, alpha, mc.int_seed(s_k), cap, Z, D1, D2, D3)
    return RootDegreeBatch(lam, Z, D1, D2, D3, int(over))


# --------------------------------------------------------------- integrals


def zeta(s: float, terms: int = 1000) -> float:
    """Riemann zeta for s > 1: direct sum plus an Euler-Maclaurin tail."""
    if s <= 1:
        raise ValueError("zeta needs s > 1")
    k = np.arange(1, terms, dtype=float)
    head = math.fsum(k**-s)
    N = float(terms)
    tail = N ** (1 - s) / (s - 1) + 0.5 * N**-s + s * N ** (-s - 1) / 12 \
        - s * (s + 1) * (s + 2) * N ** (-s - 3) / 720
    return head + tail


@dataclass(frozen=True)
class MomentIntegrals:
    I1: float
    I2: float
    combo: float
    q_integral: float
    series: float
    assembled: float

    @property
    def E_N2(self) -> float:
        return 5 + self.series

    @property
    def spread(self) -> float:
        v = (self.combo, self.q_integral, self.series)
        return max(v) - min(v)


def _lam_quad(f) -> float:
    parts = [(1.0, 1.5), (1.5, 2.0), (2.0, 4.0), (4.0, 10.0), (10.0, 80.0)]
    return math.fsum(quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)[0] for a, b in parts)


def conditional_second_moment(F: float) -> float:
    """E[N^2 | theta(lam) = F] from the conditional pond moments and alpha."""
    lam = theta_inv(F)
    q = 1 - F
    a = PI2_6 - spence(q) - lam * q
    tp = q * (1 - q) / (1 - lam * q)
    beta = q - lam * q * q / 2
    e1 = 1 - lam * q
    e2 = F * beta / tp
    return 5 - 6 * e1 + 2 * e2 + a * a + 5 * a - 2 * a * e1


def moment_integrals() -> MomentIntegrals:
    """2 I2 - I1 three ways (lam-quadrature, q-integral, zeta series) plus the conditional assembly."""
    def tq(lam):
        return theta_q(lam)

    I1 = _lam_quad(lambda l: (lambda t, q: t * q)(*tq(l)))
    I2 = _lam_quad(lambda l: (lambda t, q: t * (q - l * q * q / 2))(*tq(l)))
    combo = _lam_quad(lambda l: (lambda t, q: t * q * (1 - l * q))(*tq(l)))
    qint = quad(lambda q: (1 + q * math.log(q) / (1 - q)) ** 2, 0, 1, epsabs=1e-14, limit=400)[0]
    z2, z3 = zeta(2), zeta(3)
    series = 1 - 2 * (z2 - 1) + 2 * (z2 + 1 - 2 * z3)
    assembled = quad(conditional_second_moment, 0, 1, epsabs=1e-13, limit=400)[0]
    return MomentIntegrals(I1, I2, combo, qint, series, assembled)


def expected_root_degree() -> float:
    """E[N] from the conditional means, as an oracle for the sampler (equals 2)."""
    def f(F):
        lam = theta_inv(F)
        q = 1 - F
        return 2 - (1 - lam * q) + (PI2_6 - spence(q) - lam * q)

    return quad(f, 0, 1, epsabs=1e-13, limit=400)[0]


def pwit_moment(n_samples: int, seed: int, threads: int = 1, level: float = 0.95) -> dict:
    """Monte Carlo E[N^2] (and E[N]) with the quadrature and series values alongside."""

    def chunk(size, ss):
        b = sample_root_degrees(size, ss)
        N = b.N.astype(float)
        return mc.Moments.of(N * N), mc.Moments.of(N), b.overflow, int((b.N < 1).sum())

    parts = mc.run_chunks(chunk, n_samples, seed, threads)
    m2 = mc.Moments.combine([p[0] for p in parts])
    m1 = mc.Moments.combine([p[1] for p in parts])
    overflow = sum(p[2] for p in parts)
    ensure(sum(p[3] for p in parts) == 0, "sampled N = 0")
    r2 = mc.EstimatorReport.from_moments("E_N2", m2, seed, level)
    r1 = mc.EstimatorReport.from_moments("E_N", m1, seed, level)
    ints = moment_integrals()
    if overflow:
        log.info("pwit_moment: %d of %d ponds passed the cap", overflow, n_samples)
    return {
        "target": "E_N2",
        "mc_estimate": r2.estimate,
        "stderr": r2.standard_error,
        "ci": [r2.ci_low, r2.ci_high],
        "n_samples": n_samples,
        "seed": seed,
        "quadrature_value": 5 + ints.combo,
        "q_integral_value": 5 + ints.q_integral,
        "series_value": 10 - 4 * zeta(3),
        "assembled_value": ints.assembled,
        "z_score": r2.z_score(10 - 4 * zeta(3)),
        "E_N": r1.estimate,
        "E_N_stderr": r1.standard_error,
        "truncation_mass": overflow / n_samples,
        "pond_cap": POND_CAP,
    }


# ------------------------------------------------------------------- PGW


def pgw_progeny(lam: float, n: int, seed, cap: int = PGW_CAP) -> np.ndarray:
    """Total progeny of n PGW(lam) trees; -1 for trees that passed ``cap`` (treated as infinite)."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    out = np.empty(n, dtype=np.int64)
    _pgw_batch(float(lam), n, mc.int_seed(ss), cap, out)
    return out


def pgw_beta_check(lam: float, n_samples: int, seed: int, threads: int = 1, level: float = 0.95) -> dict:
    """Estimate E[1/|PGW(lam)|] (1/inf = 0) by simulation and compare with q - lam q^2/2."""
    if not lam > 1:
        raise ValueError("pgw_beta_check needs lam > 1")

    def chunk(size, ss):
        t = pgw_progeny(lam, size, ss)
        inv = np.where(t > 0, 1.0 / np.maximum(t, 1), 0.0)
        return mc.Moments.of(inv), int((t < 0).sum())

    parts = mc.run_chunks(chunk, n_samples, seed, threads)
    r = mc.EstimatorReport.from_moments("beta", mc.Moments.combine([p[0] for p in parts]), seed, level)
    exploded = sum(p[1] for p in parts)
    target = beta_fn(lam)
    return {
        "lam": lam, "estimate": r.estimate, "stderr": r.standard_error,
        "closed_form": target, "z_score": r.z_score(target), "within_4sigma": r.within(target),
        "exploded_fraction": exploded / n_samples, "theta": theta(lam), "n_samples": n_samples,
    }
