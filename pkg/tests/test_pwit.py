import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chi2

from spancorr import pwit


def _bisect_theta(lam, iters=200):
    lo, hi = 1e-300, 1.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        if 1 - mid - math.exp(-lam * mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# ------------------------------------------------------------------ theta


def test_theta_at_two_against_bisection():
    assert pwit.theta(2.0) == pytest.approx(_bisect_theta(2.0), abs=1e-14)
    assert pwit.theta(2.0) == pytest.approx(0.796812, abs=1e-6)


def test_theta_subcritical_zero():
    assert pwit.theta(1.0) == 0.0 and pwit.theta(0.3) == 0.0


def test_theta_near_critical_small():
    assert 0 < pwit.theta(1 + 1e-9) < 1e-8


def test_theta_residual_grid():
    grid = np.concatenate([1 + np.logspace(-10, 0, 40), np.linspace(2, 60, 80)])
    assert max(pwit.theta_residual(float(l)) for l in grid) <= 1e-13


def test_theta_inverse_round_trip():
    for F in np.arange(0.1, 1.0, 0.1):
        assert pwit.theta(pwit.theta_inv(F)) == pytest.approx(F, abs=1e-12)


def test_theta_inv_values():
    assert pwit.theta_inv(0.5) == pytest.approx(math.log(2) / 0.5, abs=1e-15)
    assert pwit.theta_inv(1e-9) == pytest.approx(1, abs=1e-8)
    with pytest.raises(ValueError):
        pwit.theta_inv(1.0)


def test_q_bounds_and_theta_prime():
    for lam in (1.01, 1.5, 3.0, 10.0):
        t, q = pwit.theta_q(lam)
        assert 0 < q < 1 / lam
        h = 1e-6
        fd = (pwit.theta(lam + h) - pwit.theta(lam - h)) / (2 * h)
        assert pwit.theta_prime(lam) == pytest.approx(fd, rel=1e-6)


def test_theta_table_invariants():
    tab = pwit.ThetaTable()
    for lam in (1.1, 2.0, 7.5):
        t, q, tp, a, b = tab(lam)
        assert tp > 0 and b == pytest.approx(q - lam * q * q / 2)
    assert len(tab.cache) == 3


def test_two_beta_minus_q_positive():
    for lam in np.linspace(1.001, 30, 300):
        _, q = pwit.theta_q(float(lam))
        assert 2 * pwit.beta_fn(float(lam)) - q == pytest.approx(q * (1 - lam * q), abs=1e-15)
        assert q * (1 - lam * q) > 0


# ------------------------------------------------------------------ alpha


def test_alpha_against_simpson():
    # independent route: q evaluated on a fine grid, Simpson's rule; the tail beyond 40 is below e^-40
    from scipy.integrate import simpson
    x = np.linspace(2.0, 40.0, 20001)
    q = np.array([pwit.theta_q(float(v))[1] for v in x])
    assert pwit.alpha_fn(2.0) == pytest.approx(simpson(q, x=x), abs=1e-8)
    assert pwit.alpha_closed(2.0) == pytest.approx(pwit.alpha_fn(2.0), abs=1e-10)


def test_alpha_derivative_is_minus_q():
    for lam in (1.3, 2.0, 4.0):
        h = 1e-5
        fd = (pwit.alpha_fn(lam + h) - pwit.alpha_fn(lam - h)) / (2 * h)
        assert fd == pytest.approx(-pwit.theta_q(lam)[1], abs=1e-6)


def test_alpha_vanishes_at_infinity():
    assert pwit.alpha_fn(50.0) < 1e-15
    assert pwit.alpha_closed(1 + 1e-12) == pytest.approx(math.pi**2 / 6 - 1, abs=1e-6)


# ------------------------------------------------------------------ Borel


def test_borel_m1():
    assert pwit.borel_pmf(1.7, 1) == pytest.approx(math.exp(-1.7))


def test_borel_sum_is_extinction():
    for lam in (1.2, 2.0, 4.0):
        m = np.arange(1, 200000)
        assert pwit.borel_pmf(lam, m).sum() == pytest.approx(1 - pwit.theta(lam), abs=1e-10)


def test_pgw_histogram_matches_borel():
    t = pwit.pgw_progeny(2.0, 10**6, 4)
    finite = t[t > 0]
    counts = np.bincount(finite, minlength=9)[1:9].astype(float)
    p = pwit.borel_pmf(2.0, np.arange(1, 9))
    tail = len(t) - counts.sum()
    obs = np.append(counts, tail)
    exp = np.append(p, 1 - p.sum()) * len(t)
    stat = ((obs - exp) ** 2 / exp).sum()
    assert stat < chi2.ppf(0.99, len(obs) - 1)


# ------------------------------------------------------------------ ponds


@pytest.mark.parametrize("lam", [1.2, 1.5, 2.0, 3.0, 5.0])
def test_pond_pmf_normalised_and_moments(lam):
    d = pwit.pond_expectations(lam)
    assert d["mass"] == pytest.approx(1, abs=1e-10)
    assert d["E_inv_Z"] == pytest.approx(d["E_inv_Z_closed"], abs=1e-8)
    assert d["E_inv_Z2"] == pytest.approx(d["E_inv_Z2_closed"], abs=1e-8)
    _, q = pwit.theta_q(lam)
    assert d["E_inv_Z_closed"] == pytest.approx(1 - lam * q, abs=1e-12)


def test_pond_sampler_matches_pmf():
    lam = 2.0
    draws = [pwit.pond_size_sampler(lam, s) for s in range(20000)]
    c = Counter(draws)
    for m in (1, 2, 3):
        p = pwit.pond_pmf(lam, m)
        assert abs(c[m] / 20000 - p) <= 4 * (p * (1 - p) / 20000) ** 0.5


def test_pond_sampler_overflow():
    with pytest.raises(pwit.PondOverflowError):
        # a tiny cap makes a large-pond draw overflow
        for s in range(200):
            pwit.pond_size_sampler(1.01, s, cap=5)


def test_batch_pond_law_matches_pmf():
    # the spine sampler at fixed lam agrees with the pmf
    n = 200000
    mu = np.full(n, 0.0)
    lam = 1.5
    _, q = pwit.theta_q(lam)
    mu[:] = lam * q
    Z = np.empty(n, dtype=np.int64)
    D = [np.empty(n, dtype=np.int64) for _ in range(3)]
    pwit._pond_root_batch(mu, np.zeros(n), 7, pwit.POND_CAP, Z, *D)
    for m in (1, 2, 3, 5):
        p = pwit.pond_pmf(lam, m)
        got = (Z == m).mean()
        assert abs(got - p) <= 4 * (p * (1 - p) / n) ** 0.5


# ----------------------------------------------------------- labelled trees


def test_labelled_tree_size_one():
    T, root = pwit.uniform_labelled_tree(1, 0)
    assert T.number_of_nodes() == 1 and T.degree(root) == 0


def test_labelled_tree_size_three_uniform():
    c = Counter()
    n = 30000
    for s in range(n):
        T, _ = pwit.uniform_labelled_tree(3, s)
        c[tuple(sorted(tuple(sorted(e)) for e in T.edges()))] += 1
    assert len(c) == 3
    sd = (1 / 3 * 2 / 3 / n) ** 0.5
    assert all(abs(v / n - 1 / 3) <= 3 * sd for v in c.values())


def test_labelled_tree_root_degree_moment():
    n = 20
    rng = np.random.default_rng(0)
    vals = []
    for s in range(20000):
        T, root = pwit.uniform_labelled_tree(n, s)
        vals.append(T.degree(root) ** 2)
    vals = np.array(vals, float)
    target = 5 - 11 / n + 6 / n**2
    assert abs(vals.mean() - target) <= 4 * vals.std() / len(vals) ** 0.5


# ------------------------------------------------------------------ samples


def test_single_sample_invariants():
    for s in range(200):
        try:
            x = pwit.sample_root_degree(s)
        except pwit.PondOverflowError:
            continue
        x.check()
        assert x.lam > 1


def test_batch_invariants():
    b = pwit.sample_root_degrees(50000, 3)
    assert b.N.min() >= 1
    ok = b.Z > 0
    assert np.all(b.D1[ok] <= b.Z[ok] - 1)
    assert np.all((b.D3 == 0) | (b.D3 == 1))
    assert np.all(b.D3[b.Z == 1] == 1) and np.all(b.D1[b.Z == 1] == 0)


def test_mean_root_degree_is_two():
    assert pwit.expected_root_degree() == pytest.approx(2, abs=1e-10)
    r = pwit.pwit_moment(10**6, 5, threads=4)
    assert abs(r["E_N"] - 2) <= 4 * r["E_N_stderr"]


def test_single_path_against_batch_mean():
    vals = []
    for s in range(3000):
        try:
            vals.append(pwit.sample_root_degree(s).N)
        except pwit.PondOverflowError:
            pass
    vals = np.array(vals, float)
    assert abs(vals.mean() - 2) <= 4 * vals.std() / len(vals) ** 0.5


# ---------------------------------------------------------------- integrals


def test_zeta_values():
    assert pwit.zeta(2) == pytest.approx(math.pi**2 / 6, abs=1e-14)
    assert pwit.zeta(3) == pytest.approx(1.2020569031595942, abs=1e-14)


def test_moment_integrals_agree():
    m = pwit.moment_integrals()
    assert m.series == pytest.approx(5 - 4 * 1.2020569031595942, abs=1e-13)
    assert m.spread <= 1e-6
    assert m.combo == pytest.approx(0.1917723, abs=1e-7)
    assert m.assembled == pytest.approx(10 - 4 * pwit.zeta(3), abs=1e-4)
    assert 5 - m.I1 + 2 * m.I2 == pytest.approx(m.E_N2, abs=1e-8)


def test_pwit_moment_report_fields():
    r = pwit.pwit_moment(20000, 1)
    for k in ("target", "mc_estimate", "stderr", "n_samples", "quadrature_value", "series_value",
              "truncation_mass"):
        assert k in r
    assert r["target"] == "E_N2"


# ---------------------------------------------------------------- PGW beta


@pytest.mark.parametrize("lam", [1.5, 3.0])
def test_pgw_beta(lam):
    r = pwit.pgw_beta_check(lam, 200000, 2)
    assert r["within_4sigma"]
    assert r["exploded_fraction"] == pytest.approx(pwit.theta(lam), abs=5 * (0.25 / 200000) ** 0.5)


def test_beta_large_lambda_vanishes():
    assert pwit.beta_fn(60.0) < 1e-20
