"""Hypothesis-test routines vs scipy/mpmath oracles and exact enumeration."""

import math
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np
import pytest
import scipy.stats

from beliefplan.stats import WelchResult, betainc_reg, fisher_exact, welch_t


def fisher_oracle(a, b, c, d):
    """Independent two-sided Fisher via Fraction pmf comparison."""
    r1, r2, c1 = a + b, c + d, a + c
    n = r1 + r2
    if n == 0:
        return 1.0
    denom = math.comb(n, c1)
    pmf = {}
    for k in range(max(0, c1 - r2), min(r1, c1) + 1):
        pmf[k] = Fraction(math.comb(r1, k) * math.comb(r2, c1 - k), denom)
    obs = pmf[a]
    return float(sum(p for p in pmf.values() if p <= obs))


class TestFisher:
    def test_classic_table(self):
        # [[1, 9], [11, 3]]: standard worked example.
        assert fisher_exact(1, 9, 11, 3) == pytest.approx(
            0.0027594561852200836, abs=1e-15
        )

    def test_exhaustive_small_margins(self):
        # Every table with all margins <= 6 against the Fraction oracle.
        for a, b, c, d in product(range(7), repeat=4):
            if max(a + b, c + d, a + c, b + d) > 6:
                continue
            got = fisher_exact(a, b, c, d)
            want = fisher_oracle(a, b, c, d)
            assert abs(got - want) <= 1e-15, (a, b, c, d)

    def test_matches_scipy_random(self, rng):
        # Entries <= 12 keep every hypergeometric weight far from
        # scipy's tie-tolerance window, so agreement is exact.
        for _ in range(400):
            a, b, c, d = (int(v) for v in rng.integers(0, 13, size=4))
            if a + b + c + d == 0:
                continue
            want = scipy.stats.fisher_exact([[a, b], [c, d]])[1]
            assert fisher_exact(a, b, c, d) == pytest.approx(want, abs=1e-12)

    def test_symmetries(self, rng):
        for _ in range(100):
            a, b, c, d = (int(v) for v in rng.integers(0, 20, size=4))
            p = fisher_exact(a, b, c, d)
            assert fisher_exact(c, d, a, b) == p    # swap groups
            assert fisher_exact(b, a, d, c) == p    # swap outcome labels
            assert fisher_exact(a, c, b, d) == p    # transpose
            assert 0.0 <= p <= 1.0

    def test_no_association(self):
        assert fisher_exact(5, 5, 5, 5) == 1.0
        assert fisher_exact(0, 0, 0, 0) == 1.0

    def test_strong_association(self):
        assert fisher_exact(10, 0, 0, 10) < 1e-4

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            fisher_exact(1, -1, 2, 3)


class TestBetainc:
    def test_against_mpmath(self):
        mpmath.mp.dps = 30
        for a in (0.5, 1.0, 2.0, 7.5, 40.0):
            for b in (0.5, 1.0, 3.5, 12.0):
                for x in (1e-9, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0 - 1e-9):
                    want = float(mpmath.betainc(a, b, 0, x, regularized=True))
                    got = betainc_reg(a, b, x)
                    assert got == pytest.approx(want, rel=1e-10, abs=1e-12), (
                        a, b, x,
                    )

    def test_edges(self):
        assert betainc_reg(2.0, 3.0, 0.0) == 0.0
        assert betainc_reg(2.0, 3.0, 1.0) == 1.0

    def test_monotone_in_x(self):
        vals = [betainc_reg(3.0, 5.0, x) for x in np.linspace(0, 1, 50)]
        assert all(y >= x for x, y in zip(vals, vals[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            betainc_reg(0.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            betainc_reg(1.0, -2.0, 0.5)
        with pytest.raises(ValueError):
            betainc_reg(1.0, 1.0, 1.5)


def t_sf_quadrature(t, dof):
    """Two-sided tail by direct numerical integration of the t density."""
    mpmath.mp.dps = 30
    v = mpmath.mpf(dof)
    norm = mpmath.gamma((v + 1) / 2) / (mpmath.sqrt(v * mpmath.pi) * mpmath.gamma(v / 2))
    dens = lambda u: norm * (1 + u * u / v) ** (-(v + 1) / 2)
    return float(2 * mpmath.quad(dens, [abs(t), mpmath.inf]))


class TestWelch:
    def test_identical_samples(self):
        r = welch_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert r.statistic == 0.0
        assert r.pvalue == 1.0

    def test_zero_variance_unequal_means(self):
        r = welch_t([0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0])
        assert r.pvalue == 0.0
        assert math.isinf(r.statistic) and r.statistic < 0

    def test_zero_variance_equal_means(self):
        r = welch_t([2.0, 2.0], [2.0, 2.0])
        assert r.pvalue == 1.0

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            welch_t([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            welch_t([1.0, 2.0], [3.0])

    def test_against_scipy(self, rng):
        for _ in range(200):
            na = int(rng.integers(2, 30))
            nb = int(rng.integers(2, 30))
            xs = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 5), na)
            ys = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 5), nb)
            want = scipy.stats.ttest_ind(xs, ys, equal_var=False)
            got = welch_t(xs, ys)
            assert got.statistic == pytest.approx(want.statistic, rel=1e-12)
            assert got.dof == pytest.approx(want.df, rel=1e-12)
            assert got.pvalue == pytest.approx(
                want.pvalue, rel=1e-9, abs=1e-14
            )
            assert 0.0 <= got.pvalue <= 1.0

    def test_against_quadrature(self, rng):
        # Direct numerical integration of the t density as an oracle
        # fully independent of any incomplete-beta identity.
        for _ in range(10):
            xs = rng.normal(0.0, 1.0, int(rng.integers(4, 15)))
            ys = rng.normal(0.4, 2.0, int(rng.integers(4, 15)))
            got = welch_t(xs, ys)
            want = t_sf_quadrature(got.statistic, got.dof)
            assert got.pvalue == pytest.approx(want, abs=1e-10)

    def test_antisymmetric(self, rng):
        xs = list(rng.normal(0, 1, 10))
        ys = list(rng.normal(1, 2, 14))
        r1 = welch_t(xs, ys)
        r2 = welch_t(ys, xs)
        assert r1.statistic == -r2.statistic
        assert r1.pvalue == r2.pvalue
        assert r1.dof == r2.dof

    def test_equal_setup_dof(self, rng):
        # Equal sizes and true variances: Welch dof approaches 2n - 2.
        xs = list(rng.normal(0, 1, 400))
        ys = list(rng.normal(0, 1, 400))
        r = welch_t(xs, ys)
        assert r.dof == pytest.approx(798, rel=0.05)

    def test_result_type(self):
        r = welch_t([1.0, 2.0, 3.0], [2.0, 3.0, 5.0])
        assert isinstance(r, WelchResult)
        assert r.dof > 0
