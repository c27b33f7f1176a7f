"""Exact and classical hypothesis tests used by the experiment reports.

Both tests are self-contained so result tables never depend on an
optional heavyweight dependency. fisher_exact works in exact integer
arithmetic; welch_t evaluates the Student t tail through a regularized
incomplete beta continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = ["fisher_exact", "welch_t", "WelchResult", "betainc_reg"]


def fisher_exact(a: int, b: int, c: int, d: int) -> float:
    """Two-sided Fisher exact test p-value for the 2x2 table [[a, b], [c, d]].

    Sums the hypergeometric probabilities of every table with the same
    margins whose probability does not exceed the observed table's.
    All comparisons happen on exact integers (the common denominator
    cancels), so the result is correct to the final float rounding.
    """
    if min(a, b, c, d) < 0:
        raise ValueError("table entries must be non-negative")
    r1, r2 = a + b, c + d
    c1 = a + c
    n = r1 + r2
    if n == 0:
        return 1.0
    lo = max(0, c1 - r2)
    hi = min(r1, c1)
    obs = math.comb(r1, a) * math.comb(r2, c)
    total = 0
    for k in range(lo, hi + 1):
        w = math.comb(r1, k) * math.comb(r2, c1 - k)
        if w <= obs:
            total += w
    p = Fraction(total, math.comb(n, c1))
    return min(1.0, float(p))


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta (modified Lentz).
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class WelchResult:
    statistic: float
    dof: float
    pvalue: float


def welch_t(xs, ys) -> WelchResult:
    """Two-sided Welch t-test for unequal-variance sample means.

    Degrees of freedom follow Welch-Satterthwaite; the two-sided tail
    probability is I_x(dof/2, 1/2) at x = dof / (dof + t^2). Degenerate
    zero-variance inputs collapse to p = 1 for equal means and p = 0
    otherwise.
    """
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    na, nb = len(xs), len(ys)
    if na < 2 or nb < 2:
        raise ValueError("welch_t needs at least two samples per group")
    ma = sum(xs) / na
    mb = sum(ys) / nb
    va = sum((v - ma) ** 2 for v in xs) / (na - 1)
    vb = sum((v - mb) ** 2 for v in ys) / (nb - 1)
    sa, sb = va / na, vb / nb
    if sa + sb == 0.0:
        if ma == mb:
            return WelchResult(0.0, float(na + nb - 2), 1.0)
        return WelchResult(math.copysign(math.inf, ma - mb), float(na + nb - 2), 0.0)
    t = (ma - mb) / math.sqrt(sa + sb)
    dof = (sa + sb) ** 2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
    x = dof / (dof + t * t)
    p = betainc_reg(dof / 2.0, 0.5, x)
    return WelchResult(t, dof, min(1.0, max(0.0, p)))
