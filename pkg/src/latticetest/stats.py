"""Correlation analysis between two grade lists.

Pearson and Spearman coefficients with significance through the
t-approximation: t = r*sqrt((n-2)/(1-r^2)) referred to a Student-t
distribution with n-2 degrees of freedom. The two-tailed tail probability
comes from the regularized incomplete beta function, evaluated by
continued fraction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence


class StatsError(ValueError):
    """Degenerate or mismatched input data."""


class PerfectCorrelation(StatsError):
    """|r| = 1: the t statistic is infinite."""


def _check_pair(xs: Sequence[float], ys: Sequence[float]) -> int:
    if len(xs) != len(ys):
        raise StatsError(f"paired lists differ in length: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise StatsError(f"need at least 3 pairs, got {len(xs)}")
    return len(xs)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    n = _check_pair(xs, ys)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0 or var_y == 0:
        raise StatsError("correlation is undefined for a constant list")
    return math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)


def rankdata(values: Sequence[float]) -> list[float]:
    """Ranks starting at 1; tied values share the average of their ranks."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: Pearson applied to (average-tie) ranks."""
    _check_pair(xs, ys)
    return pearson(rankdata(xs), rankdata(ys))


def t_statistic(r: float, n: int) -> float:
    """t = r*sqrt((n-2)/(1-r^2)) for testing a correlation against zero."""
    if n < 3:
        raise StatsError(f"need n >= 3, got {n}")
    if abs(r) > 1:
        raise StatsError(f"correlation {r} outside [-1, 1]")
    if abs(r) == 1:
        raise PerfectCorrelation("|r| = 1 gives an infinite t statistic")
    return r * math.sqrt((n - 2) / (1.0 - r * r))


def p_two_tailed(t: float, df: int) -> float:
    """Two-tailed Student-t tail probability via the incomplete beta function."""
    if df < 1:
        raise StatsError(f"degrees of freedom must be >= 1, got {df}")
    if t == 0:
        return 1.0
    x = df / (df + t * t)
    return betainc_regularized(df / 2.0, 0.5, x)


# ---------------------------------------------------------------------------
# Regularized incomplete beta, continued-fraction evaluation
# ---------------------------------------------------------------------------

_CF_EPS = 1e-10
_CF_TINY = 1e-300
_CF_MAX_ITER = 300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz iteration)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise StatsError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise StatsError("beta parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise StatsError(f"x = {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(log_front)
    # use the fast-converging side of the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationReport:
    n: int
    pearson_r: float
    pearson_t: float
    pearson_p: float
    spearman_r: float
    spearman_p: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "pearson_r": self.pearson_r,
            "pearson_t": self.pearson_t,
            "pearson_p": self.pearson_p,
            "spearman_r": self.spearman_r,
            "spearman_p": self.spearman_p,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _significance(r: float, n: int) -> tuple[float, float]:
    # perfectly monotone or linear data: report the degenerate limit rather
    # than failing, since t_statistic already flags it as a distinct error
    try:
        t = t_statistic(r, n)
    except PerfectCorrelation:
        return math.inf if r > 0 else -math.inf, 0.0
    return t, p_two_tailed(t, n - 2)


def correlation_report(xs: Sequence[float], ys: Sequence[float]) -> CorrelationReport:
    """Pearson and Spearman coefficients with t-approximation p-values."""
    n = _check_pair(xs, ys)
    r_pearson = pearson(xs, ys)
    r_spearman = spearman(xs, ys)
    t_p, p_p = _significance(r_pearson, n)
    _, p_s = _significance(r_spearman, n)
    return CorrelationReport(
        n=n,
        pearson_r=r_pearson,
        pearson_t=t_p,
        pearson_p=p_p,
        spearman_r=r_spearman,
        spearman_p=p_s,
    )
