"""Citation percentile threshold, two-proportion z-test, colors and radii.

Per-city question: does the observed number of top-cited papers differ from
the count expected under proportional allocation (n_e = p_e * n)?  The test
is the pooled two-proportion z-test, valid only when n_e >= 5.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .addresses import CityKey, CityTally
from .geocode import GeoPoint, failed_point

DEFAULT_PERCENTILE = Fraction(1, 10)
DEFAULT_ALPHA = Fraction(1, 20)
MIN_EXPECTED = 5  # validity floor for the large-sample test


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string, or float.

    Floats go through their shortest decimal repr, so 0.10 means exactly 1/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


class Significance(enum.Enum):
    SIGNIFICANT = "significant"
    NOT_SIGNIFICANT = "not_significant"
    NOT_TESTABLE = "not_testable"


class Color(enum.Enum):
    DARK_GREEN = "darkgreen"
    LIGHT_GREEN = "lightgreen"
    LIME_GREEN = "limegreen"
    GREY = "gray"
    ORANGE = "orange"
    ORANGE_RED = "orangered"
    RED = "red"


@dataclass(frozen=True)
class ThresholdResult:
    p: Fraction          # percentile fraction
    N: int               # corpus size
    k: int               # minimum top-set size, ceil(p*N)
    c: int               # threshold citation count
    T: int               # top-set size after tie inclusion


@dataclass
class CityStats:
    key: CityKey
    n: int
    n_o: int
    n_e: Fraction
    p_o: Fraction
    p_e: Fraction | None
    p_pool: Fraction | None
    z: float
    p_value: float
    testable: bool
    significant: bool
    ratio: Fraction | None
    color: Color
    radius: float
    point: GeoPoint


def citation_threshold(citations: Sequence[int], p=DEFAULT_PERCENTILE) -> ThresholdResult:
    """Top-p% citation cutoff with tie inclusion.

    k = ceil(p*N); c is the k-th highest citation count; every record tied at
    c enters the top set, so its final size T can exceed k.
    """
    counts = list(citations)
    if not counts:
        raise ValueError("empty corpus")
    p = as_fraction(p)
    if not 0 < p < 1:
        raise ValueError(f"percentile must be in (0, 1), got {p}")
    N = len(counts)
    k = math.ceil(p * N)
    counts.sort(reverse=True)
    c = counts[k - 1]
    T = sum(1 for x in counts if x >= c)
    return ThresholdResult(p=p, N=N, k=k, c=c, T=T)


def classify_top(corpus, threshold: ThresholdResult) -> set[str]:
    """Ids of the records at or above the citation cutoff."""
    return {r.ut for r in corpus if r.times_cited >= threshold.c}


def expected_count(n: int, p_e) -> Fraction:
    return n * as_fraction(p_e)


def z_score(n: int, n_o: int, p_e) -> float:
    """Pooled two-proportion z statistic for observed vs. expected top papers.

    z = (p_o - p_e) / sqrt(p(1-p) * 2/n) with p_o = n_o/n and the pooled
    proportion p = (n_o + n*p_e) / (2n).  The pooled term is formed from exact
    rationals; only the final square root and division run in floating point.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= n_o <= n:
        raise ValueError(f"n_o must be in [0, n], got {n_o}")
    p_e = as_fraction(p_e)
    if not 0 < p_e < 1:
        raise ValueError(f"p_e must be in (0, 1), got {p_e}")
    p_o = Fraction(n_o, n)
    pool = (n_o + n * p_e) / (2 * n)
    if pool == 0 or pool == 1:
        raise ValueError("degenerate pooled proportion")
    variance = pool * (1 - pool) * Fraction(2, n)
    return float(p_o - p_e) / math.sqrt(variance)


def pooled_proportion(n: int, n_o: int, p_e) -> Fraction:
    return (n_o + n * as_fraction(p_e)) / (2 * n)


def p_value(z: float) -> float:
    """Two-sided standard-normal tail probability, 2*(1 - Phi(|z|))."""
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    return math.erfc(abs(z) / math.sqrt(2))


def significance(z: float, n_e, alpha=DEFAULT_ALPHA, m: int = 1) -> Significance:
    """Classify a test result, gated on the n_e >= 5 validity floor.

    ``m`` is the Bonferroni divisor (number of simultaneous tests); the
    default alpha of 0.05 reproduces the |z| > 1.96 criterion.
    """
    alpha = as_fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if as_fraction(n_e) < MIN_EXPECTED:
        return Significance.NOT_TESTABLE
    return (
        Significance.SIGNIFICANT
        if p_value(z) < float(alpha) / m
        else Significance.NOT_SIGNIFICANT
    )


def assign_color(n_o: int, n_e, sig: Significance) -> Color:
    """Seven-way color rule; equality of observed and expected is exact."""
    n_e = as_fraction(n_e)
    if Fraction(n_o) == n_e:
        return Color.GREY
    if n_o > n_e:
        if sig is Significance.SIGNIFICANT:
            return Color.DARK_GREEN
        if sig is Significance.NOT_SIGNIFICANT:
            return Color.LIGHT_GREEN
        return Color.LIME_GREEN
    if sig is Significance.SIGNIFICANT:
        return Color.RED
    if sig is Significance.NOT_SIGNIFICANT:
        return Color.ORANGE_RED
    return Color.ORANGE


def circle_radius(n_o: int, n_e) -> float:
    """|observed - expected| + 1; the +1 keeps circles visible at equality."""
    return float(abs(Fraction(n_o) - as_fraction(n_e)) + 1)


def city_table(
    tallies: Iterable[CityTally],
    p_e=DEFAULT_PERCENTILE,
    alpha=DEFAULT_ALPHA,
    bonferroni: bool = False,
    points: Mapping[CityKey, GeoPoint] | None = None,
) -> list[CityStats]:
    """Full per-city statistics, sorted by descending radius then key.

    With Bonferroni on, the divisor m is the number of testable cities
    (n_e >= 5); untestable cities are never part of the comparison family.
    """
    tallies = list(tallies)
    p_e = as_fraction(p_e)
    points = points or {}
    m = 1
    if bonferroni:
        m = max(1, sum(1 for t in tallies if expected_count(t.n, p_e) >= MIN_EXPECTED))

    rows: list[CityStats] = []
    for t in tallies:
        n_e = expected_count(t.n, p_e)
        z = z_score(t.n, t.n_top, p_e)
        pv = p_value(z)
        sig = significance(z, n_e, alpha=alpha, m=m)
        rows.append(
            CityStats(
                key=t.key,
                n=t.n,
                n_o=t.n_top,
                n_e=n_e,
                p_o=Fraction(t.n_top, t.n),
                p_e=p_e,
                p_pool=pooled_proportion(t.n, t.n_top, p_e),
                z=z,
                p_value=pv,
                testable=sig is not Significance.NOT_TESTABLE,
                significant=sig is Significance.SIGNIFICANT,
                ratio=Fraction(t.n_top) / n_e if n_e else None,
                color=assign_color(t.n_top, n_e, sig),
                radius=circle_radius(t.n_top, n_e),
                point=points.get(t.key, failed_point()),
            )
        )
    rows.sort(key=lambda s: (-s.radius, s.key.sort_key()))
    return rows
