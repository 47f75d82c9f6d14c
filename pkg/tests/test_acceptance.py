"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report lines.
"""

import json
import math
import random
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from click.testing import CliRunner
from scipy.stats import binom

from topcities.cli import main as cli_main
from topcities.records import parse_export_file
from topcities.stats import (
    Color,
    Significance,
    assign_color,
    citation_threshold,
    circle_radius,
    classify_top,
    expected_count,
    p_value,
    significance,
    z_score,
)

from conftest import fixture_path, fixture_text


def oracle_z(n, n_o, p_e="0.10"):
    with mpmath.workdps(60):
        n = mpmath.mpf(n)
        n_o = mpmath.mpf(n_o)
        p_e = mpmath.mpf(p_e)
        pool = (n_o + n * p_e) / (2 * n)
        return float((n_o / n - p_e) / mpmath.sqrt(pool * (1 - pool) * 2 / n))


def test_kiev_fixture():
    n, n_o = 235, 1
    start = time.perf_counter()
    z = z_score(n, n_o, 0.10)
    n_e = expected_count(n, 0.10)
    sig = significance(z, n_e)
    color = assign_color(n_o, n_e, sig)
    radius = circle_radius(n_o, n_e)
    elapsed = time.perf_counter() - start

    assert z == pytest.approx(oracle_z(n, n_o), abs=1e-3)
    assert z == pytest.approx(-4.669, abs=1e-3)
    assert color is Color.RED
    assert radius == 23.5
    assert elapsed < 1e-3


def test_london_berlin_fixtures():
    london_ne = expected_count(715, 0.10)
    london_z = z_score(715, 147, 0.10)
    london_sig = significance(london_z, london_ne)
    london_ratio = Fraction(147) / london_ne
    assert f"{float(london_ratio):.2f}" == "2.06"
    assert london_sig is Significance.SIGNIFICANT
    assert assign_color(147, london_ne, london_sig) is Color.DARK_GREEN

    berlin_ne = expected_count(194, 0.10)
    berlin_z = z_score(194, 45, 0.10)
    berlin_sig = significance(berlin_z, berlin_ne)
    berlin_ratio = Fraction(45) / berlin_ne
    assert f"{float(berlin_ratio):.2f}" == "2.32"
    assert berlin_sig is Significance.SIGNIFICANT

    assert berlin_ratio > london_ratio  # Berlin outperforms London per ratio


def test_bonferroni_correction():
    per_test = 0.05 / 90
    assert per_test == pytest.approx(5.6e-4, abs=5e-6)
    assert round(per_test, 4) == 0.0006

    z = 2.576  # two-sided p ~= 0.01
    assert 0.009 < p_value(z) < 0.011
    assert significance(z, 10, alpha=0.05, m=1) is Significance.SIGNIFICANT
    assert significance(z, 10, alpha=0.05, m=90) is Significance.NOT_SIGNIFICANT


def test_z_oracle_equivalence():
    rng = random.Random(42)
    start = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(1, 10**5)
        n_o = rng.randint(0, n)
        assert abs(z_score(n, n_o, 0.10) - oracle_z(n, n_o)) <= 1e-9
    assert time.perf_counter() - start < 5.0


def test_threshold_tie_property_suite():
    rng = random.Random(2008)
    start = time.perf_counter()
    for _ in range(10000):
        size = rng.randint(1, 60)
        citations = [rng.randint(0, rng.choice([3, 10, 40])) for _ in range(size)]
        p = Fraction(rng.choice(["0.05", "0.1", "0.2", "0.5"]))
        t = citation_threshold(citations, p)

        ranked = sorted(citations, reverse=True)
        cutoff = ranked[t.k - 1]
        top_oracle = sum(1 for c in citations if c >= cutoff)

        corpus = [type("R", (), {"ut": f"u{i}", "times_cited": c})() for i, c in enumerate(citations)]
        top = classify_top(corpus, t)
        assert len(top) == top_oracle == t.T
        assert t.T >= math.ceil(p * len(citations))
        # the tie block at the cutoff never splits
        tied = [i for i, c in enumerate(citations) if c == t.c]
        assert all(f"u{i}" in top for i in tied)
    assert time.perf_counter() - start < 30.0


def test_type_i_calibration():
    n, p_e, alpha, trials = 100, 0.10, 0.05, 100000

    # exact enumeration oracle: binomial mass where the z test rejects
    r_star = sum(
        binom.pmf(k, n, p_e)
        for k in range(n + 1)
        if abs(oracle_z(n, k)) > 1.96
    )

    start = time.perf_counter()
    rng = np.random.default_rng(20080215)
    counts = rng.binomial(n, p_e, size=trials)
    n_e = expected_count(n, p_e)
    # full z/significance path, evaluated once per distinct observed count
    rejects = {
        k: significance(z_score(n, int(k), p_e), n_e, alpha=alpha) is Significance.SIGNIFICANT
        for k in np.unique(counts)
    }
    rate = sum(rejects[k] for k in counts) / trials
    assert time.perf_counter() - start < 60.0
    assert abs(rate - r_star) <= 0.005


def test_validity_gating_exhaustive():
    for n in range(1, 50):
        n_e = expected_count(n, 0.10)
        assert n_e < 5
        for n_o in range(0, n + 1):
            sig = significance(z_score(n, n_o, 0.10), n_e)
            assert sig is Significance.NOT_TESTABLE
            color = assign_color(n_o, n_e, sig)
            assert color not in (Color.DARK_GREEN, Color.RED)


def test_end_to_end_run(tmp_path):
    runner = CliRunner()
    outputs = ("ztest.txt", "cities.geojson", "ucities.csv", "map.html")

    start = time.perf_counter()
    result = runner.invoke(
        cli_main, ["run", fixture_path("corpus50.txt"), "--out", str(tmp_path / "a")]
    )
    elapsed = time.perf_counter() - start
    assert result.exit_code == 0, result.output
    assert elapsed < 5.0

    for name in outputs:
        assert (tmp_path / "a" / name).exists()

    geojson = json.loads((tmp_path / "a" / "cities.geojson").read_text())
    assert geojson["type"] == "FeatureCollection"
    assert all(f["type"] == "Feature" and f["geometry"]["type"] == "Point"
               for f in geojson["features"])

    result = runner.invoke(
        cli_main, ["run", fixture_path("corpus50.txt"), "--out", str(tmp_path / "b")]
    )
    assert result.exit_code == 0
    for name in outputs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    # asterisks appear exactly on significant cities
    table_rows = (tmp_path / "a" / "ucities.csv").read_text().splitlines()[1:]
    significant_cities = {r.split(",")[0] for r in table_rows if ",true,true," in r}
    for line in (tmp_path / "a" / "ztest.txt").read_text().splitlines()[1:]:
        if line.startswith("#"):
            continue
        name, desc = line.split("\t")[:2]
        city = name.split(",")[0]
        assert desc.endswith("*") == (city in significant_cities), line


def test_parser_corpus_diagnostics():
    cases = {
        "clean.txt": dict(parsed=3, skipped=0),
        "truncated.txt": dict(parsed=2, skipped=0, warning="no EF"),
        "no_address.txt": dict(parsed=2, skipped=0, warning="no address"),
        "missing_tc.txt": dict(parsed=1, skipped=1, warning="times-cited"),
        "mojibake.txt": dict(parsed=1, skipped=0, warning="U+FFFD"),
    }
    for name, expected in cases.items():
        records, diags = parse_export_file(fixture_path(name))
        assert diags.records_parsed == expected["parsed"], name
        assert diags.records_skipped == expected["skipped"], name
        if "warning" in expected:
            assert any(expected["warning"] in msg for _, msg in diags.warnings), name
        er_markers = sum(
            1 for line in fixture_text(name).splitlines() if line.rstrip() == "ER"
        )
        assert diags.records_parsed + diags.records_skipped == er_markers, name

    # duplicate-ut pair
    from topcities.records import merge_exports

    corpus, diags = merge_exports([fixture_text("dup_a.txt"), fixture_text("dup_b.txt")])
    assert len(corpus) == 3
    assert any("duplicate" in msg for _, msg in diags.warnings)
