import json
from fractions import Fraction

import pytest

from topcities.addresses import CityKey, CityTally
from topcities.emit import (
    COLOR_HEX,
    emit_geojson,
    emit_gpsviz,
    emit_html,
    emit_table,
    read_table,
)
from topcities.geocode import GeoPoint
from topcities.stats import Color, city_table


def build_stats(rows, points=None):
    tallies = [CityTally(key=k, n=n, n_top=n_top, occurrences=n) for k, n, n_top in rows]
    return city_table(tallies, points=points or {})


KIEV = CityKey("KIEV", None, "UKRAINE")
LONDON = CityKey("LONDON", None, "ENGLAND")
BERLIN = CityKey("BERLIN", None, "GERMANY")

POINTS = {
    KIEV: GeoPoint(50.4501, 30.5234, "gazetteer"),
    LONDON: GeoPoint(51.5074, -0.1278, "gazetteer"),
    BERLIN: GeoPoint(52.52, 13.405, "gazetteer"),
}


@pytest.fixture
def psych_stats():
    return build_stats(
        [(KIEV, 235, 1), (LONDON, 715, 147), (BERLIN, 194, 45)], points=POINTS
    )


def test_gpsviz_london_desc(psych_stats):
    doc = emit_gpsviz(psych_stats)
    london = next(line for line in doc.text.splitlines() if line.startswith("LONDON"))
    assert "obs: 147, exp: 71.50, ratio: 2.06*" in london


def test_gpsviz_header_and_radius_column(psych_stats):
    doc = emit_gpsviz(psych_stats)
    lines = doc.text.splitlines()
    assert lines[0] == "name\tdesc\tlatitude\tlongitude\tcolor\tn"
    london = next(line for line in lines if line.startswith("LONDON")).split("\t")
    assert london[-1] == "76.5"
    assert london[-2] == "darkgreen"


def test_gpsviz_empty():
    doc = emit_gpsviz([])
    assert doc.text == "name\tdesc\tlatitude\tlongitude\tcolor\tn\n"
    assert doc.feature_count == 0


def test_failed_geocode_omitted_from_overlay_present_in_table():
    stats = build_stats([(KIEV, 235, 1), (LONDON, 715, 147)], points={LONDON: POINTS[LONDON]})
    gpsviz = emit_gpsviz(stats)
    assert "KIEV" not in gpsviz.text
    assert "# 1 cities omitted (geocoding failed)" in gpsviz.text
    table = emit_table(stats)
    assert "KIEV" in table.text
    assert table.feature_count == 2


def test_geojson_single_grey_city():
    key = CityKey("A", None, "TESTLAND")
    stats = build_stats([(key, 50, 5)], points={key: GeoPoint(1.0, 2.0, "fake")})
    doc = emit_geojson(stats)
    parsed = json.loads(doc.text)
    assert parsed["type"] == "FeatureCollection"
    (feature,) = parsed["features"]
    assert feature["properties"]["radius"] == 1
    assert feature["properties"]["color"] == COLOR_HEX[Color.GREY]
    assert feature["geometry"]["coordinates"] == [2.0, 1.0]


def test_geojson_kiev_values(psych_stats):
    doc = emit_geojson(psych_stats)
    features = json.loads(doc.text)["features"]
    kiev = next(f for f in features if f["properties"]["city"] == "KIEV")
    assert kiev["properties"]["z"] == pytest.approx(-4.669, abs=1e-3)
    assert kiev["properties"]["color"] == COLOR_HEX[Color.RED]


def test_geojson_feature_count_matches_visible(psych_stats):
    stats = psych_stats + build_stats([(CityKey("LOST", None, "NOWHERE"), 10, 1)])
    doc = emit_geojson(stats)
    assert doc.feature_count == len(json.loads(doc.text)["features"]) == 3


def test_table_berlin_ratio(psych_stats):
    doc = emit_table(psych_stats)
    berlin = next(line for line in doc.text.splitlines() if line.startswith("BERLIN"))
    assert ",2.32," in berlin


def test_table_row_count_includes_failures(psych_stats):
    stats = psych_stats + build_stats([(CityKey("LOST", None, "NOWHERE"), 10, 1)])
    doc = emit_table(stats)
    assert len(doc.text.splitlines()) == 1 + len(stats)


def test_table_round_trip_reproduces_outputs(psych_stats):
    table = emit_table(psych_stats)
    restored = read_table(table.text)
    assert emit_table(restored).text == table.text
    assert emit_gpsviz(restored).text == emit_gpsviz(psych_stats).text
    assert emit_geojson(restored).text == emit_geojson(psych_stats).text
    assert emit_html(restored).text == emit_html(psych_stats).text


def test_read_table_rejects_foreign_header():
    with pytest.raises(ValueError):
        read_table("a,b,c\n1,2,3\n")


def test_emitters_deterministic(psych_stats):
    for emitter in (emit_gpsviz, emit_geojson, emit_table, emit_html):
        assert emitter(psych_stats).text == emitter(psych_stats).text


def test_city_sets_agree_across_overlays(psych_stats):
    gpsviz = emit_gpsviz(psych_stats).text
    geojson = json.loads(emit_geojson(psych_stats).text)
    html = emit_html(psych_stats).text
    cities = {f["properties"]["city"] for f in geojson["features"]}
    for city in cities:
        assert city in gpsviz
        assert city in html
    assert len(cities) == emit_gpsviz(psych_stats).feature_count


def test_html_popup_and_scaling(psych_stats):
    doc = emit_html(psych_stats, title="Psychology sample")
    assert "Psychology sample" in doc.text
    assert "obs: 147, exp: 71.50, ratio: 2.06*" in doc.text
    # max radius (London, 76.5) maps to 30 display units
    assert "var MAX_DISPLAY = 30;" in doc.text
    assert '"radius": 76.5' in doc.text


def test_html_background_url():
    doc = emit_html([], background_url="tiles/world.png")
    assert 'href="tiles/world.png"' in doc.text
    plain = emit_html([])
    assert "image href" not in plain.text
