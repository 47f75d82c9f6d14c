"""Render per-city statistics into map overlays and tables.

Four formats: the tab-separated waypoint upload text (ztest.txt), GeoJSON,
the per-city statistics CSV (the ucities table), and a self-contained HTML
map.  All emitters are pure functions; identical input gives byte-identical
output.  A shared set of display-format helpers keeps values consistent
across formats and across CSV round-trips.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .addresses import CityKey
from .geocode import GeoPoint
from .stats import CityStats, Color

COLOR_HEX = {
    Color.DARK_GREEN: "#006400",
    Color.LIGHT_GREEN: "#90EE90",
    Color.LIME_GREEN: "#32CD32",
    Color.GREY: "#808080",
    Color.ORANGE: "#FFA500",
    Color.ORANGE_RED: "#FF4500",
    Color.RED: "#FF0000",
}

TABLE_HEADER = [
    "city", "region", "country", "n", "observed", "expected", "ratio",
    "z", "p_value", "testable", "significant", "color", "radius", "lat", "lon",
]

MAX_DISPLAY_RADIUS = 30  # upload parameter of the reference visualizer


@dataclass(frozen=True)
class OverlayDocument:
    format: str
    text: str
    feature_count: int


def fmt2(value) -> str:
    return f"{float(value):.2f}"


def fmt_coord(value: float) -> str:
    return f"{value:.5f}"


def fmt_z(value: float) -> str:
    return f"{value:.4f}"


def fmt_p(value: float) -> str:
    return f"{value:.6g}"


def fmt_radius(value: float) -> str:
    return f"{value:g}"


def desc_string(s: CityStats) -> str:
    star = "*" if s.significant else ""
    return f"obs: {s.n_o}, exp: {fmt2(s.n_e)}, ratio: {fmt2(s.ratio)}{star}"


def _visible(stats: Sequence[CityStats]) -> list[CityStats]:
    return [s for s in stats if not s.point.failed]


def emit_gpsviz(stats: Sequence[CityStats]) -> OverlayDocument:
    """Waypoint upload text: name, desc, coordinates, color name, and the
    custom resize field carrying the circle radius."""
    visible = _visible(stats)
    lines = ["name\tdesc\tlatitude\tlongitude\tcolor\tn"]
    for s in visible:
        lines.append(
            "\t".join(
                [
                    s.key.render(),
                    desc_string(s),
                    fmt_coord(s.point.lat),
                    fmt_coord(s.point.lon),
                    s.color.value,
                    fmt_radius(s.radius),
                ]
            )
        )
    omitted = len(stats) - len(visible)
    if omitted:
        lines.append(f"# {omitted} cities omitted (geocoding failed)")
    return OverlayDocument(format="gpsviz", text="\n".join(lines) + "\n", feature_count=len(visible))


def _properties(s: CityStats) -> dict:
    return {
        "city": s.key.city,
        "region": s.key.region,
        "country": s.key.country,
        "n": s.n,
        "observed": s.n_o,
        "expected": float(fmt2(s.n_e)),
        "ratio": float(fmt2(s.ratio)),
        "z": float(fmt_z(s.z)),
        "p_value": float(fmt_p(s.p_value)),
        "significant": s.significant,
        "color": COLOR_HEX[s.color],
        "radius": s.radius,
    }


def emit_geojson(stats: Sequence[CityStats]) -> OverlayDocument:
    visible = _visible(stats)
    features = [
        {
            "type": "Feature",
            "geometry": {
                "type": "Point",
                "coordinates": [float(fmt_coord(s.point.lon)), float(fmt_coord(s.point.lat))],
            },
            "properties": _properties(s),
        }
        for s in visible
    ]
    doc = {"type": "FeatureCollection", "features": features}
    text = json.dumps(doc, ensure_ascii=False, separators=(",", ": "), indent=2) + "\n"
    return OverlayDocument(format="geojson", text=text, feature_count=len(visible))


def emit_table(stats: Sequence[CityStats]) -> OverlayDocument:
    """The ucities statistics table; includes cities whose geocoding failed."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for s in stats:
        writer.writerow(
            [
                s.key.city,
                s.key.region or "",
                s.key.country,
                s.n,
                s.n_o,
                fmt2(s.n_e),
                fmt2(s.ratio),
                fmt_z(s.z),
                fmt_p(s.p_value),
                "true" if s.testable else "false",
                "true" if s.significant else "false",
                s.color.value,
                fmt_radius(s.radius),
                fmt_coord(s.point.lat),
                fmt_coord(s.point.lon),
            ]
        )
    return OverlayDocument(format="table", text=buf.getvalue(), feature_count=len(stats))


def read_table(text: str) -> list[CityStats]:
    """Parse a statistics table back into CityStats rows.

    Display precision is preserved exactly, so re-emitting any overlay from
    the parsed rows reproduces the original bytes.  The exact-rational
    intermediate proportions are not stored in the table and come back None.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != TABLE_HEADER:
        raise ValueError("unrecognized statistics table header")
    rows: list[CityStats] = []
    for row in reader:
        if not row:
            continue
        (city, region, country, n, n_o, expected, ratio, z, pv,
         testable, significant, color, radius, lat, lon) = row
        lat_f, lon_f = float(lat), float(lon)
        failed = (lat_f, lon_f) == (0.0, 0.0)
        rows.append(
            CityStats(
                key=CityKey(city=city, region=region or None, country=country),
                n=int(n),
                n_o=int(n_o),
                n_e=Fraction(expected),
                p_o=Fraction(int(n_o), int(n)),
                p_e=None,
                p_pool=None,
                z=float(z),
                p_value=float(pv),
                testable=testable == "true",
                significant=significant == "true",
                ratio=Fraction(ratio),
                color=Color(color),
                radius=float(radius),
                point=GeoPoint(lat=lat_f, lon=lon_f, source="table", failed=failed),
            )
        )
    return rows


_HTML_TEMPLATE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>__TITLE__</title>
<style>
  body { font-family: sans-serif; margin: 1em; background: #fafafa; }
  #map { border: 1px solid #ccc; background: #eef6fb; }
  circle { stroke: #333; stroke-width: 0.5; fill-opacity: 0.75; cursor: pointer; }
  #popup { position: absolute; display: none; background: #fff; border: 1px solid #555;
           padding: 6px 10px; font-size: 13px; pointer-events: none; }
</style>
</head>
<body>
<h2>__TITLE__</h2>
<svg id="map" width="1000" height="500" viewBox="0 0 1000 500">__BACKGROUND__</svg>
<div id="popup"></div>
<script>
var CITIES = __DATA__;
var MAX_DISPLAY = __MAX_DISPLAY__;
var svg = document.getElementById("map");
var popup = document.getElementById("popup");
var maxR = 0;
CITIES.forEach(function (c) { if (c.radius > maxR) maxR = c.radius; });
if (maxR <= 0) maxR = 1;
CITIES.forEach(function (c) {
  var x = (c.lon + 180) / 360 * 1000;
  var y = (90 - c.lat) / 180 * 500;
  var r = c.radius / maxR * MAX_DISPLAY;
  var el = document.createElementNS("http://www.w3.org/2000/svg", "circle");
  el.setAttribute("cx", x);
  el.setAttribute("cy", y);
  el.setAttribute("r", r);
  el.setAttribute("fill", c.color);
  el.addEventListener("click", function (ev) {
    popup.style.display = "block";
    popup.style.left = (ev.pageX + 12) + "px";
    popup.style.top = (ev.pageY + 12) + "px";
    popup.textContent = c.name + " | " + c.desc;
  });
  svg.appendChild(el);
});
document.body.addEventListener("click", function (ev) {
  if (ev.target.tagName !== "circle") popup.style.display = "none";
});
</script>
</body>
</html>
"""


def emit_html(stats: Sequence[CityStats], title: str = "Cities publishing top-cited papers",
              background_url: str | None = None) -> OverlayDocument:
    """Self-contained HTML map: inline data, SVG circles on an equirectangular
    canvas, click popups with the observed/expected label.

    ``background_url`` may point to an equirectangular world image (e.g. a
    static tile) drawn under the circles; without it the map is offline-only.
    """
    visible = _visible(stats)
    data = [
        dict(
            _properties(s),
            name=s.key.render(),
            desc=desc_string(s),
            lat=float(fmt_coord(s.point.lat)),
            lon=float(fmt_coord(s.point.lon)),
        )
        for s in visible
    ]
    background = ""
    if background_url:
        background = (
            f'<image href="{background_url}" x="0" y="0" width="1000" height="500" '
            'preserveAspectRatio="none"/>'
        )
    text = (
        _HTML_TEMPLATE
        .replace("__TITLE__", title)
        .replace("__BACKGROUND__", background)
        .replace("__DATA__", json.dumps(data, ensure_ascii=False))
        .replace("__MAX_DISPLAY__", str(MAX_DISPLAY_RADIUS))
    )
    return OverlayDocument(format="html", text=text, feature_count=len(visible))
