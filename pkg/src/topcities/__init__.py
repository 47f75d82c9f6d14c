"""topcities: find cities publishing more top-cited papers than expected."""

from .addresses import CityKey, CityOccurrence, CityTally, extract_occurrences, normalize_city, tally
from .geocode import GazetteerBackend, GeoCache, GeoPoint, HttpBackend, resolve_all
from .records import ParseDiagnostics, Record, merge_exports, parse_export
from .stats import (
    CityStats,
    Color,
    Significance,
    ThresholdResult,
    assign_color,
    citation_threshold,
    city_table,
    circle_radius,
    classify_top,
    p_value,
    significance,
    z_score,
)

__version__ = "0.1.0"

__all__ = [
    "CityKey",
    "CityOccurrence",
    "CityStats",
    "CityTally",
    "Color",
    "GazetteerBackend",
    "GeoCache",
    "GeoPoint",
    "HttpBackend",
    "ParseDiagnostics",
    "Record",
    "Significance",
    "ThresholdResult",
    "assign_color",
    "citation_threshold",
    "city_table",
    "circle_radius",
    "classify_top",
    "extract_occurrences",
    "merge_exports",
    "normalize_city",
    "p_value",
    "parse_export",
    "resolve_all",
    "significance",
    "tally",
    "z_score",
]
