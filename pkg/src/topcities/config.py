"""Pipeline configuration: defaults, config-file parsing, validation.

Config files are line-oriented ``key = value`` pairs; ``#`` starts a comment.
Precedence is CLI flags > config file > defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    pass


ALL_FORMATS = ("gpsviz", "geojson", "table", "html")

DEFAULT_FILENAMES = {
    "gpsviz": "ztest.txt",
    "geojson": "cities.geojson",
    "table": "ucities.csv",
    "html": "map.html",
}


@dataclass
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    percentile: float = 0.10
    alpha: float = 0.05
    bonferroni: bool = False
    count_mode: str = "paper"
    empirical_share: bool = False
    doc_type: str = "Article"          # "all" disables the filter
    geocoder: str = "gazetteer"        # or "http"
    gazetteer: str | None = None       # None = bundled gazetteer
    endpoint: str | None = None
    cache: str | None = None
    pause: float = 0.1
    out_dir: str = "."
    formats: list[str] = field(default_factory=lambda: list(ALL_FORMATS))
    title: str = "Cities publishing top-cited papers"
    background_url: str | None = None
    seed: int = 0

    def validate(self) -> None:
        if not 0 < self.percentile < 1:
            raise ConfigError(f"percentile must be in (0, 1), got {self.percentile}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.count_mode not in ("paper", "occurrence"):
            raise ConfigError(f"count-mode must be paper or occurrence, got {self.count_mode!r}")
        if self.geocoder not in ("gazetteer", "http"):
            raise ConfigError(f"geocoder must be gazetteer or http, got {self.geocoder!r}")
        if self.geocoder == "http" and not self.endpoint:
            raise ConfigError("http geocoder requires an endpoint")
        unknown = set(self.formats) - set(ALL_FORMATS)
        if unknown:
            raise ConfigError(f"unknown output formats: {sorted(unknown)}")


_BOOL_KEYS = {"bonferroni", "empirical_share"}
_FLOAT_KEYS = {"percentile", "alpha", "pause"}
_INT_KEYS = {"seed"}
_LIST_KEYS = {"inputs", "formats"}


def parse_config_file(path) -> dict:
    """Read ``key = value`` settings into a dict keyed like PipelineConfig."""
    known = {f.name for f in fields(PipelineConfig)}
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _BOOL_KEYS:
                values[key] = value.lower() in ("1", "true", "yes", "on")
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _LIST_KEYS:
                values[key] = [v.strip() for v in value.split(",") if v.strip()]
            else:
                values[key] = value
    return values


def build_config(file_values: dict | None = None, **cli_values) -> PipelineConfig:
    """Merge defaults, config-file values, and CLI overrides (None = unset)."""
    merged = dict(file_values or {})
    for key, value in cli_values.items():
        if value is not None:
            merged[key] = value
    config = PipelineConfig(**merged)
    config.validate()
    return config
