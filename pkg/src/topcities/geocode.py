"""City geocoding: pluggable backends, persistent cache, failure sentinels."""

from __future__ import annotations

import importlib.resources
import os
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import requests

from .addresses import CityKey

API_KEY_ENV = "TOPCITIES_GEOCODER_KEY"
DEFAULT_CHUNK_SIZE = 1000
DEFAULT_PAUSE = 0.1


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float
    source: str
    failed: bool = False


def failed_point(source: str = "unresolved") -> GeoPoint:
    # The (0, 0) sentinel marks geocoding failures.
    return GeoPoint(lat=0.0, lon=0.0, source=source, failed=True)


class GazetteerBackend:
    """Offline lookup from a tab-separated file:
    city, region, country, lat, lon, source (region empty when absent)."""

    name = "gazetteer"

    def __init__(self, path=None):
        self.table: dict[CityKey, tuple[float, float]] = {}
        if path is None:
            resource = importlib.resources.files("topcities.data") / "gazetteer.tsv"
            text = resource.read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 5:
                continue
            key = CityKey(city=parts[0], region=parts[1] or None, country=parts[2])
            self.table[key] = (float(parts[3]), float(parts[4]))

    def resolve(self, keys: Sequence[CityKey]) -> list[tuple[float, float] | None]:
        return [self.table.get(key) for key in keys]


class HttpBackend:
    """Client for a JSON geocoding service.

    Issues one GET per key with ``city``, ``region``, ``country`` (and ``key``
    when an API key is set via the environment) as query parameters; expects a
    JSON object with ``lat`` and ``lon``, or null for a miss.
    """

    name = "http"

    def __init__(self, endpoint: str, api_key: str | None = None, session=None, retries: int = 3):
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.session = session or requests.Session()
        self.retries = retries

    def _query(self, key: CityKey):
        params = {"city": key.city, "country": key.country}
        if key.region:
            params["region"] = key.region
        if self.api_key:
            params["key"] = self.api_key
        last_error = None
        for _ in range(self.retries):
            try:
                response = self.session.get(self.endpoint, params=params, timeout=10)
                response.raise_for_status()
                payload = response.json()
            except Exception as exc:  # noqa: BLE001 - any transport error means retry
                last_error = exc
                continue
            if not payload:
                return None
            return (float(payload["lat"]), float(payload["lon"]))
        raise ConnectionError(f"geocoding failed for {key.render()}: {last_error}")

    def resolve(self, keys: Sequence[CityKey]) -> list[tuple[float, float] | None]:
        results = []
        for key in keys:
            try:
                results.append(self._query(key))
            except ConnectionError:
                results.append(None)
        return results


class GeoCache:
    """Append-only tab-separated cache:
    city, region, country, lat, lon, source, timestamp."""

    def __init__(self, path):
        self.path = path
        self._warnings: list[str] = []

    @property
    def warnings(self) -> list[str]:
        return self._warnings

    def load(self) -> dict[CityKey, GeoPoint]:
        points: dict[CityKey, GeoPoint] = {}
        if not os.path.exists(self.path):
            return points
        try:
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    parts = line.split("\t")
                    if len(parts) != 7:
                        raise ValueError(f"line {lineno}: expected 7 fields")
                    key = CityKey(city=parts[0], region=parts[1] or None, country=parts[2])
                    lat, lon = float(parts[3]), float(parts[4])
                    failed = (lat, lon) == (0.0, 0.0)
                    points[key] = GeoPoint(lat=lat, lon=lon, source=parts[5], failed=failed)
        except (ValueError, OSError) as exc:
            self._warnings.append(f"corrupt cache {self.path}: {exc}; rebuilding")
            try:
                os.remove(self.path)
            except OSError:
                pass
            return {}
        return points

    def append(self, key: CityKey, point: GeoPoint) -> None:
        line = "\t".join(
            [
                key.city,
                key.region or "",
                key.country,
                repr(point.lat),
                repr(point.lon),
                point.source,
                str(int(time.time())),
            ]
        )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")


def resolve_all(
    keys: Iterable[CityKey],
    backend,
    cache: GeoCache | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    pause: float = DEFAULT_PAUSE,
) -> dict[CityKey, GeoPoint]:
    """Resolve every key to exactly one GeoPoint.

    The cache is consulted first; remaining keys go to the backend in chunks
    (the reference encoder caps batches at 1,000 entries) with a pause between
    chunks. Unresolvable keys get the failed sentinel.
    """
    keys = sorted(set(keys), key=lambda k: k.sort_key())
    cached = cache.load() if cache is not None else {}
    result: dict[CityKey, GeoPoint] = {}
    missing: list[CityKey] = []
    for key in keys:
        if key in cached:
            result[key] = cached[key]
        else:
            missing.append(key)

    for start in range(0, len(missing), chunk_size):
        if start > 0 and pause > 0:
            time.sleep(pause)
        chunk = missing[start : start + chunk_size]
        for key, coords in zip(chunk, backend.resolve(chunk)):
            if coords is None or (coords[0], coords[1]) == (0.0, 0.0):
                point = failed_point(source=backend.name)
            else:
                point = GeoPoint(lat=coords[0], lon=coords[1], source=backend.name)
            result[key] = point
            if cache is not None:
                cache.append(key, point)
    return result
