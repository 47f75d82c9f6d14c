"""City extraction from raw author addresses and per-city tallying."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .records import Record

# Trailing "ST ZIP USA" or "ST USA" tail of US-style addresses.
_US_TAIL_RE = re.compile(r"^([A-Z]{2})(?: [A-Z]{0,2}-?\d{3,}(?:-\d+)?)? USA$")
# Leading bracketed author group used by newer exports.
_BRACKET_RE = re.compile(r"^\[[^\]]*\]\s*")
_DIGIT_RE = re.compile(r"\d")


class AddressError(ValueError):
    """Raised when no city/country tail can be extracted from an address."""


@dataclass(frozen=True)
class CityKey:
    city: str
    region: str | None
    country: str

    def sort_key(self) -> tuple[str, str, str]:
        return (self.city, self.region or "", self.country)

    def render(self) -> str:
        if self.region:
            return f"{self.city}, {self.region}, {self.country}"
        return f"{self.city}, {self.country}"


@dataclass(frozen=True)
class CityOccurrence:
    ut: str
    key: CityKey
    multiplicity: int


@dataclass
class CityTally:
    key: CityKey
    n: int
    n_top: int
    occurrences: int


def _strip_digit_tokens(text: str) -> str:
    tokens = [t for t in text.split() if not _DIGIT_RE.search(t)]
    return " ".join(tokens)


def normalize_city(raw_address: str) -> CityKey:
    """Extract the (city, region?, country) tail of one raw address.

    Uppercases, strips postal codes, and keeps US state abbreviations so that
    homonymous cities in different states stay distinct.
    """
    text = _BRACKET_RE.sub("", raw_address.strip())
    text = " ".join(text.split()).rstrip(".").upper()
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) < 2:
        raise AddressError(f"no city/country tail in {raw_address!r}")

    tail = parts[-1]
    us = _US_TAIL_RE.match(tail)
    if us:
        city = _strip_digit_tokens(parts[-2])
        if not city:
            raise AddressError(f"empty city in {raw_address!r}")
        return CityKey(city=city, region=us.group(1), country="USA")

    # Rendered-key form "CITY, ST, USA" (also keeps normalize_city idempotent).
    if tail == "USA" and len(parts) >= 3 and re.fullmatch(r"[A-Z]{2}", parts[-2]):
        city = _strip_digit_tokens(parts[-3])
        if not city:
            raise AddressError(f"empty city in {raw_address!r}")
        return CityKey(city=city, region=parts[-2], country="USA")

    country = _strip_digit_tokens(tail)
    if not country or not re.search(r"[A-Z]", country):
        raise AddressError(f"no country token in {raw_address!r}")
    city = _strip_digit_tokens(parts[-2])
    if not city:
        raise AddressError(f"empty city in {raw_address!r}")
    return CityKey(city=city, region=None, country=country)


def extract_occurrences(record: Record) -> list[CityOccurrence]:
    """Map a record's addresses to city occurrences (integer counting).

    Identical addresses repeated for co-authors collapse to one unit;
    distinct addresses in the same city merge with summed multiplicity.
    Unextractable addresses contribute nothing.
    """
    distinct = list(dict.fromkeys(" ".join(a.split()) for a in record.addresses))
    counts: dict[CityKey, int] = {}
    for address in distinct:
        try:
            key = normalize_city(address)
        except AddressError:
            continue
        counts[key] = counts.get(key, 0) + 1
    return [CityOccurrence(ut=record.ut, key=key, multiplicity=m) for key, m in counts.items()]


def tally(corpus: Iterable[Record], top_ids: set[str], mode: str = "paper") -> list[CityTally]:
    """Count per-city papers (n), top papers (n_top) and address occurrences.

    ``paper`` mode counts each record at most once per city; ``occurrence``
    mode sums address multiplicities instead.
    """
    if mode not in ("paper", "occurrence"):
        raise ValueError(f"unknown counting mode {mode!r}")
    table: dict[CityKey, CityTally] = {}
    for record in corpus:
        for occ in extract_occurrences(record):
            entry = table.get(occ.key)
            if entry is None:
                entry = table[occ.key] = CityTally(key=occ.key, n=0, n_top=0, occurrences=0)
            unit = 1 if mode == "paper" else occ.multiplicity
            entry.n += unit
            entry.occurrences += occ.multiplicity
            if record.ut in top_ids:
                entry.n_top += unit
    return sorted(table.values(), key=lambda t: t.key.sort_key())


def dump_cities(corpus: Iterable[Record]) -> str:
    """Render the cities.txt-style geocoder input: one line per occurrence
    unit, ``city[, region], country``."""
    lines: list[str] = []
    for record in corpus:
        for occ in extract_occurrences(record):
            lines.extend([occ.key.render()] * occ.multiplicity)
    return "\n".join(lines) + ("\n" if lines else "")
