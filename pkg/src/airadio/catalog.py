"""Artist / genre feature catalog loaded from JSON fixtures.

The live Spotify + audio-analysis ingestion is out of scope; this module
serves pre-computed feature vectors from a versioned fixture file and keeps
the per-dimension standardization statistics used for song distances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Iterable, Mapping, Union

from .domain import (
    FEATURE_DIM,
    ArtistProfile,
    DomainError,
    FeatureVector,
    GenreProfile,
    mean_feature_vector,
)

STDDEV_FLOOR = 1e-9


class CatalogError(ValueError):
    """Raised when a catalog document cannot be loaded."""


@dataclass(frozen=True)
class Standardization:
    """Per-dimension mean and (floored) standard deviation over stored songs."""

    means: tuple[float, ...]
    stddevs: tuple[float, ...]
    sample_count: int

    @classmethod
    def identity(cls) -> "Standardization":
        return cls(means=(0.0,) * FEATURE_DIM, stddevs=(1.0,) * FEATURE_DIM, sample_count=0)

    @classmethod
    def fit(cls, vectors: Iterable[FeatureVector]) -> "Standardization":
        """Compute stats over song features; identity below 2 samples."""
        rows = [v.as_tuple() for v in vectors]
        if len(rows) < 2:
            return cls.identity()
        n = len(rows)
        means = [sum(col) / n for col in zip(*rows)]
        stddevs = []
        for i, mu in enumerate(means):
            var = sum((row[i] - mu) ** 2 for row in rows) / n
            stddevs.append(max(var**0.5, STDDEV_FLOOR))
        return cls(means=tuple(means), stddevs=tuple(stddevs), sample_count=n)

    def apply(self, v: FeatureVector) -> FeatureVector:
        return FeatureVector.from_sequence(
            [(x - mu) / sd for x, mu, sd in zip(v.as_tuple(), self.means, self.stddevs)]
        )


@dataclass(frozen=True)
class Catalog:
    """Read-only snapshot of available artist and genre prompts."""

    artists: Mapping[str, ArtistProfile]
    genres: Mapping[str, GenreProfile]
    standardization: Standardization = field(default_factory=Standardization.identity)

    @property
    def artist_ids(self) -> tuple[str, ...]:
        return tuple(self.artists.keys())

    @property
    def genre_ids(self) -> tuple[str, ...]:
        return tuple(self.genres.keys())

    def with_standardization(self, std: Standardization) -> "Catalog":
        return Catalog(artists=self.artists, genres=self.genres, standardization=std)


def _parse_profiles(records: Any, kind: str, id_key: str, ctor) -> dict[str, Any]:
    if not isinstance(records, list) or not records:
        raise CatalogError(f"catalog {kind} array must be a non-empty list")
    out: dict[str, Any] = {}
    for record in records:
        try:
            rid = str(record[id_key])
        except (TypeError, KeyError) as exc:
            raise CatalogError(f"malformed {kind} record: {record!r}") from exc
        features = record.get("features")
        if not isinstance(features, list) or len(features) != FEATURE_DIM:
            raise CatalogError(
                f"{kind} {rid!r}: features must be an array of {FEATURE_DIM} numbers"
            )
        if rid in out:
            raise CatalogError(f"duplicate {kind} id {rid!r}")
        try:
            out[rid] = ctor(record)
        except (DomainError, TypeError, KeyError) as exc:
            raise CatalogError(f"{kind} {rid!r}: {exc}") from exc
    return out


def load_catalog(source: Union[str, Path, IO[str], Mapping[str, Any]]) -> Catalog:
    """Load a Catalog from a JSON file path, open file, or parsed document."""
    if isinstance(source, Mapping):
        doc = source
    elif isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    if not isinstance(doc, Mapping):
        raise CatalogError("catalog document must be a JSON object")
    artists = _parse_profiles(doc.get("artists"), "artist", "artist_id", ArtistProfile.from_json)
    genres = _parse_profiles(doc.get("genres"), "genre", "genre_id", GenreProfile.from_json)
    return Catalog(artists=artists, genres=genres)


def aggregate_artist_features(song_features: Iterable[FeatureVector]) -> FeatureVector:
    """Average the features of an artist's (or playlist's) songs."""
    return mean_feature_vector(song_features)


def standardize(v: FeatureVector, catalog: Catalog) -> FeatureVector:
    """Z-score a feature vector against the catalog's song statistics.

    With fewer than 2 songs recorded the statistics are degenerate and this
    is the identity map.
    """
    return catalog.standardization.apply(v)
