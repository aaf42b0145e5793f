"""Core domain types shared by every other module.

All types are immutable value objects with canonical JSON shapes. Feature
vectors are always serialized as 9-element arrays in the fixed order given
by ``FEATURE_NAMES``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence


class DomainError(ValueError):
    """Raised when a domain invariant is violated."""


FEATURE_NAMES = (
    "danceability",
    "energy",
    "key",
    "loudness",
    "speechiness",
    "acousticness",
    "instrumentalness",
    "liveness",
    "valence",
)

FEATURE_DIM = len(FEATURE_NAMES)
PROMPT_FEATURE_DIM = 3 * FEATURE_DIM


@dataclass(frozen=True)
class FeatureVector:
    """Nine acoustic descriptors characterizing an artist, genre, or song.

    All components are unitless in [0, 1] except ``loudness`` (dBFS,
    typically [-60, 0]) and ``key`` (pitch-class index 0-11 already divided
    by 11 so it lands in [0, 1]).
    """

    danceability: float
    energy: float
    key: float
    loudness: float
    speechiness: float
    acousticness: float
    instrumentalness: float
    liveness: float
    valence: float

    def __post_init__(self) -> None:
        for name in FEATURE_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"feature {name!r} is not finite: {value!r}")

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in FEATURE_NAMES)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "FeatureVector":
        if len(values) != FEATURE_DIM:
            raise DomainError(
                f"feature vector needs exactly {FEATURE_DIM} components, got {len(values)}"
            )
        return cls(*(float(v) for v in values))

    def to_json(self) -> list[float]:
        return list(self.as_tuple())

    @classmethod
    def from_json(cls, data: Any) -> "FeatureVector":
        if not isinstance(data, (list, tuple)):
            raise DomainError(f"feature vector must be an array, got {type(data).__name__}")
        return cls.from_sequence(data)


@dataclass(frozen=True)
class ArtistProfile:
    """An artist prompt option: id, name, and average features of its top songs."""

    artist_id: str
    display_name: str
    features: FeatureVector

    def to_json(self) -> dict[str, Any]:
        return {
            "artist_id": self.artist_id,
            "display_name": self.display_name,
            "features": self.features.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ArtistProfile":
        return cls(
            artist_id=str(data["artist_id"]),
            display_name=str(data["display_name"]),
            features=FeatureVector.from_json(data["features"]),
        )


@dataclass(frozen=True)
class GenreProfile:
    """A genre prompt option: id, name, and average features of its top playlists."""

    genre_id: str
    display_name: str
    features: FeatureVector

    def to_json(self) -> dict[str, Any]:
        return {
            "genre_id": self.genre_id,
            "display_name": self.display_name,
            "features": self.features.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "GenreProfile":
        return cls(
            genre_id=str(data["genre_id"]),
            display_name=str(data["display_name"]),
            features=FeatureVector.from_json(data["features"]),
        )


@dataclass(frozen=True)
class Prime:
    """A seed clip contributed by a musician, plus its artist's features."""

    prime_id: str
    contributor_name: str
    prime_artist_features: FeatureVector
    audio_ref: str
    submitted_at: int  # UTC milliseconds since epoch

    def to_json(self) -> dict[str, Any]:
        return {
            "prime_id": self.prime_id,
            "contributor_name": self.contributor_name,
            "prime_artist_features": self.prime_artist_features.to_json(),
            "audio_ref": self.audio_ref,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Prime":
        return cls(
            prime_id=str(data["prime_id"]),
            contributor_name=str(data["contributor_name"]),
            prime_artist_features=FeatureVector.from_json(data["prime_artist_features"]),
            audio_ref=str(data["audio_ref"]),
            submitted_at=int(data["submitted_at"]),
        )


@dataclass(frozen=True)
class PromptFeatures:
    """The 27 covariates of a song: prime block, artist block, genre block."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != PROMPT_FEATURE_DIM:
            raise DomainError(
                f"prompt features need exactly {PROMPT_FEATURE_DIM} values, got {len(self.values)}"
            )
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for v in self.values:
            if not math.isfinite(v):
                raise DomainError(f"prompt feature is not finite: {v!r}")

    def to_json(self) -> list[float]:
        return list(self.values)

    @classmethod
    def from_json(cls, data: Any) -> "PromptFeatures":
        if not isinstance(data, (list, tuple)):
            raise DomainError("prompt features must be an array")
        return cls(tuple(float(v) for v in data))


@dataclass(frozen=True)
class Song:
    """A generated artifact binding a prime to its (artist, genre) prompt."""

    song_id: str
    prime_id: str
    artist_prompt: str
    genre_prompt: str
    prompt_features: PromptFeatures
    song_features: FeatureVector
    audio_ref: str
    created_at: int

    def to_json(self) -> dict[str, Any]:
        return {
            "song_id": self.song_id,
            "prime_id": self.prime_id,
            "artist_prompt": self.artist_prompt,
            "genre_prompt": self.genre_prompt,
            "prompt_features": self.prompt_features.to_json(),
            "song_features": self.song_features.to_json(),
            "audio_ref": self.audio_ref,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Song":
        return cls(
            song_id=str(data["song_id"]),
            prime_id=str(data["prime_id"]),
            artist_prompt=str(data["artist_prompt"]),
            genre_prompt=str(data["genre_prompt"]),
            prompt_features=PromptFeatures.from_json(data["prompt_features"]),
            song_features=FeatureVector.from_json(data["song_features"]),
            audio_ref=str(data["audio_ref"]),
            created_at=int(data["created_at"]),
        )


class RatingQuestion(str, Enum):
    """The seven listener questions, in canonical presentation order."""

    HAPPY = "happy"
    DANCEABLE = "danceable"
    ARTIFICIAL = "artificial"
    CLEAR_LYRICS = "clear_lyrics"
    INSTRUMENTAL = "instrumental"
    UPBEAT = "upbeat"
    LIKE = "like"

    @property
    def text(self) -> str:
        return _QUESTION_TEXT[self]


_QUESTION_TEXT = {
    RatingQuestion.HAPPY: "How happy is this song?",
    RatingQuestion.DANCEABLE: "How danceable is this song?",
    RatingQuestion.ARTIFICIAL: "How artificial is this song?",
    RatingQuestion.CLEAR_LYRICS: "How clear are the lyrics?",
    RatingQuestion.INSTRUMENTAL: "How instrumental is this song?",
    RatingQuestion.UPBEAT: "How upbeat is this song?",
    RatingQuestion.LIKE: "How much do you like this song?",
}

ALL_QUESTIONS = tuple(RatingQuestion)


@dataclass(frozen=True)
class Rating:
    """One listener's star answers for one song. Answers may be partial."""

    rating_id: str
    listener_id: str
    song_id: str
    answers: Mapping[RatingQuestion, int]
    submitted_at: int

    def __post_init__(self) -> None:
        frozen = {}
        for question, stars in dict(self.answers).items():
            question = RatingQuestion(question)
            if not isinstance(stars, int) or isinstance(stars, bool) or not 1 <= stars <= 5:
                raise DomainError(f"answer to {question.value!r} must be an integer 1-5, got {stars!r}")
            frozen[question] = stars
        object.__setattr__(self, "answers", frozen)

    def to_json(self) -> dict[str, Any]:
        return {
            "rating_id": self.rating_id,
            "listener_id": self.listener_id,
            "song_id": self.song_id,
            "answers": {q.value: stars for q, stars in self.answers.items()},
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Rating":
        return cls(
            rating_id=str(data["rating_id"]),
            listener_id=str(data["listener_id"]),
            song_id=str(data["song_id"]),
            answers={RatingQuestion(q): int(s) for q, s in data["answers"].items()},
            submitted_at=int(data["submitted_at"]),
        )


PREFERENCE_ASPECTS = ("difference", "happy", "danceable", "artificial", "upbeat")

DEFAULT_PREFERENCE_WEIGHTS = {
    "difference": 2.0,
    "happy": 0.0,
    "danceable": 0.0,
    "artificial": 0.0,
    "upbeat": 0.0,
}


@dataclass(frozen=True)
class PreferenceProfile:
    """A listener's five slider weights in [-2, 2] driving the quality score."""

    listener_id: str
    weights: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_PREFERENCE_WEIGHTS))

    def __post_init__(self) -> None:
        merged = dict(DEFAULT_PREFERENCE_WEIGHTS)
        for aspect, w in dict(self.weights).items():
            if aspect not in PREFERENCE_ASPECTS:
                raise DomainError(f"unknown preference aspect {aspect!r}")
            w = float(w)
            if not math.isfinite(w) or not -2.0 <= w <= 2.0:
                raise DomainError(f"preference weight for {aspect!r} out of [-2, 2]: {w!r}")
            merged[aspect] = w
        object.__setattr__(self, "weights", merged)

    def to_json(self) -> dict[str, Any]:
        return {"listener_id": self.listener_id, "weights": dict(self.weights)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "PreferenceProfile":
        return cls(listener_id=str(data["listener_id"]), weights=dict(data["weights"]))


def center_likert(raw: int) -> int:
    """Map a 1-5 star answer onto the centered [-2, 2] scale."""
    if not isinstance(raw, int) or isinstance(raw, bool) or not 1 <= raw <= 5:
        raise DomainError(f"star rating must be an integer in 1..5, got {raw!r}")
    return raw - 3


def prompt_features(prime: Prime, artist: ArtistProfile, genre: GenreProfile) -> PromptFeatures:
    """Concatenate prime, artist-prompt, and genre-prompt features (27 values)."""
    return PromptFeatures(
        prime.prime_artist_features.as_tuple()
        + artist.features.as_tuple()
        + genre.features.as_tuple()
    )


def mean_feature_vector(vectors: Iterable[FeatureVector]) -> FeatureVector:
    """Component-wise arithmetic mean of a non-empty collection of vectors."""
    vectors = list(vectors)
    if not vectors:
        raise DomainError("cannot average an empty list of feature vectors")
    n = len(vectors)
    sums = [0.0] * FEATURE_DIM
    for v in vectors:
        for i, x in enumerate(v.as_tuple()):
            sums[i] += x
    return FeatureVector.from_sequence([s / n for s in sums])
