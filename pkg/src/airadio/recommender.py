"""Personalized next-song selection.

A listener's quality score for the song that just ended steers the next
pick: positive scores favor distant songs, negative scores favor similar
ones, zero means uniform. Distances are Euclidean over z-scored song
features.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from .domain import FeatureVector, PreferenceProfile, Rating, RatingQuestion, center_likert

# The four rateable aspects that carry preference weights; "difference"
# weighs the transition itself and enters as an additive bias.
RATED_ASPECTS = {
    RatingQuestion.HAPPY: "happy",
    RatingQuestion.DANCEABLE: "danceable",
    RatingQuestion.ARTIFICIAL: "artificial",
    RatingQuestion.UPBEAT: "upbeat",
}


class PoolExhausted(RuntimeError):
    """All songs have been played; caller should reset the session pool."""


@dataclass(frozen=True)
class RecommenderConfig:
    B: float = 1.0
    exponent_clamp: float = 8.0
    distance_floor: float = 1e-9

    def __post_init__(self) -> None:
        if self.B <= 0 or self.exponent_clamp <= 0 or self.distance_floor <= 0:
            raise ValueError("recommender config values must be positive")


@dataclass(frozen=True)
class SessionState:
    listener_id: str
    preference: PreferenceProfile
    rng_seed: int
    current_song_id: Optional[str] = None
    played_song_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.current_song_id is not None and self.current_song_id not in self.played_song_ids:
            raise ValueError("current song must be part of the played set")


def quality_score(
    listener_rating: Optional[Rating],
    prefs: PreferenceProfile,
    fallback_means: Optional[Mapping[RatingQuestion, float]] = None,
) -> float:
    """Preference-weighted sum of the listener's centered ratings.

    Missing answers fall back to the store-wide mean centered answer for
    that (song, question), then to 0. The "difference" weight has no
    paired rating and is added as-is.
    """
    fallback_means = fallback_means or {}
    score = prefs.weights["difference"]
    for question, aspect in RATED_ASPECTS.items():
        weight = prefs.weights[aspect]
        if weight == 0.0:
            continue
        if listener_rating is not None and question in listener_rating.answers:
            r = float(center_likert(listener_rating.answers[question]))
        else:
            r = float(fallback_means.get(question, 0.0))
        score += r * weight
    return score


def selection_probabilities(
    current: Optional[FeatureVector],
    candidates: Sequence[FeatureVector],
    quality: float,
    cfg: RecommenderConfig,
) -> list[float]:
    """Exact candidate probabilities under the distance-exponent rule.

    p(z) is proportional to d(z, current)^(Q/B), with the distance floored
    and the exponent clamped. No current song, or Q = 0, means uniform.
    """
    n = len(candidates)
    if n == 0:
        raise PoolExhausted("no unplayed candidates")
    if current is None or quality == 0.0:
        return [1.0 / n] * n
    exponent = quality / cfg.B
    exponent = max(-cfg.exponent_clamp, min(cfg.exponent_clamp, exponent))
    cur = current.as_tuple()
    log_weights = []
    for cand in candidates:
        d = math.dist(cur, cand.as_tuple())
        log_weights.append(exponent * math.log(max(d, cfg.distance_floor)))
    peak = max(log_weights)
    weights = [math.exp(lw - peak) for lw in log_weights]
    total = sum(weights)
    return [w / total for w in weights]


def next_song(
    current: Optional[FeatureVector],
    candidates: Sequence[tuple[str, FeatureVector]],
    quality: float,
    cfg: RecommenderConfig,
    rng: random.Random,
) -> str:
    """Sample the next song id from the unplayed candidates."""
    probs = selection_probabilities(current, [f for _, f in candidates], quality, cfg)
    u = rng.random()
    acc = 0.0
    for (song_id, _), p in zip(candidates, probs):
        acc += p
        if u < acc:
            return song_id
    return candidates[-1][0]  # guard against rounding in the cumulative sum


def advance_session(session: SessionState, chosen_song_id: str, total_songs: int) -> SessionState:
    """Record the chosen song; reset the pool once the catalog is exhausted.

    The reset keeps only the now-playing song in the played set so the
    radio keeps streaming instead of stalling.
    """
    played = session.played_song_ids
    if chosen_song_id not in played:
        played = played + (chosen_song_id,)
    if len(played) >= total_songs:
        played = (chosen_song_id,)
    return replace(session, current_song_id=chosen_song_id, played_song_ids=played)
