"""Exploration/exploitation prompt selection.

When a new prime arrives, a ridge regression fitted on the 27 prompt
covariates of existing songs predicts how well candidate (artist, genre)
pairs will be rated. M candidates are drawn uniformly from the catalog,
ranked by predicted rating, and one of the top gamma is chosen uniformly:
gamma=1 is maximal exploitation, gamma=M maximal exploration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .catalog import Catalog
from .domain import (
    PROMPT_FEATURE_DIM,
    Prime,
    PromptFeatures,
    Rating,
    RatingQuestion,
    center_likert,
    prompt_features,
)


class OutcomeMode(str, Enum):
    MEAN_LIKE = "mean_like"
    VARIANCE_LIKE = "variance_like"
    WEIGHTED_MIX = "weighted_mix"


@dataclass(frozen=True)
class OutcomeSpec:
    """Which scalar per song the scheduler optimizes."""

    mode: OutcomeMode = OutcomeMode.MEAN_LIKE
    mix_weights: Mapping[RatingQuestion, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        weights = {RatingQuestion(q): float(w) for q, w in dict(self.mix_weights).items()}
        for w in weights.values():
            if not np.isfinite(w):
                raise ValueError("mix weights must be finite")
        object.__setattr__(self, "mix_weights", weights)


def compute_outcome(ratings: Iterable[Rating], spec: OutcomeSpec) -> Optional[float]:
    """Collapse a song's ratings to one training target; None if unusable."""
    ratings = list(ratings)
    if spec.mode in (OutcomeMode.MEAN_LIKE, OutcomeMode.VARIANCE_LIKE):
        likes = [
            center_likert(r.answers[RatingQuestion.LIKE])
            for r in ratings
            if RatingQuestion.LIKE in r.answers
        ]
        if not likes:
            return None
        if spec.mode == OutcomeMode.MEAN_LIKE:
            return float(np.mean(likes))
        return float(np.var(likes))  # population variance
    # weighted_mix: sum over questions that have at least one answer
    total = 0.0
    any_answer = False
    for question, weight in spec.mix_weights.items():
        answers = [
            center_likert(r.answers[question]) for r in ratings if question in r.answers
        ]
        if answers:
            any_answer = True
            total += weight * float(np.mean(answers))
    return total if any_answer else None


@dataclass(frozen=True)
class RatingModel:
    """Linear rating predictor in raw covariate space."""

    weights: tuple[float, ...]
    intercept: float
    ridge_lambda: float
    training_count: int
    outcome: OutcomeSpec = field(default_factory=OutcomeSpec)

    def predict(self, features: PromptFeatures) -> float:
        return float(np.dot(self.weights, features.values) + self.intercept)

    def predict_matrix(self, rows: np.ndarray) -> np.ndarray:
        return rows @ np.asarray(self.weights) + self.intercept


def fit_rating_model(
    training_rows: Sequence[tuple[PromptFeatures, float]],
    ridge_lambda: float = 1.0,
    outcome: Optional[OutcomeSpec] = None,
) -> RatingModel:
    """Closed-form ridge fit on per-dimension standardized covariates.

    The intercept is unpenalized (fit on centered targets); weights are
    mapped back to raw covariate space for prediction.
    """
    if not training_rows:
        raise ValueError("need at least one training row")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be nonnegative")
    X = np.array([row.values for row, _ in training_rows], dtype=float)
    y = np.array([target for _, target in training_rows], dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd_safe = np.where(sd > 0, sd, 1.0)
    Z = (X - mu) / sd_safe
    y_mean = y.mean()
    gram = Z.T @ Z + ridge_lambda * np.eye(PROMPT_FEATURE_DIM)
    if ridge_lambda == 0.0 and np.linalg.matrix_rank(Z) < PROMPT_FEATURE_DIM:
        raise ValueError(
            "design matrix is rank-deficient; use ridge_lambda > 0 (default 1.0)"
        )
    w_std = np.linalg.solve(gram, Z.T @ (y - y_mean))
    w_raw = w_std / sd_safe
    intercept = float(y_mean - w_raw @ mu)
    return RatingModel(
        weights=tuple(float(w) for w in w_raw),
        intercept=intercept,
        ridge_lambda=float(ridge_lambda),
        training_count=len(training_rows),
        outcome=outcome or OutcomeSpec(),
    )


@dataclass(frozen=True)
class SchedulerConfig:
    M: int = 64
    gamma: int = 8
    ridge_lambda: float = 1.0
    min_ratings_for_fit: int = 30
    min_songs_for_fit: int = 10
    rng_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError("M must be positive")
        if not 1 <= self.gamma <= self.M:
            raise ValueError("gamma must lie in [1, M]")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be nonnegative")


class DecisionMode(str, Enum):
    COLD_START = "cold_start"
    FITTED = "fitted"


@dataclass(frozen=True)
class PromptDecision:
    prime_id: str
    artist_prompt: str
    genre_prompt: str
    mode_used: DecisionMode
    candidate_pool_size: int
    predicted_rating: Optional[float] = None


def sample_candidates(
    catalog: Catalog, M: int, rng: np.random.Generator
) -> list[tuple[str, str]]:
    """Draw M (artist, genre) pairs, each component uniform; duplicates allowed."""
    artist_ids = catalog.artist_ids
    genre_ids = catalog.genre_ids
    if not artist_ids or not genre_ids:
        raise ValueError("catalog has no artists or genres")
    a_idx = rng.integers(0, len(artist_ids), size=M)
    g_idx = rng.integers(0, len(genre_ids), size=M)
    return [(artist_ids[a], genre_ids[g]) for a, g in zip(a_idx, g_idx)]


def select_prompt(
    prime: Prime,
    catalog: Catalog,
    model: Optional[RatingModel],
    cfg: SchedulerConfig,
    rng: np.random.Generator,
    rating_count: int = 0,
    song_count: int = 0,
) -> PromptDecision:
    """Choose the (artist, genre) prompt to pair with a new prime.

    Below the cold-start thresholds a single uniform pair is returned
    (equivalent to gamma=M). Otherwise the top-gamma rule applies, with
    ties broken by candidate list position (stable sort).
    """
    cold = (
        model is None
        or rating_count < cfg.min_ratings_for_fit
        or song_count < cfg.min_songs_for_fit
    )
    if cold:
        pair = sample_candidates(catalog, 1, rng)[0]
        return PromptDecision(
            prime_id=prime.prime_id,
            artist_prompt=pair[0],
            genre_prompt=pair[1],
            mode_used=DecisionMode.COLD_START,
            candidate_pool_size=1,
        )
    candidates = sample_candidates(catalog, cfg.M, rng)
    X = np.array(
        [
            prompt_features(prime, catalog.artists[a], catalog.genres[g]).values
            for a, g in candidates
        ],
        dtype=float,
    )
    predicted = model.predict_matrix(X)
    order = np.argsort(-predicted, kind="stable")
    chosen = order[int(rng.integers(0, cfg.gamma))]
    artist, genre = candidates[chosen]
    return PromptDecision(
        prime_id=prime.prime_id,
        artist_prompt=artist,
        genre_prompt=genre,
        mode_used=DecisionMode.FITTED,
        candidate_pool_size=cfg.M,
        predicted_rating=float(predicted[chosen]),
    )
