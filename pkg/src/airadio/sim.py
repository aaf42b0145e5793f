"""Closed-loop simulation: synthetic listeners with planted linear
preferences rate mock-generated songs while the scheduler adapts.

Everything is driven by one seeded generator, so a (seed, config) pair
maps to byte-identical reports.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .catalog import Catalog
from .domain import (
    FEATURE_NAMES,
    FeatureVector,
    Prime,
    PromptFeatures,
    prompt_features,
)
from .scheduler import RatingModel, SchedulerConfig, fit_rating_model, select_prompt

TARGET_SCORE_SPREAD = 2.0  # latent score stddev, so rounding to stars keeps signal


@dataclass(frozen=True)
class SyntheticListener:
    """A test double for a human rater: a linear (or quadratic) latent
    preference over prompt features, answered as clamped rounded stars."""

    listener_id: str
    latent_weights: tuple[float, ...]
    intercept: float
    noise_sd: float = 0.0
    quad_weights: Optional[tuple[float, ...]] = None

    def latent_score(self, features: PromptFeatures) -> float:
        x = np.asarray(features.values)
        score = float(np.dot(self.latent_weights, x)) + self.intercept
        if self.quad_weights is not None:
            score += float(np.dot(self.quad_weights, x * x))
        return score

    def answer_like(self, features: PromptFeatures, rng: np.random.Generator) -> int:
        score = self.latent_score(features)
        if self.noise_sd > 0:
            score += float(rng.normal(0.0, self.noise_sd))
        centered = int(np.clip(round(score), -2, 2))
        return centered + 3


@dataclass(frozen=True)
class EpochReport:
    epoch: int
    songs: int
    mean_true: float
    mean_like: float
    regret: float

    def to_json(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "songs": self.songs,
            "mean_true": self.mean_true,
            "mean_like": self.mean_like,
            "regret": self.regret,
        }


@dataclass(frozen=True)
class SimConfig:
    listeners: int = 40
    epochs: int = 20
    primes_per_epoch: int = 5
    ratings_per_song: int = 5
    M: int = 64
    gamma: int = 8
    ridge_lambda: float = 1.0
    min_ratings_for_fit: int = 30
    min_songs_for_fit: int = 10
    noise_sd: float = 0.0
    population: str = "linear"  # linear | quadratic
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population not in ("linear", "quadratic"):
            raise ValueError("population must be 'linear' or 'quadratic'")
        if min(self.listeners, self.epochs, self.primes_per_epoch, self.ratings_per_song) < 1:
            raise ValueError("population/epoch counts must be positive")


def random_prime(prime_id: str, rng: np.random.Generator) -> Prime:
    values = []
    for name in FEATURE_NAMES:
        if name == "loudness":
            values.append(float(rng.uniform(-60.0, 0.0)))
        else:
            values.append(float(rng.uniform(0.0, 1.0)))
    return Prime(
        prime_id=prime_id,
        contributor_name="sim",
        prime_artist_features=FeatureVector.from_sequence(values),
        audio_ref=f"sim/{prime_id}",
        submitted_at=0,
    )


def _sample_design(catalog: Catalog, rng: np.random.Generator, n_primes: int = 32) -> np.ndarray:
    """Prompt-feature rows spanning the space the scheduler will explore."""
    rows = []
    for i in range(n_primes):
        prime = random_prime(f"design-{i}", rng)
        for artist in catalog.artists.values():
            for genre in catalog.genres.values():
                rows.append(prompt_features(prime, artist, genre).values)
    return np.asarray(rows)


def make_population(catalog: Catalog, cfg: SimConfig, rng: np.random.Generator) -> list[SyntheticListener]:
    """Build listeners sharing one planted latent function, rescaled so the
    score spread survives rounding into the 5-star scale."""
    dim = len(FEATURE_NAMES) * 3
    w = rng.normal(0.0, 1.0, size=dim)
    v = rng.normal(0.0, 1.0, size=dim) if cfg.population == "quadratic" else None
    design = _sample_design(catalog, rng)
    scores = design @ w
    if v is not None:
        scores = scores + (design * design) @ v
    spread = float(np.std(scores))
    scale = TARGET_SCORE_SPREAD / spread if spread > 0 else 1.0
    w = w * scale
    v = v * scale if v is not None else None
    intercept = -float(np.mean(scores)) * scale
    return [
        SyntheticListener(
            listener_id=f"listener-{i:03d}",
            latent_weights=tuple(w),
            intercept=intercept,
            noise_sd=cfg.noise_sd,
            quad_weights=tuple(v) if v is not None else None,
        )
        for i in range(cfg.listeners)
    ]


def population_mean_weights(
    population: Sequence[SyntheticListener],
) -> SyntheticListener:
    """Collapse a population into one listener with the averaged latent
    function (exact, since scores are linear in the weights)."""
    w = np.mean([l.latent_weights for l in population], axis=0)
    b = float(np.mean([l.intercept for l in population]))
    quads = [l.quad_weights for l in population if l.quad_weights is not None]
    v = tuple(np.sum(quads, axis=0) / len(population)) if quads else None
    return SyntheticListener(
        listener_id="population-mean",
        latent_weights=tuple(w),
        intercept=b,
        quad_weights=v,
    )


def population_mean_score(
    population: Sequence[SyntheticListener], features: PromptFeatures
) -> float:
    return population_mean_weights(population).latent_score(features)


def oracle_best_pair(
    catalog: Catalog, prime: Prime, latent: SyntheticListener
) -> tuple[str, str, float]:
    """Exhaustive argmax of a planted latent function over all catalog pairs."""
    best: Optional[tuple[str, str, float]] = None
    for artist_id, artist in catalog.artists.items():
        for genre_id, genre in catalog.genres.items():
            score = latent.latent_score(prompt_features(prime, artist, genre))
            if best is None or score > best[2]:
                best = (artist_id, genre_id, score)
    return best


def run_simulation(catalog: Catalog, cfg: SimConfig) -> list[EpochReport]:
    """Run the full prime -> schedule -> generate -> rate -> refit loop."""
    rng = np.random.default_rng(cfg.seed)
    population = make_population(catalog, cfg, rng)
    mean_latent = population_mean_weights(population)
    sched_cfg = SchedulerConfig(
        M=cfg.M,
        gamma=cfg.gamma,
        ridge_lambda=cfg.ridge_lambda,
        min_ratings_for_fit=cfg.min_ratings_for_fit,
        min_songs_for_fit=cfg.min_songs_for_fit,
    )
    model: Optional[RatingModel] = None
    training_rows: list[tuple[PromptFeatures, float]] = []
    total_ratings = 0
    reports: list[EpochReport] = []
    prime_counter = 0
    for epoch in range(1, cfg.epochs + 1):
        true_scores: list[float] = []
        like_means: list[float] = []
        regrets: list[float] = []
        for _ in range(cfg.primes_per_epoch):
            prime_counter += 1
            prime = random_prime(f"prime-{prime_counter:04d}", rng)
            decision = select_prompt(
                prime,
                catalog,
                model,
                sched_cfg,
                rng,
                rating_count=total_ratings,
                song_count=len(training_rows),
            )
            artist = catalog.artists[decision.artist_prompt]
            genre = catalog.genres[decision.genre_prompt]
            features = prompt_features(prime, artist, genre)
            true_scores.append(mean_latent.latent_score(features))
            raters = rng.choice(len(population), size=cfg.ratings_per_song, replace=False)
            likes = [population[i].answer_like(features, rng) - 3 for i in raters]
            like_mean = float(np.mean(likes))
            like_means.append(like_mean)
            training_rows.append((features, like_mean))
            total_ratings += len(likes)
            _, _, best_score = oracle_best_pair(catalog, prime, mean_latent)
            regrets.append(best_score - true_scores[-1])
        if training_rows:
            model = fit_rating_model(training_rows, cfg.ridge_lambda)
        reports.append(
            EpochReport(
                epoch=epoch,
                songs=cfg.primes_per_epoch,
                mean_true=float(np.mean(true_scores)),
                mean_like=float(np.mean(like_means)),
                regret=float(np.mean(regrets)),
            )
        )
    return reports


def write_report_csv(reports: Sequence[EpochReport], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "songs", "mean_true", "mean_like", "regret"])
        for r in reports:
            writer.writerow([r.epoch, r.songs, repr(r.mean_true), repr(r.mean_like), repr(r.regret)])
