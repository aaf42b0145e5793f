"""Rating analytics: per-question summaries, pairwise Pearson correlations
with significance stars, and one-sided t-tests of each question against the
pooled others.

p-values come from a self-contained Student-t CDF built on the regularized
incomplete beta function (continued-fraction evaluation), accurate to about
1e-10 absolute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .domain import ALL_QUESTIONS, Rating, RatingQuestion

_BETA_EPS = 1e-16
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t distribution with df degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


@dataclass(frozen=True)
class QuestionSummary:
    question: RatingQuestion
    count: int
    histogram: tuple[int, int, int, int, int]
    mean: Optional[float]
    stddev: Optional[float]

    def to_json(self) -> dict[str, Any]:
        return {
            "question": self.question.value,
            "count": self.count,
            "histogram": list(self.histogram),
            "mean": self.mean,
            "stddev": self.stddev,
        }


def summarize_questions(ratings: Iterable[Rating]) -> list[QuestionSummary]:
    """One star-histogram summary per question, over all present answers."""
    answers: dict[RatingQuestion, list[int]] = {q: [] for q in ALL_QUESTIONS}
    for rating in ratings:
        for question, stars in rating.answers.items():
            answers[question].append(stars)
    summaries = []
    for question in ALL_QUESTIONS:
        values = answers[question]
        histogram = tuple(values.count(star) for star in range(1, 6))
        if values:
            mean = float(np.mean(values))
            stddev = float(np.std(values))
        else:
            mean = stddev = None
        summaries.append(
            QuestionSummary(
                question=question,
                count=len(values),
                histogram=histogram,  # type: ignore[arg-type]
                mean=mean,
                stddev=stddev,
            )
        )
    return summaries


class SignificanceStars(str, Enum):
    NONE = ""
    DOT = "."
    ONE = "*"
    TWO = "**"
    THREE = "***"


def stars_for_p(p: float) -> SignificanceStars:
    if p <= 0.001:
        return SignificanceStars.THREE
    if p <= 0.01:
        return SignificanceStars.TWO
    if p <= 0.05:
        return SignificanceStars.ONE
    if p <= 0.1:
        return SignificanceStars.DOT
    return SignificanceStars.NONE


@dataclass(frozen=True)
class CorrelationCell:
    question_a: RatingQuestion
    question_b: RatingQuestion
    n: int
    r: Optional[float]
    p_value: Optional[float]
    stars: SignificanceStars
    note: Optional[str] = None  # "insufficient_n" | "zero_variance" | "exact_fit"

    def to_json(self) -> dict[str, Any]:
        return {
            "question_a": self.question_a.value,
            "question_b": self.question_b.value,
            "n": self.n,
            "r": self.r,
            "p_value": self.p_value,
            "stars": self.stars.value,
            "note": self.note,
        }


def pearson_r_p(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, Optional[float]]:
    """Pearson r and its two-sided p under the t(n-2) null."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    n = len(x)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    r = float(xc @ yc) / denom
    r = max(-1.0, min(1.0, r))
    if 1.0 - r * r <= 0.0:
        return r, None  # exact fit: the t statistic diverges
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * (1.0 - student_t_cdf(abs(t), n - 2))
    return r, p


def _paired_observations(
    ratings: Sequence[Rating],
    qa: RatingQuestion,
    qb: RatingQuestion,
    unit: str,
) -> tuple[list[float], list[float]]:
    xs: list[float] = []
    ys: list[float] = []
    if unit == "per_rating":
        for rating in ratings:
            if qa in rating.answers and qb in rating.answers:
                xs.append(float(rating.answers[qa]))
                ys.append(float(rating.answers[qb]))
        return xs, ys
    if unit != "per_song_mean":
        raise ValueError(f"unknown correlation unit {unit!r}")
    by_song: dict[str, dict[RatingQuestion, list[int]]] = {}
    for rating in ratings:
        bucket = by_song.setdefault(rating.song_id, {})
        for question, stars in rating.answers.items():
            bucket.setdefault(question, []).append(stars)
    for song_id in sorted(by_song):
        bucket = by_song[song_id]
        if qa in bucket and qb in bucket:
            xs.append(float(np.mean(bucket[qa])))
            ys.append(float(np.mean(bucket[qb])))
    return xs, ys


def correlation_matrix(
    ratings: Iterable[Rating], unit: str = "per_song_mean"
) -> list[list[CorrelationCell]]:
    """7x7 pairwise Pearson matrix with caption-style significance stars."""
    ratings = list(ratings)
    matrix: list[list[CorrelationCell]] = []
    for qa in ALL_QUESTIONS:
        row = []
        for qb in ALL_QUESTIONS:
            xs, ys = _paired_observations(ratings, qa, qb, unit)
            n = len(xs)
            if qa == qb:
                row.append(
                    CorrelationCell(qa, qb, n, 1.0, None, SignificanceStars.NONE, None)
                )
                continue
            if n < 3:
                row.append(
                    CorrelationCell(
                        qa, qb, n, None, None, SignificanceStars.NONE, "insufficient_n"
                    )
                )
                continue
            if np.std(xs) == 0.0 or np.std(ys) == 0.0:
                row.append(
                    CorrelationCell(
                        qa, qb, n, None, None, SignificanceStars.NONE, "zero_variance"
                    )
                )
                continue
            r, p = pearson_r_p(xs, ys)
            if p is None:
                row.append(
                    CorrelationCell(qa, qb, n, r, None, SignificanceStars.NONE, "exact_fit")
                )
            else:
                row.append(CorrelationCell(qa, qb, n, r, p, stars_for_p(p), None))
        matrix.append(row)
    return matrix


@dataclass(frozen=True)
class QuestionTest:
    question: RatingQuestion
    t: Optional[float]
    p_value: Optional[float]
    n_question: int
    n_others: int
    note: Optional[str] = None

    def to_json(self) -> dict[str, Any]:
        return {
            "question": self.question.value,
            "t": None if self.t is None or math.isinf(self.t) else self.t,
            "p_value": self.p_value,
            "n_question": self.n_question,
            "n_others": self.n_others,
            "note": self.note,
        }


def welch_t_one_sided(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Welch t and one-sided p for alternative mean(xs) > mean(ys)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    nx, ny = len(x), len(y)
    vx = x.var(ddof=1)
    vy = y.var(ddof=1)
    se2 = vx / nx + vy / ny
    diff = float(x.mean() - y.mean())
    if se2 == 0.0:
        if diff == 0.0:
            return 0.0, 0.5
        return (math.inf, 0.0) if diff > 0 else (-math.inf, 1.0)
    t = diff / math.sqrt(se2)
    df = se2**2 / ((vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1))
    return t, 1.0 - student_t_cdf(t, df)


def one_sided_question_test(
    ratings: Iterable[Rating], question: RatingQuestion
) -> QuestionTest:
    """Welch test of one question's answers vs. the pooled other six.

    Alternative is "greater"; report 1 - p for the "lesser" direction.
    """
    own: list[float] = []
    others: list[float] = []
    for rating in ratings:
        for q, stars in rating.answers.items():
            (own if q == question else others).append(float(stars))
    if len(own) < 2 or len(others) < 2:
        return QuestionTest(question, None, None, len(own), len(others), "insufficient_n")
    t, p = welch_t_one_sided(own, others)
    return QuestionTest(question, t, p, len(own), len(others))


def analytics_report(ratings: Iterable[Rating], unit: str = "per_song_mean") -> dict[str, Any]:
    """The full stats payload shared by the service endpoint and the CLI."""
    ratings = list(ratings)
    return {
        "unit": unit,
        "summaries": [s.to_json() for s in summarize_questions(ratings)],
        "correlations": [
            [cell.to_json() for cell in row] for row in correlation_matrix(ratings, unit)
        ],
        "question_tests": [
            one_sided_question_test(ratings, q).to_json() for q in ALL_QUESTIONS
        ],
    }
