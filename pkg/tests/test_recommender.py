import math
import random
from collections import Counter

import pytest
from scipy import stats as scipy_stats

from airadio.domain import FeatureVector, PreferenceProfile, Rating, RatingQuestion
from airadio.recommender import (
    PoolExhausted,
    RecommenderConfig,
    SessionState,
    advance_session,
    next_song,
    quality_score,
    selection_probabilities,
)

from conftest import random_features

CFG = RecommenderConfig()


def fv(*values):
    padded = list(values) + [0.0] * (9 - len(values))
    return FeatureVector.from_sequence(padded)


def rating(answers, listener="l1", song="s1"):
    return Rating("r", listener, song, answers, 0)


class TestQualityScore:
    def test_default_profile_is_pure_difference_bias(self):
        prefs = PreferenceProfile("l1")
        r = rating({RatingQuestion.HAPPY: 5, RatingQuestion.LIKE: 1})
        assert quality_score(r, prefs) == 2.0

    def test_single_term_product(self):
        prefs = PreferenceProfile("l1", {"difference": 0.0, "happy": 2.0})
        r = rating({RatingQuestion.HAPPY: 5})
        assert quality_score(r, prefs) == 4.0

    def test_fallback_to_store_mean_then_zero(self):
        prefs = PreferenceProfile("l1", {"difference": 0.0, "happy": 1.0, "upbeat": 1.0})
        # listener answered nothing; happy falls back to store mean, upbeat to 0
        assert quality_score(None, prefs, {RatingQuestion.HAPPY: 1.5}) == 1.5

    def test_matches_brute_force_sum(self):
        rng = random.Random(99)
        aspects = ["difference", "happy", "danceable", "artificial", "upbeat"]
        questions = {
            "happy": RatingQuestion.HAPPY,
            "danceable": RatingQuestion.DANCEABLE,
            "artificial": RatingQuestion.ARTIFICIAL,
            "upbeat": RatingQuestion.UPBEAT,
        }
        for _ in range(50):
            weights = {a: rng.uniform(-2, 2) for a in aspects}
            answers = {
                q: rng.randint(1, 5) for name, q in questions.items() if rng.random() < 0.7
            }
            fallback = {q: rng.uniform(-2, 2) for q in questions.values()}
            prefs = PreferenceProfile("l1", weights)
            r = rating(answers) if answers else None
            expected = weights["difference"]
            for name, q in questions.items():
                if r is not None and q in answers:
                    ri = answers[q] - 3
                else:
                    ri = fallback[q]
                expected += ri * weights[name]
            assert quality_score(r, prefs, fallback) == pytest.approx(expected, abs=1e-12)

    def test_linear_in_preference_weights(self):
        rng = random.Random(5)
        weights = {"difference": 1.0, "happy": -0.5, "danceable": 0.25, "artificial": 0.0, "upbeat": 1.5}
        answers = {q: rng.randint(1, 5) for q in
                   (RatingQuestion.HAPPY, RatingQuestion.DANCEABLE, RatingQuestion.UPBEAT)}
        r = rating(answers)
        alpha = 0.5
        scaled = {a: w * alpha for a, w in weights.items()}
        q1 = quality_score(r, PreferenceProfile("l", weights))
        q2 = quality_score(r, PreferenceProfile("l", scaled))
        assert q2 == pytest.approx(alpha * q1, abs=1e-12)


class TestSelectionProbabilities:
    def test_q_zero_is_exactly_uniform(self):
        current = fv(0.0)
        candidates = [fv(1.0), fv(2.0), fv(3.0), fv(4.0)]
        probs = selection_probabilities(current, candidates, 0.0, CFG)
        assert probs == [0.25, 0.25, 0.25, 0.25]

    def test_no_current_song_is_uniform(self):
        probs = selection_probabilities(None, [fv(1.0), fv(2.0)], 5.0, CFG)
        assert probs == [0.5, 0.5]

    def test_hand_evaluation_positive_exponent(self):
        # distances 1 and 2, Q/B = 1 -> probabilities 1/3, 2/3
        probs = selection_probabilities(fv(0.0), [fv(1.0), fv(2.0)], 1.0, CFG)
        assert probs == pytest.approx([1 / 3, 2 / 3], abs=1e-12)

    def test_hand_evaluation_negative_exponent(self):
        # Q/B = -1 favors the nearer song: 2/3, 1/3
        probs = selection_probabilities(fv(0.0), [fv(1.0), fv(2.0)], -1.0, CFG)
        assert probs == pytest.approx([2 / 3, 1 / 3], abs=1e-12)

    def test_probabilities_sum_to_one(self):
        rng = random.Random(13)
        current = random_features(rng)
        candidates = [random_features(rng) for _ in range(10)]
        for q in (-3.0, -1.0, 0.0, 0.5, 2.0):
            probs = selection_probabilities(current, candidates, q, CFG)
            assert sum(probs) == pytest.approx(1.0, abs=1e-12)
            assert all(p > 0 for p in probs)

    def test_sign_law_two_candidates(self):
        rng = random.Random(17)
        for _ in range(100):
            current = random_features(rng)
            near = random_features(rng)
            far = random_features(rng)
            d_near = math.dist(current.as_tuple(), near.as_tuple())
            d_far = math.dist(current.as_tuple(), far.as_tuple())
            if d_near > d_far:
                near, far = far, near
            elif d_near == d_far:
                continue
            for q in (-2.0, -0.5, 0.5, 2.0, 0.0):
                p_near = selection_probabilities(current, [near, far], q, CFG)[0]
                if q < 0:
                    assert p_near > 0.5
                elif q > 0:
                    assert p_near < 0.5
                else:
                    assert p_near == pytest.approx(0.5, abs=1e-12)

    def test_distance_scaling_invariance(self):
        # Scaling every feature (hence every distance) by c > 0 cancels.
        rng = random.Random(19)
        current = random_features(rng)
        candidates = [random_features(rng) for _ in range(6)]
        c = 7.5
        scale = lambda v: FeatureVector.from_sequence([x * c for x in v.as_tuple()])
        for q in (-2.0, 1.0, 3.0):
            p1 = selection_probabilities(current, candidates, q, CFG)
            p2 = selection_probabilities(scale(current), [scale(x) for x in candidates], q, CFG)
            assert p1 == pytest.approx(p2, abs=1e-12)

    def test_exponent_clamp_saturates(self):
        current = fv(0.0)
        candidates = [fv(1.0), fv(2.0), fv(0.5)]
        at_clamp = selection_probabilities(current, candidates, CFG.exponent_clamp, CFG)
        beyond = selection_probabilities(current, candidates, CFG.exponent_clamp * 3, CFG)
        assert at_clamp == pytest.approx(beyond, abs=1e-15)

    def test_distance_floor_handles_duplicates(self):
        current = fv(1.0)
        candidates = [fv(1.0), fv(2.0)]  # first is a duplicate of current
        probs = selection_probabilities(current, candidates, -2.0, CFG)
        assert sum(probs) == pytest.approx(1.0)
        assert probs[0] > probs[1]  # duplicate is "nearest"

    def test_empty_pool_raises(self):
        with pytest.raises(PoolExhausted):
            selection_probabilities(fv(0.0), [], 1.0, CFG)


class TestNextSong:
    def test_empirical_frequencies_match_exact(self):
        rng_data = random.Random(23)
        current = random_features(rng_data)
        candidates = [(f"s{i}", random_features(rng_data)) for i in range(5)]
        probs = selection_probabilities(current, [f for _, f in candidates], 1.5, CFG)
        rng = random.Random(42)
        n = 100_000
        counts = Counter(
            next_song(current, candidates, 1.5, CFG, rng) for _ in range(n)
        )
        observed = [counts[f"s{i}"] for i in range(5)]
        expected = [p * n for p in probs]
        _, p_value = scipy_stats.chisquare(observed, expected)
        assert p_value > 0.01

    def test_deterministic_replay(self):
        rng_data = random.Random(29)
        current = random_features(rng_data)
        candidates = [(f"s{i}", random_features(rng_data)) for i in range(8)]
        seq_a = [next_song(current, candidates, -1.0, CFG, random.Random(7)) for _ in range(1)]
        run = lambda: [
            next_song(current, candidates, -1.0, CFG, rng) for rng in [random.Random(7)]
        ]
        assert run() == run() == seq_a


class TestAdvanceSession:
    def session(self):
        return SessionState(listener_id="l1", preference=PreferenceProfile("l1"), rng_seed=1)

    def test_fresh_session_initialization(self):
        s = advance_session(self.session(), "s1", total_songs=5)
        assert s.current_song_id == "s1"
        assert s.played_song_ids == ("s1",)

    def test_pool_reset_after_full_catalog(self):
        s = self.session()
        for song in ("s1", "s2", "s3"):
            s = advance_session(s, song, total_songs=3)
        # catalog exhausted: pool resets to just the now-playing song
        assert s.played_song_ids == ("s3",)
        assert s.current_song_id == "s3"

    def test_replay_recorded_session(self):
        rng_data = random.Random(31)
        songs = [(f"s{i}", random_features(rng_data)) for i in range(6)]

        def play(seed, steps=12):
            s = self.session()
            rng = random.Random(seed)
            sequence = []
            current = None
            for _ in range(steps):
                candidates = [c for c in songs if c[0] not in s.played_song_ids]
                if not candidates:
                    candidates = [c for c in songs if c[0] != s.current_song_id]
                q = 0.0 if current is None else 1.0
                chosen = next_song(current, candidates, q, CFG, rng)
                s = advance_session(s, chosen, len(songs))
                current = dict(songs)[chosen]
                sequence.append(chosen)
            return sequence

        assert play(123) == play(123)
