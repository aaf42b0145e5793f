"""A first listen: generate a few songs, rate one, watch the picks shift.

The recommender turns your reaction to the song that just ended into a
quality score Q. Positive Q pushes the next pick toward songs that sound
*different*; negative Q pulls it toward songs that sound *similar*; Q = 0
is a uniform shuffle. This script makes that concrete with real numbers.

Run from the repo root:  python3 demos/01_rate_and_recommend.py
"""

import random
from pathlib import Path

from airadio.catalog import Standardization, load_catalog
from airadio.domain import PreferenceProfile, Rating, RatingQuestion
from airadio.generation import GenerationQueue
from airadio.recommender import (
    RecommenderConfig,
    quality_score,
    selection_probabilities,
)
from airadio.store import RadioStore

CATALOG = Path(__file__).resolve().parent.parent / "data" / "catalog.json"


def main() -> None:
    catalog = load_catalog(CATALOG)
    store = RadioStore()
    queue = GenerationQueue(catalog, store, seed=7)

    # Mock-generate five songs from one prime, varying the prompts.
    from airadio.sim import random_prime
    import numpy as np

    prime = random_prime("demo-prime", np.random.default_rng(7))
    store.primes[prime.prime_id] = prime
    pairs = [("the-doors", "rock"), ("dolly-parton", "folk"),
             ("lady-gaga", "pop"), ("otis-redding", "funk"),
             ("elton-john", "classical")]
    for artist, genre in pairs:
        queue.enqueue(prime.prime_id, artist, genre)
        queue.run_worker_step()
    songs = list(store.songs.values())
    print(f"Generated {len(songs)} songs from one prime:")
    for s in songs:
        print(f"  {s.song_id}: {s.artist_prompt} x {s.genre_prompt}")

    # You just heard the first song. Distances are over z-scored features.
    std = Standardization.fit(s.song_features for s in songs)
    current, *rest = songs
    cur_z = std.apply(current.song_features)
    rest_z = [std.apply(s.song_features) for s in rest]
    cfg = RecommenderConfig()

    def show(label: str, q: float) -> None:
        probs = selection_probabilities(cur_z, rest_z, q, cfg)
        print(f"\n{label}  (Q = {q:+.1f})")
        for song, p in sorted(zip(rest, probs), key=lambda t: -t[1]):
            print(f"  {p:6.1%}  {song.artist_prompt} x {song.genre_prompt}")

    show("No reaction yet: uniform shuffle", 0.0)

    # Now you rate the current song and set preferences. A listener who
    # loved it and wants variety (difference=+2) gets pushed away from it;
    # one who wants more of the same (difference=-2) gets pulled back in.
    rating = Rating(
        rating_id="you:" + current.song_id,
        listener_id="you",
        song_id=current.song_id,
        answers={RatingQuestion.HAPPY: 5, RatingQuestion.DANCEABLE: 4},
        submitted_at=0,
    )
    explorer = PreferenceProfile(listener_id="you", weights={
        "difference": 2.0, "happy": 1.0, "danceable": 1.0,
        "artificial": 0.0, "upbeat": 0.0,
    })
    homebody = PreferenceProfile(listener_id="you", weights={
        "difference": -2.0, "happy": -1.0, "danceable": 0.0,
        "artificial": 0.0, "upbeat": 0.0,
    })
    q_explore = quality_score(rating, explorer)
    q_settle = quality_score(rating, homebody)
    show("Loved it, wants variety", q_explore)
    show("Loved it, wants more of the same", q_settle)

    # Sampling actually follows those probabilities.
    from airadio.recommender import next_song
    rng = random.Random(0)
    cands = [(s.song_id, z) for s, z in zip(rest, rest_z)]
    picks = [next_song(cur_z, cands, q_explore, cfg, rng) for _ in range(10)]
    print("\nTen draws under the variety-seeking profile:")
    print(" ", ", ".join(picks))


if __name__ == "__main__":
    main()
