"""A tour of the whole station, end to end, with no HTTP involved.

RadioService is the application core the HTTP layer wraps. This script
drives it directly: an admin submits a prime, the worker generates a
song, a listener tunes in, rates, and the analytics report updates —
all persisted to an append-only event log that survives a restart.

Run from the repo root:  python3 demos/03_station_tour.py
"""

import json
import tempfile
from pathlib import Path

from airadio.config import AppConfig
from airadio.service import RadioService

CATALOG = Path(__file__).resolve().parent.parent / "data" / "catalog.json"


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        cfg = AppConfig(
            data_dir=Path(tmp), catalog_path=CATALOG, admin_token="demo-token"
        )
        service = RadioService(cfg)

        # An admin submits a short audio prime; the scheduler picks the
        # artist/genre prompts and a generation job is enqueued.
        result = service.api_admin_submit_prime(
            {
                "prime_id": "tour-prime",
                "contributor_name": "local musician",
                "prime_artist_features": [0.7, 0.4, 0.2, -12.0, 0.1, 0.3, 0.12, 0.5, 0.6],
                "audio_ref": "primes/tour.wav",
            },
            token="demo-token",
        )
        print("Prime accepted. Scheduler decision:")
        print(json.dumps(result["decision"], indent=2))

        # The background worker (a thread in production) picks up the job.
        job = service.run_worker_step()
        print(f"\nWorker finished {job.job_id}: {job.state.value} -> {job.result_song_id}")

        # A listener tunes in. Question order is a fresh permutation per song.
        nxt = service.api_next_song(None)
        session = nxt["session"]
        print(f"\nNow playing {nxt['song']['song_id']} ({nxt['audio_url']})")
        print("Ask the questions in this order:", ", ".join(nxt["question_order"]))

        # They answer a couple of questions (raw 1-5 stars).
        for question, stars in [("like", 5), ("happy", 4), ("danceable", 2)]:
            service.api_rate(session, nxt["song"]["song_id"], question, stars)
        print("Submitted 3 answers.")

        # Preferences steer future picks; out-of-range values are rejected.
        service.api_put_preferences(session, {
            "difference": 1.0, "happy": 2.0, "danceable": 0.0,
            "artificial": 0.0, "upbeat": 0.0,
        })

        stats = service.api_stats()
        like = next(s for s in stats["summaries"] if s["question"] == "like")
        print(f"\nStation stats: {like['count']} 'like' rating(s), mean {like['mean']} stars")

        # Everything above was appended to one JSONL event log. A restart
        # replays it and lands in the identical state.
        before = service.store.snapshot_json()
        service.store.log.close()
        reborn = RadioService(cfg)
        assert reborn.store.snapshot_json() == before
        print("\nRestarted from the event log: state is byte-identical.")
        print(f"Event log: {cfg.data_dir / 'events.jsonl'}")


if __name__ == "__main__":
    main()
