"""Event-sourced persistence: one append-only JSON-lines log.

Every mutation appends a domain event; replaying the log from an empty
store reproduces the exact in-memory state. There is no other database.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path
from threading import RLock
from typing import Any, Callable, Iterator, Optional

from .domain import (
    DomainError,
    PreferenceProfile,
    Prime,
    Rating,
    RatingQuestion,
    Song,
    center_likert,
)
from .generation import GenerationJob, JobState

EVENT_KINDS = (
    "prime_added",
    "job_enqueued",
    "job_transition",
    "song_added",
    "rating_submitted",
    "preference_updated",
)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class EventLog:
    """Append-only JSONL file with strictly increasing sequence numbers."""

    def __init__(self, path: Path, fsync: bool = True) -> None:
        self.path = Path(path)
        self.fsync = fsync
        self._seq = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            for record in self.iter_events():
                self._seq = record["seq"]
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, kind: str, payload: dict[str, Any], timestamp: int) -> int:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        self._seq += 1
        record = {"seq": self._seq, "timestamp": timestamp, "kind": kind, "payload": payload}
        self._fh.write(canonical_json(record) + "\n")
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())
        return self._seq

    def iter_events(self) -> Iterator[dict[str, Any]]:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            expected = 0
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                expected += 1
                if record["seq"] != expected:
                    raise ValueError(
                        f"event log corrupt: expected seq {expected}, got {record['seq']}"
                    )
                yield record

    def close(self) -> None:
        self._fh.close()


def _now_ms() -> int:
    return int(time.time() * 1000)


class RadioStore:
    """In-memory state rebuilt from (and persisted to) the event log.

    All mutations serialize through one lock (single-writer); readers get
    plain value objects, safe to hold across requests.
    """

    def __init__(self, log: Optional[EventLog] = None, clock: Callable[[], int] = _now_ms) -> None:
        self.log = log
        self.clock = clock
        self._lock = RLock()
        self.primes: dict[str, Prime] = {}
        self.songs: dict[str, Song] = {}
        self.jobs: dict[str, GenerationJob] = {}
        self.ratings: dict[tuple[str, str], Rating] = {}
        self.preferences: dict[str, PreferenceProfile] = {}
        if log is not None:
            for record in log.iter_events():
                self._apply(record["kind"], record["payload"])

    # -- event application (shared by live mutation and replay) ------------

    def _apply(self, kind: str, payload: dict[str, Any]) -> None:
        if kind == "prime_added":
            prime = Prime.from_json(payload)
            self.primes[prime.prime_id] = prime
        elif kind in ("job_enqueued", "job_transition"):
            job = GenerationJob.from_json(payload)
            self.jobs[job.job_id] = job
        elif kind == "song_added":
            song = Song.from_json(payload)
            self.songs[song.song_id] = song
        elif kind == "rating_submitted":
            self._apply_rating(
                payload["listener_id"],
                payload["song_id"],
                RatingQuestion(payload["question"]),
                int(payload["stars"]),
                int(payload["submitted_at"]),
            )
        elif kind == "preference_updated":
            profile = PreferenceProfile.from_json(payload)
            self.preferences[profile.listener_id] = profile
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    def _apply_rating(
        self, listener_id: str, song_id: str, question: RatingQuestion, stars: int, ts: int
    ) -> Rating:
        key = (listener_id, song_id)
        existing = self.ratings.get(key)
        answers = dict(existing.answers) if existing else {}
        answers[question] = stars
        rating = Rating(
            rating_id=f"{listener_id}:{song_id}",
            listener_id=listener_id,
            song_id=song_id,
            answers=answers,
            submitted_at=ts,
        )
        self.ratings[key] = rating
        return rating

    def _emit(self, kind: str, payload: dict[str, Any], ts: int) -> None:
        if self.log is not None:
            self.log.append(kind, payload, ts)

    # -- mutations ---------------------------------------------------------

    def add_prime(self, prime: Prime) -> None:
        with self._lock:
            if prime.prime_id in self.primes:
                raise DomainError(f"duplicate prime id {prime.prime_id!r}")
            self.primes[prime.prime_id] = prime
            self._emit("prime_added", prime.to_json(), self.clock())

    def add_song(self, song: Song) -> None:
        with self._lock:
            if song.song_id in self.songs:
                return  # at-most-once per job; replayed step is a no-op
            self.songs[song.song_id] = song
            self._emit("song_added", song.to_json(), self.clock())

    def record_job(self, job: GenerationJob) -> None:
        with self._lock:
            kind = "job_enqueued" if job.job_id not in self.jobs else "job_transition"
            self.jobs[job.job_id] = job
            self._emit(kind, job.to_json(), self.clock())

    def submit_rating(
        self, listener_id: str, song_id: str, question: RatingQuestion, stars: int
    ) -> Rating:
        if song_id not in self.songs:
            raise KeyError(f"unknown song {song_id!r}")
        center_likert(stars)  # range validation
        with self._lock:
            ts = self.clock()
            rating = self._apply_rating(listener_id, song_id, question, stars, ts)
            self._emit(
                "rating_submitted",
                {
                    "listener_id": listener_id,
                    "song_id": song_id,
                    "question": question.value,
                    "stars": stars,
                    "submitted_at": ts,
                },
                ts,
            )
            return rating

    def set_preferences(self, profile: PreferenceProfile) -> None:
        with self._lock:
            self.preferences[profile.listener_id] = profile
            self._emit("preference_updated", profile.to_json(), self.clock())

    # -- queries -----------------------------------------------------------

    def get_prime(self, prime_id: str) -> Optional[Prime]:
        return self.primes.get(prime_id)

    def get_song(self, song_id: str) -> Optional[Song]:
        return self.songs.get(song_id)

    def has_song(self, song_id: str) -> bool:
        return song_id in self.songs

    def all_ratings(self) -> list[Rating]:
        return list(self.ratings.values())

    def rating_count(self) -> int:
        return len(self.ratings)

    def ratings_for_song(self, song_id: str) -> list[Rating]:
        return [r for r in self.ratings.values() if r.song_id == song_id]

    def listener_rating(self, listener_id: str, song_id: str) -> Optional[Rating]:
        return self.ratings.get((listener_id, song_id))

    def mean_centered_answers(self, song_id: str) -> dict[RatingQuestion, float]:
        """Store-wide mean centered answer per question for one song."""
        sums: dict[RatingQuestion, list[int]] = {}
        for rating in self.ratings_for_song(song_id):
            for question, stars in rating.answers.items():
                sums.setdefault(question, []).append(center_likert(stars))
        return {q: sum(v) / len(v) for q, v in sums.items()}

    def get_preferences(self, listener_id: str) -> PreferenceProfile:
        profile = self.preferences.get(listener_id)
        return profile if profile is not None else PreferenceProfile(listener_id=listener_id)

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        """Canonical state dump for equality checks and replay verification."""
        return {
            "primes": [self.primes[k].to_json() for k in sorted(self.primes)],
            "songs": [self.songs[k].to_json() for k in sorted(self.songs)],
            "jobs": [self.jobs[k].to_json() for k in sorted(self.jobs)],
            "ratings": [
                self.ratings[k].to_json() for k in sorted(self.ratings)
            ],
            "preferences": [
                self.preferences[k].to_json() for k in sorted(self.preferences)
            ],
        }

    def snapshot_json(self) -> str:
        return canonical_json(self.snapshot())
