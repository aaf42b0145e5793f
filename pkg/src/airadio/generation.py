"""Slow-creator generation pipeline modeled as an asynchronous job queue.

Real song generation runs for hours per clip, so the pipeline is a FIFO
queue drained by a single worker with a configurable simulated latency.
A deterministic mock backend stands in for the neural generator.
"""

from __future__ import annotations

import hashlib
import io
import math
import random
import struct
import time
import wave
from dataclasses import dataclass, replace
from enum import Enum
from threading import Lock
from typing import Any, Callable, Mapping, Optional, Protocol

from .catalog import Catalog
from .domain import (
    ArtistProfile,
    FEATURE_NAMES,
    FeatureVector,
    GenreProfile,
    Prime,
    Song,
    prompt_features,
)

BLEND_PRIME = 0.25
BLEND_ARTIST = 0.375
BLEND_GENRE = 0.375
JITTER_HALF_WIDTH = 0.05
LOUDNESS_JITTER_SCALE = 10.0

# Per-dimension clamp ranges; loudness is dBFS, everything else unit interval.
_FEATURE_RANGES = {name: (0.0, 1.0) for name in FEATURE_NAMES}
_FEATURE_RANGES["loudness"] = (-60.0, 0.0)


class QueueError(RuntimeError):
    """Enqueue rejected: unknown reference or queue at capacity."""


class SimulatedCrash(RuntimeError):
    """Injected by tests to model a worker dying mid-step."""


class JobState(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    COMPLETE = "complete"
    FAILED = "failed"


_LEGAL_TRANSITIONS = {
    JobState.QUEUED: {JobState.RUNNING},
    JobState.RUNNING: {JobState.COMPLETE, JobState.FAILED},
    JobState.COMPLETE: set(),
    JobState.FAILED: set(),
}


@dataclass(frozen=True)
class GenerationJob:
    job_id: str
    prime_id: str
    artist_prompt: str
    genre_prompt: str
    state: JobState
    enqueued_at: int
    started_at: Optional[int] = None
    finished_at: Optional[int] = None
    result_song_id: Optional[str] = None
    failure_reason: Optional[str] = None

    def to_json(self) -> dict[str, Any]:
        return {
            "job_id": self.job_id,
            "prime_id": self.prime_id,
            "artist_prompt": self.artist_prompt,
            "genre_prompt": self.genre_prompt,
            "state": self.state.value,
            "enqueued_at": self.enqueued_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "result_song_id": self.result_song_id,
            "failure_reason": self.failure_reason,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "GenerationJob":
        return cls(
            job_id=str(data["job_id"]),
            prime_id=str(data["prime_id"]),
            artist_prompt=str(data["artist_prompt"]),
            genre_prompt=str(data["genre_prompt"]),
            state=JobState(data["state"]),
            enqueued_at=int(data["enqueued_at"]),
            started_at=data.get("started_at"),
            finished_at=data.get("finished_at"),
            result_song_id=data.get("result_song_id"),
            failure_reason=data.get("failure_reason"),
        )


def check_transition(old: JobState, new: JobState) -> None:
    if new not in _LEGAL_TRANSITIONS[old]:
        raise QueueError(f"illegal job transition {old.value} -> {new.value}")


class GeneratorBackend(Protocol):
    """Produces (song_features, audio_ref) for a prompt; deterministic per seed."""

    def generate(
        self, prime: Prime, artist: ArtistProfile, genre: GenreProfile, seed: int
    ) -> tuple[FeatureVector, str]: ...


def _derive_rng(prime_id: str, artist_id: str, genre_id: str, seed: int) -> random.Random:
    digest = hashlib.sha256(
        f"{prime_id}|{artist_id}|{genre_id}|{seed}".encode("utf-8")
    ).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def blend_center(
    prime: FeatureVector, artist: FeatureVector, genre: FeatureVector
) -> FeatureVector:
    """Convex blend of the three prompt inputs (before jitter and clamping)."""
    return FeatureVector.from_sequence(
        [
            BLEND_PRIME * p + BLEND_ARTIST * a + BLEND_GENRE * g
            for p, a, g in zip(prime.as_tuple(), artist.as_tuple(), genre.as_tuple())
        ]
    )


def mock_generate(
    prime: Prime, artist: ArtistProfile, genre: GenreProfile, seed: int
) -> tuple[FeatureVector, str]:
    """Deterministic stand-in for the neural generator.

    Song features are a fixed convex blend of the prompt features plus
    seeded uniform jitter, clamped to each dimension's domain, so the
    scheduler sees signal from all three prompt inputs.
    """
    rng = _derive_rng(prime.prime_id, artist.artist_id, genre.genre_id, seed)
    center = blend_center(prime.prime_artist_features, artist.features, genre.features)
    values = []
    for name, c in zip(FEATURE_NAMES, center.as_tuple()):
        jitter = rng.uniform(-JITTER_HALF_WIDTH, JITTER_HALF_WIDTH)
        if name == "loudness":
            jitter *= LOUDNESS_JITTER_SCALE
        lo, hi = _FEATURE_RANGES[name]
        values.append(min(max(c + jitter, lo), hi))
    digest = hashlib.sha256(
        f"{prime.prime_id}|{artist.artist_id}|{genre.genre_id}|{seed}".encode("utf-8")
    ).hexdigest()
    return FeatureVector.from_sequence(values), f"audio/{digest[:16]}.wav"


class MockGeneratorBackend:
    """GeneratorBackend adapter over :func:`mock_generate`."""

    def generate(
        self, prime: Prime, artist: ArtistProfile, genre: GenreProfile, seed: int
    ) -> tuple[FeatureVector, str]:
        return mock_generate(prime, artist, genre, seed)


class FailingBackend:
    """Test backend that always raises."""

    def __init__(self, reason: str = "backend unavailable") -> None:
        self.reason = reason

    def generate(self, prime, artist, genre, seed):
        raise RuntimeError(self.reason)


def placeholder_tone(audio_ref: str, duration_s: float = 2.0, sample_rate: int = 22050) -> bytes:
    """Render a short sine chord WAV so the player has something to stream.

    The chord's root pitch is derived from the audio ref, so distinct songs
    sound (slightly) distinct.
    """
    digest = hashlib.sha256(audio_ref.encode("utf-8")).digest()
    root = 220.0 * 2 ** ((digest[0] % 24) / 12.0)
    freqs = (root, root * 5 / 4, root * 3 / 2)
    n = int(duration_s * sample_rate)
    frames = bytearray()
    for i in range(n):
        t = i / sample_rate
        envelope = min(1.0, 10.0 * t, 10.0 * (duration_s - t))
        sample = sum(math.sin(2 * math.pi * f * t) for f in freqs) / len(freqs)
        frames += struct.pack("<h", int(22000 * envelope * sample))
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(bytes(frames))
    return buf.getvalue()


class JobStore(Protocol):
    """Persistence surface the queue needs from the song store."""

    def get_prime(self, prime_id: str) -> Optional[Prime]: ...
    def has_song(self, song_id: str) -> bool: ...
    def add_song(self, song: Song) -> None: ...


def _now_ms() -> int:
    return int(time.time() * 1000)


class GenerationQueue:
    """FIFO job queue with a single-consumer worker.

    ``enqueue`` may be called concurrently; ``run_worker_step`` must only
    ever run on one thread. Crash recovery relies on deterministic song ids
    per job: a re-run step never persists a second Song.
    """

    def __init__(
        self,
        catalog: Catalog,
        store: JobStore,
        backend: Optional[GeneratorBackend] = None,
        capacity: int = 1000,
        latency_ms: int = 0,
        seed: int = 0,
        clock: Callable[[], int] = _now_ms,
        on_transition: Optional[Callable[[GenerationJob], None]] = None,
    ) -> None:
        self.catalog = catalog
        self.store = store
        self.backend = backend or MockGeneratorBackend()
        self.capacity = capacity
        self.latency_ms = latency_ms
        self.seed = seed
        self.clock = clock
        self.on_transition = on_transition
        self._jobs: dict[str, GenerationJob] = {}
        self._counter = 0
        self._lock = Lock()

    @property
    def jobs(self) -> dict[str, GenerationJob]:
        return dict(self._jobs)

    def get_job(self, job_id: str) -> Optional[GenerationJob]:
        return self._jobs.get(job_id)

    def restore_job(self, job: GenerationJob) -> None:
        """Re-install a job during event-log replay (bypasses validation)."""
        self._jobs[job.job_id] = job
        self._counter = max(self._counter, len(self._jobs))

    def pending_count(self) -> int:
        return sum(1 for j in self._jobs.values() if j.state in (JobState.QUEUED, JobState.RUNNING))

    def enqueue(self, prime_id: str, artist_prompt: str, genre_prompt: str) -> GenerationJob:
        with self._lock:
            if self.store.get_prime(prime_id) is None:
                raise QueueError(f"unknown prime {prime_id!r}")
            if artist_prompt not in self.catalog.artists:
                raise QueueError(f"unknown artist prompt {artist_prompt!r}")
            if genre_prompt not in self.catalog.genres:
                raise QueueError(f"unknown genre prompt {genre_prompt!r}")
            if self.pending_count() >= self.capacity:
                raise QueueError(f"generation queue at capacity ({self.capacity})")
            self._counter += 1
            job = GenerationJob(
                job_id=f"job-{self._counter:06d}",
                prime_id=prime_id,
                artist_prompt=artist_prompt,
                genre_prompt=genre_prompt,
                state=JobState.QUEUED,
                enqueued_at=self.clock(),
            )
            self._jobs[job.job_id] = job
        if self.on_transition:
            self.on_transition(job)
        return job

    def _transition(self, job: GenerationJob, **changes: Any) -> GenerationJob:
        new = replace(job, **changes)
        check_transition(job.state, new.state)
        self._jobs[new.job_id] = new
        if self.on_transition:
            self.on_transition(new)
        return new

    def _next_job(self) -> Optional[GenerationJob]:
        # Resume an interrupted running job before starting a fresh one.
        running = [j for j in self._jobs.values() if j.state == JobState.RUNNING]
        if running:
            return min(running, key=lambda j: j.enqueued_at)
        queued = [j for j in self._jobs.values() if j.state == JobState.QUEUED]
        if queued:
            return min(queued, key=lambda j: (j.enqueued_at, j.job_id))
        return None

    def run_worker_step(self, crash_after_start: bool = False) -> Optional[GenerationJob]:
        """Advance the oldest pending job to a terminal state.

        Returns the finished job, or None if the queue was idle. Backend
        failures are recorded on the job, never raised. ``crash_after_start``
        aborts between the running transition and completion, simulating a
        worker crash; the next step resumes the job.
        """
        job = self._next_job()
        if job is None:
            return None
        if job.state == JobState.QUEUED:
            started = self.clock()
            job = self._transition(
                job, state=JobState.RUNNING, started_at=max(started, job.enqueued_at)
            )
        if crash_after_start:
            raise SimulatedCrash(job.job_id)
        if self.latency_ms > 0:
            time.sleep(self.latency_ms / 1000.0)
        song_id = f"song-{job.job_id}"
        try:
            if not self.store.has_song(song_id):
                prime = self.store.get_prime(job.prime_id)
                artist = self.catalog.artists[job.artist_prompt]
                genre = self.catalog.genres[job.genre_prompt]
                features, audio_ref = self.backend.generate(prime, artist, genre, self.seed)
                song = Song(
                    song_id=song_id,
                    prime_id=job.prime_id,
                    artist_prompt=job.artist_prompt,
                    genre_prompt=job.genre_prompt,
                    prompt_features=prompt_features(prime, artist, genre),
                    song_features=features,
                    audio_ref=audio_ref,
                    created_at=self.clock(),
                )
                self.store.add_song(song)
        except SimulatedCrash:
            raise
        except Exception as exc:
            finished = max(self.clock(), job.started_at or job.enqueued_at)
            return self._transition(
                job, state=JobState.FAILED, finished_at=finished, failure_reason=str(exc)
            )
        finished = max(self.clock(), job.started_at or job.enqueued_at)
        return self._transition(
            job, state=JobState.COMPLETE, finished_at=finished, result_song_id=song_id
        )
