"""The radio service tying everything together.

``RadioService`` holds the wiring (store, catalog, queue, scheduler,
recommender, listener sessions); ``create_app`` exposes it over HTTP/JSON.
"""

from __future__ import annotations

import random
import secrets
import threading
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .analytics import analytics_report
from .catalog import Catalog, Standardization, load_catalog, standardize
from .config import AppConfig
from .domain import (
    ALL_QUESTIONS,
    DomainError,
    FeatureVector,
    PreferenceProfile,
    Prime,
    RatingQuestion,
    Song,
)
from .generation import GenerationQueue, QueueError, placeholder_tone
from .recommender import SessionState, advance_session, next_song, quality_score
from .scheduler import (
    OutcomeSpec,
    RatingModel,
    compute_outcome,
    fit_rating_model,
    select_prompt,
)
from .store import EventLog, RadioStore


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class RadioService:
    """Application core, independent of the HTTP layer."""

    def __init__(
        self,
        config: AppConfig,
        catalog: Optional[Catalog] = None,
        store: Optional[RadioStore] = None,
    ) -> None:
        self.config = config
        self.catalog = catalog if catalog is not None else load_catalog(config.catalog_path)
        if store is None:
            config.data_dir.mkdir(parents=True, exist_ok=True)
            store = RadioStore(log=EventLog(config.data_dir / "events.jsonl"))
        self.store = store
        self.queue = GenerationQueue(
            catalog=self.catalog,
            store=self.store,
            capacity=config.queue_capacity,
            latency_ms=config.generation_latency_ms,
            seed=config.generation_seed,
            on_transition=self.store.record_job,
        )
        for job in self.store.jobs.values():
            self.queue.restore_job(job)
        seed = config.scheduler.rng_seed
        self._scheduler_rng = np.random.default_rng(seed)
        self._session_seed_rng = random.Random(seed)
        self.sessions: dict[str, SessionState] = {}
        self._session_rngs: dict[str, random.Random] = {}
        self._model: Optional[RatingModel] = None
        self._model_dirty = True
        self._std: Standardization = Standardization.identity()
        self._std_count = -1
        self._lock = threading.RLock()

    # -- sessions ----------------------------------------------------------

    def _ensure_session(self, token: Optional[str]) -> str:
        with self._lock:
            if token and token in self.sessions:
                return token
            token = token or secrets.token_urlsafe(32)
            if token not in self.sessions:
                seed = self._session_seed_rng.getrandbits(63)
                self.sessions[token] = SessionState(
                    listener_id=token,
                    preference=self.store.get_preferences(token),
                    rng_seed=seed,
                )
                self._session_rngs[token] = random.Random(seed)
            return token

    def _standardization(self) -> Standardization:
        songs = self.store.songs
        if len(songs) != self._std_count:
            self._std = Standardization.fit(s.song_features for s in songs.values())
            self._std_count = len(songs)
        return self._std

    # -- listener API ------------------------------------------------------

    def api_next_song(self, session_token: Optional[str]) -> dict[str, Any]:
        token = self._ensure_session(session_token)
        with self._lock:
            session = self.sessions[token]
            rng = self._session_rngs[token]
            songs = list(self.store.songs.values())
            if not songs:
                raise ServiceError(409, "catalog_empty", "no songs have been generated yet")
            std = self._standardization()
            current = self.store.get_song(session.current_song_id) if session.current_song_id else None
            if current is not None:
                q = quality_score(
                    self.store.listener_rating(token, current.song_id),
                    session.preference,
                    self.store.mean_centered_answers(current.song_id),
                )
                current_features = standardize_features(current.song_features, std)
            else:
                q = 0.0
                current_features = None
            candidates = [
                (s.song_id, standardize_features(s.song_features, std))
                for s in songs
                if s.song_id not in session.played_song_ids
            ]
            if not candidates:
                # pool exhausted mid-session (e.g. one-song catalog): replay all but current
                candidates = [
                    (s.song_id, standardize_features(s.song_features, std))
                    for s in songs
                    if s.song_id != session.current_song_id
                ] or [(songs[0].song_id, standardize_features(songs[0].song_features, std))]
            chosen = next_song(current_features, candidates, q, self.config.recommender, rng)
            self.sessions[token] = advance_session(session, chosen, len(songs))
            song = self.store.get_song(chosen)
            order = list(ALL_QUESTIONS)
            rng.shuffle(order)
            return {
                "session": token,
                "song": song.to_json(),
                "audio_url": f"/audio/{song.song_id}.wav",
                "question_order": [q_.value for q_ in order],
                "question_text": {q_.value: q_.text for q_ in ALL_QUESTIONS},
            }

    def api_rate(self, session_token: Optional[str], song_id: str, question: str, stars: Any) -> dict[str, Any]:
        token = self._ensure_session(session_token)
        if not self.store.has_song(song_id):
            raise ServiceError(404, "unknown_song", f"no song {song_id!r}")
        try:
            question_enum = RatingQuestion(question)
        except ValueError:
            raise ServiceError(422, "unknown_question", f"no question {question!r}")
        if not isinstance(stars, int) or isinstance(stars, bool) or not 1 <= stars <= 5:
            raise ServiceError(422, "invalid_stars", "stars must be an integer 1-5")
        self.store.submit_rating(token, song_id, question_enum, stars)
        self._model_dirty = True
        return {"session": token, "ok": True}

    def api_get_preferences(self, session_token: Optional[str]) -> dict[str, Any]:
        token = self._ensure_session(session_token)
        profile = self.sessions[token].preference
        return {"session": token, "weights": dict(profile.weights)}

    def api_put_preferences(self, session_token: Optional[str], weights: dict[str, Any]) -> dict[str, Any]:
        token = self._ensure_session(session_token)
        try:
            profile = PreferenceProfile(listener_id=token, weights=weights)
        except DomainError as exc:
            raise ServiceError(422, "invalid_weights", str(exc))
        with self._lock:
            self.store.set_preferences(profile)
            session = self.sessions[token]
            self.sessions[token] = SessionState(
                listener_id=session.listener_id,
                preference=profile,
                rng_seed=session.rng_seed,
                current_song_id=session.current_song_id,
                played_song_ids=session.played_song_ids,
            )
        return {"session": token, "weights": dict(profile.weights)}

    # -- admin -------------------------------------------------------------

    def rating_model(self) -> Optional[RatingModel]:
        """Lazily refit the rating model on the current store contents."""
        with self._lock:
            if not self._model_dirty:
                return self._model
            spec = OutcomeSpec(mode=self.config.outcome_mode)
            rows = []
            for song in self.store.songs.values():
                outcome = compute_outcome(self.store.ratings_for_song(song.song_id), spec)
                if outcome is not None:
                    rows.append((song.prompt_features, outcome))
            self._model = (
                fit_rating_model(rows, self.config.scheduler.ridge_lambda, spec) if rows else None
            )
            self._model_dirty = False
            return self._model

    def api_admin_submit_prime(self, payload: dict[str, Any], token: Optional[str]) -> dict[str, Any]:
        if token != self.config.admin_token:
            raise ServiceError(401, "unauthorized", "admin token required")
        try:
            features = FeatureVector.from_json(payload["prime_artist_features"])
            prime = Prime(
                prime_id=str(payload.get("prime_id") or f"prime-{secrets.token_hex(6)}"),
                contributor_name=str(payload.get("contributor_name", "")),
                prime_artist_features=features,
                audio_ref=str(payload.get("audio_ref", "")),
                submitted_at=int(time.time() * 1000),
            )
        except (KeyError, TypeError, DomainError) as exc:
            raise ServiceError(422, "invalid_prime", str(exc))
        with self._lock:
            try:
                self.store.add_prime(prime)
            except DomainError as exc:
                raise ServiceError(422, "invalid_prime", str(exc))
            decision = select_prompt(
                prime,
                self.catalog,
                self.rating_model(),
                self.config.scheduler,
                self._scheduler_rng,
                rating_count=self.store.rating_count(),
                song_count=len(self.store.songs),
            )
            try:
                job = self.queue.enqueue(
                    prime.prime_id, decision.artist_prompt, decision.genre_prompt
                )
            except QueueError as exc:
                raise ServiceError(409, "queue_full", str(exc))
        return {
            "prime_id": prime.prime_id,
            "job_id": job.job_id,
            "decision": {
                "artist_prompt": decision.artist_prompt,
                "genre_prompt": decision.genre_prompt,
                "mode_used": decision.mode_used.value,
                "predicted_rating": decision.predicted_rating,
            },
        }

    # -- read-only ---------------------------------------------------------

    def api_stats(self, unit: str = "per_song_mean") -> dict[str, Any]:
        return analytics_report(self.store.all_ratings(), unit)

    def api_get_song(self, song_id: str) -> dict[str, Any]:
        song = self.store.get_song(song_id)
        if song is None:
            raise ServiceError(404, "unknown_song", f"no song {song_id!r}")
        return song.to_json()

    def api_get_job(self, job_id: str) -> dict[str, Any]:
        job = self.queue.get_job(job_id)
        if job is None:
            raise ServiceError(404, "unknown_job", f"no job {job_id!r}")
        return job.to_json()

    def audio_bytes(self, song_id: str) -> bytes:
        song = self.store.get_song(song_id)
        if song is None:
            raise ServiceError(404, "unknown_song", f"no song {song_id!r}")
        return placeholder_tone(song.audio_ref)

    def run_worker_step(self):
        return self.queue.run_worker_step()


def standardize_features(features: FeatureVector, std: Standardization) -> FeatureVector:
    return std.apply(features)


def create_app(service: RadioService):
    """Build the FastAPI app over a RadioService."""
    from fastapi import Body, FastAPI, Header, Query, Request
    from fastapi.responses import JSONResponse, Response
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="airadio")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.code, "message": exc.message}
        )

    @app.get("/api/next")
    def api_next(session: Optional[str] = Query(default=None)):
        return service.api_next_song(session)

    @app.post("/api/rate")
    def api_rate(payload: dict = Body(...)):
        return service.api_rate(
            payload.get("session"),
            str(payload.get("song_id", "")),
            str(payload.get("question", "")),
            payload.get("stars"),
        )

    @app.get("/api/preferences")
    def api_get_preferences(session: Optional[str] = Query(default=None)):
        return service.api_get_preferences(session)

    @app.put("/api/preferences")
    def api_put_preferences(payload: dict = Body(...)):
        return service.api_put_preferences(payload.get("session"), payload.get("weights") or {})

    @app.post("/api/admin/prime")
    def api_admin_prime(
        payload: dict = Body(...),
        x_admin_token: Optional[str] = Header(default=None),
    ):
        return service.api_admin_submit_prime(payload, x_admin_token)

    @app.get("/api/stats")
    def api_stats(unit: str = Query(default="per_song_mean")):
        return service.api_stats(unit)

    @app.get("/api/songs/{song_id}")
    def api_song(song_id: str):
        return service.api_get_song(song_id)

    @app.get("/api/jobs/{job_id}")
    def api_job(job_id: str):
        return service.api_get_job(job_id)

    @app.get("/audio/{song_id}.wav")
    def audio(song_id: str):
        return Response(content=service.audio_bytes(song_id), media_type="audio/wav")

    ui_dir = service.config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


class WorkerLoop:
    """Background single-consumer thread draining the generation queue."""

    def __init__(self, service: RadioService, tick_s: float = 0.5) -> None:
        self.service = service
        self.tick_s = tick_s
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _run(self) -> None:
        while not self._stop.is_set():
            finished = self.service.run_worker_step()
            if finished is None:
                self._stop.wait(self.tick_s)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)
