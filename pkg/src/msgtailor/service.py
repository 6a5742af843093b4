"""HTTP ingestion edge: validates events, appends them to the log, serves plans."""

from __future__ import annotations

import threading
from collections.abc import Callable
from dataclasses import replace
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Annotated, Literal, Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, ConfigDict, Field

from .catalog import Catalog
from .domain import (
    TOPICS,
    ActivitySample,
    DomainError,
    InterestsUpdate,
    MessageRead,
    Payload,
    ProfileUpdate,
    SectionAccess,
    TimeWindow,
    Topic,
    UserProfile,
    Vote,
    VoteValue,
    utc,
)
from .eventlog import EventLog
from .pipeline import NightlyPlan

TopicSlug = Literal[tuple(t.slug for t in TOPICS)]  # type: ignore[valid-type]
Likert = Annotated[int, Field(ge=0, le=2)]


class PlanStore:
    """One ``plan-YYYY-MM-DD.jsonl`` file per planned date."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path_for(self, plan_date: date) -> Path:
        return self.directory / f"plan-{plan_date.isoformat()}.jsonl"

    def exists(self, plan_date: date) -> bool:
        return self.path_for(plan_date).exists()

    def write(self, plan: NightlyPlan) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(plan.plan_date)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(plan.to_jsonl(), encoding="utf-8")
        tmp.replace(path)
        return path

    def read(self, plan_date: date) -> NightlyPlan | None:
        path = self.path_for(plan_date)
        if not path.exists():
            return None
        return NightlyPlan.from_jsonl(path.read_text(encoding="utf-8"), plan_date)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WindowIn(_Strict):
    start: int = Field(0, ge=0, le=1439)
    end: int = Field(1440, ge=1, le=1440)


class ProfileIn(_Strict):
    user_id: str = Field(min_length=1)
    name: str = ""
    gender: str
    employment_status: str
    age: int = Field(ge=18, le=100)
    quit_date: date
    fagerstrom: int = Field(ge=0, le=10)
    richmond: int = Field(ge=0, le=10)
    interests: list[Likert] = Field(min_length=5, max_length=5)
    window: WindowIn = WindowIn()
    enrolled_at: Optional[date] = None
    dropped_out_at: Optional[date] = None


class InterestsIn(_Strict):
    interests: list[Likert] = Field(min_length=5, max_length=5)


class _EventIn(_Strict):
    user_id: str
    at: Optional[datetime] = None


class VoteIn(_EventIn):
    message_id: str
    value: Literal["like", "neutral", "dislike"]


class SectionAccessIn(_EventIn):
    topic: TopicSlug
    dwell_seconds: float = Field(ge=0)


class ReadIn(_EventIn):
    message_id: str


class ActivityIn(_EventIn):
    day: date
    active_minutes: float = Field(ge=0)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class IngestionService:
    """Validation and append logic behind the HTTP routes."""

    def __init__(self, log: EventLog, catalog: Catalog, plans: PlanStore, clock: Callable[[], datetime] = _utcnow):
        self.log = log
        self.catalog = catalog
        self.plans = plans
        self.clock = clock
        self._lock = threading.Lock()
        self.profiles: dict[str, UserProfile] = {}
        for rec in log.records():
            self._track(rec.user_id, rec.payload)

    def _track(self, user_id: str, payload: Payload) -> None:
        if isinstance(payload, ProfileUpdate):
            self.profiles[user_id] = payload.profile
        elif isinstance(payload, InterestsUpdate) and user_id in self.profiles:
            self.profiles[user_id] = self.profiles[user_id].with_interests(payload.interests)

    def _append(self, user_id: str, at: datetime | None, payload: Payload) -> dict:
        record = self.log.append(user_id, utc(at) if at else self.clock(), payload)
        self._track(user_id, payload)
        return {"seq": record.seq}

    def _profile(self, user_id: str) -> UserProfile:
        try:
            return self.profiles[user_id]
        except KeyError:
            raise HTTPException(404, detail=f"unknown user {user_id!r}") from None

    def require_message(self, message_id: str) -> None:
        if message_id not in self.catalog:
            raise HTTPException(
                422, detail=[{"loc": ["body", "message_id"], "msg": f"unknown message {message_id!r}"}]
            )

    def register(self, body: ProfileIn, *, update: bool = False) -> dict:
        try:
            data = body.model_dump(mode="json")
            profile = UserProfile.from_dict(data)
        except DomainError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        with self._lock:
            exists = profile.user_id in self.profiles
            if exists and not update:
                raise HTTPException(409, detail=f"user {profile.user_id!r} already registered")
            if update and not exists:
                raise HTTPException(404, detail=f"unknown user {profile.user_id!r}")
            return self._append(profile.user_id, None, ProfileUpdate(profile))

    def set_interests(self, user_id: str, body: InterestsIn) -> dict:
        with self._lock:
            self._profile(user_id)
            return self._append(user_id, None, InterestsUpdate(tuple(body.interests)))

    def set_window(self, user_id: str, body: WindowIn) -> dict:
        try:
            window = TimeWindow(body.start, body.end)
        except DomainError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        with self._lock:
            profile = self._profile(user_id)
            return self._append(user_id, None, ProfileUpdate(replace(profile, window=window)))

    def event(self, body: _EventIn, payload: Payload) -> dict:
        with self._lock:
            self._profile(body.user_id)
            return self._append(body.user_id, body.at, payload)

    def plan(self, user_id: str, plan_date: date) -> list[dict]:
        self._profile(user_id)
        plan = self.plans.read(plan_date)
        if plan is None:
            raise HTTPException(404, detail=f"no plan for {plan_date}")
        return [e.to_dict() for e in plan.for_user(user_id)]


def create_app(
    log: EventLog,
    catalog: Catalog,
    plans: PlanStore,
    clock: Callable[[], datetime] = _utcnow,
) -> FastAPI:
    svc = IngestionService(log, catalog, plans, clock)
    app = FastAPI(title="msgtailor ingestion")
    app.state.service = svc

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "events": len(log)}

    @app.post("/users", status_code=201)
    def register(body: ProfileIn) -> dict:
        return svc.register(body)

    @app.put("/users/{user_id}")
    def update_profile(user_id: str, body: ProfileIn) -> dict:
        if body.user_id != user_id:
            raise HTTPException(422, detail=[{"loc": ["body", "user_id"], "msg": "does not match path"}])
        return svc.register(body, update=True)

    @app.put("/users/{user_id}/interests")
    def interests(user_id: str, body: InterestsIn) -> dict:
        return svc.set_interests(user_id, body)

    @app.put("/users/{user_id}/window")
    def window(user_id: str, body: WindowIn) -> dict:
        return svc.set_window(user_id, body)

    @app.post("/events/vote", status_code=201)
    def vote(body: VoteIn) -> dict:
        svc.require_message(body.message_id)
        return svc.event(body, Vote(body.message_id, VoteValue(body.value)))

    @app.post("/events/section-access", status_code=201)
    def section_access(body: SectionAccessIn) -> dict:
        return svc.event(body, SectionAccess(Topic.from_slug(body.topic), body.dwell_seconds))

    @app.post("/events/read", status_code=201)
    def read(body: ReadIn) -> dict:
        svc.require_message(body.message_id)
        return svc.event(body, MessageRead(body.message_id))

    @app.post("/events/activity", status_code=201)
    def activity(body: ActivityIn) -> dict:
        return svc.event(body, ActivitySample(body.day, body.active_minutes))

    @app.get("/users/{user_id}/plan")
    def plan(user_id: str, plan_date: date = Query(alias="date")) -> list[dict]:
        return svc.plan(user_id, plan_date)

    return app
