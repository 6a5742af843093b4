"""Shared vocabulary types for the message-tailoring engine.

Everything here is an immutable value. Events are serialised to one JSON
object per line with the fields ``seq``, ``user_id``, ``at``, ``kind`` and
``payload``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum, IntEnum
from typing import Any, Union

N_TOPICS = 5
LIKERT_LEVELS = (0, 1, 2)
MINUTES_PER_DAY = 1440
MIN_AGE, MAX_AGE = 18, 100

_PLACEHOLDER = re.compile(r"\{(\w+)\}")
PPAL_PLACEHOLDERS = frozenset({"name", "delta_minutes"})


class DomainError(ValueError):
    """Base class for validation failures on domain values."""


class MalformedRecord(DomainError):
    """An event record that cannot be decoded or applied."""

    def __init__(self, seq: int | None, reason: str):
        self.seq = seq
        self.reason = reason
        super().__init__(f"record seq={seq}: {reason}")


class Topic(IntEnum):
    GENERAL_MOTIVATION = 0
    DIET_TIPS = 1
    EXERCISE_ACTIVE_LIFE = 2
    PPAL = 3
    SMOKING_CONSEQUENCES = 4

    @property
    def slug(self) -> str:
        return self.name.lower()

    @classmethod
    def from_slug(cls, value: str | int) -> "Topic":
        if isinstance(value, int):
            return cls(value)
        try:
            return cls[value.upper()]
        except KeyError:
            raise DomainError(f"unknown topic {value!r}") from None


TOPICS: tuple[Topic, ...] = tuple(Topic)


class VoteValue(str, Enum):
    LIKE = "like"
    NEUTRAL = "neutral"
    DISLIKE = "dislike"


_VOTE_SCORES = {VoteValue.LIKE: 1.0, VoteValue.NEUTRAL: 0.5, VoteValue.DISLIKE: 0.0}


def vote_value_to_score(value: VoteValue | str) -> float:
    """Map a like/neutral/dislike vote onto [0, 1]."""
    return _VOTE_SCORES[VoteValue(value)]


# -- time helpers ------------------------------------------------------------


def utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def midnight(day: date) -> datetime:
    return datetime.combine(day, time(0, 0), tzinfo=timezone.utc)


def at_minute(day: date, minute: int) -> datetime:
    return midnight(day) + timedelta(minutes=minute)


def minute_of_day(dt: datetime) -> int:
    dt = utc(dt)
    return dt.hour * 60 + dt.minute


def format_ts(dt: datetime) -> str:
    return utc(dt).isoformat().replace("+00:00", "Z")


def parse_ts(value: str) -> datetime:
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        raise DomainError(f"timestamp {value!r} has no UTC offset")
    return utc(dt)


# -- profile -----------------------------------------------------------------


@dataclass(frozen=True)
class TimeWindow:
    """Daily delivery window ``[start, end)`` in minutes of the UTC day."""

    start: int = 0
    end: int = MINUTES_PER_DAY

    def __post_init__(self) -> None:
        if not 0 <= self.start <= MINUTES_PER_DAY - 1:
            raise DomainError(f"window start {self.start} outside [0, 1439]")
        if not 1 <= self.end <= MINUTES_PER_DAY:
            raise DomainError(f"window end {self.end} outside [1, 1440]")
        if self.end <= self.start:
            raise DomainError("window end must be after start")

    @property
    def duration(self) -> int:
        return self.end - self.start

    def contains(self, minute: int) -> bool:
        return self.start <= minute < self.end


def _check_interests(interests: tuple[int, ...]) -> tuple[int, ...]:
    interests = tuple(int(x) for x in interests)
    if len(interests) != N_TOPICS:
        raise DomainError(f"interests must have {N_TOPICS} entries, got {len(interests)}")
    if any(x not in LIKERT_LEVELS for x in interests):
        raise DomainError(f"interest levels must be in {LIKERT_LEVELS}: {interests}")
    return interests


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    name: str
    gender: str
    employment_status: str
    age: int
    quit_date: date
    fagerstrom: int
    richmond: int
    interests: tuple[int, ...]
    window: TimeWindow = field(default_factory=TimeWindow)
    enrolled_at: date | None = None
    dropped_out_at: date | None = None

    def __post_init__(self) -> None:
        if not self.user_id:
            raise DomainError("user_id must be non-empty")
        if not MIN_AGE <= self.age <= MAX_AGE:
            raise DomainError(f"age {self.age} outside [{MIN_AGE}, {MAX_AGE}]")
        for label in ("fagerstrom", "richmond"):
            if not 0 <= getattr(self, label) <= 10:
                raise DomainError(f"{label} {getattr(self, label)} outside [0, 10]")
        object.__setattr__(self, "interests", _check_interests(self.interests))
        if self.enrolled_at is None:
            object.__setattr__(self, "enrolled_at", self.quit_date)

    def with_interests(self, interests: tuple[int, ...]) -> "UserProfile":
        return replace(self, interests=tuple(interests))

    def to_dict(self) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "name": self.name,
            "gender": self.gender,
            "employment_status": self.employment_status,
            "age": self.age,
            "quit_date": self.quit_date.isoformat(),
            "fagerstrom": self.fagerstrom,
            "richmond": self.richmond,
            "interests": list(self.interests),
            "window": {"start": self.window.start, "end": self.window.end},
            "enrolled_at": self.enrolled_at.isoformat() if self.enrolled_at else None,
            "dropped_out_at": self.dropped_out_at.isoformat() if self.dropped_out_at else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "UserProfile":
        window = data.get("window") or {}
        enrolled = data.get("enrolled_at")
        dropped = data.get("dropped_out_at")
        return cls(
            user_id=str(data["user_id"]),
            name=str(data.get("name", "")),
            gender=str(data["gender"]),
            employment_status=str(data["employment_status"]),
            age=int(data["age"]),
            quit_date=date.fromisoformat(data["quit_date"]),
            fagerstrom=int(data["fagerstrom"]),
            richmond=int(data["richmond"]),
            interests=tuple(data["interests"]),
            window=TimeWindow(int(window.get("start", 0)), int(window.get("end", MINUTES_PER_DAY))),
            enrolled_at=date.fromisoformat(enrolled) if enrolled else None,
            dropped_out_at=date.fromisoformat(dropped) if dropped else None,
        )


# -- messages ----------------------------------------------------------------


@dataclass(frozen=True)
class Message:
    id: str
    topic: Topic
    body: str

    def __post_init__(self) -> None:
        names = set(_PLACEHOLDER.findall(self.body))
        if self.topic is Topic.PPAL:
            unknown = names - PPAL_PLACEHOLDERS
            if unknown:
                raise DomainError(f"message {self.id}: unknown placeholders {sorted(unknown)}")
        elif names:
            raise DomainError(f"message {self.id}: only PPAL messages may carry placeholders")

    @property
    def needs_activity(self) -> bool:
        return "{delta_minutes}" in self.body


# -- event payloads ----------------------------------------------------------


@dataclass(frozen=True)
class Vote:
    message_id: str
    value: VoteValue
    kind = "vote"


@dataclass(frozen=True)
class SectionAccess:
    topic: Topic
    dwell_seconds: float
    kind = "section_access"


@dataclass(frozen=True)
class MessageRead:
    message_id: str
    kind = "message_read"


@dataclass(frozen=True)
class ActivitySample:
    day: date
    active_minutes: float
    kind = "activity_sample"


@dataclass(frozen=True)
class ProfileUpdate:
    profile: UserProfile
    kind = "profile_update"


@dataclass(frozen=True)
class InterestsUpdate:
    interests: tuple[int, ...]
    kind = "interests_update"


@dataclass(frozen=True)
class Delivery:
    """A planned message handed to the sender; its ``at`` is the send instant."""

    message_id: str
    topic: Topic
    plan_date: date
    slot_index: int
    kind = "delivery"


Payload = Union[Vote, SectionAccess, MessageRead, ActivitySample, ProfileUpdate, InterestsUpdate, Delivery]


def payload_to_dict(payload: Payload) -> dict[str, Any]:
    if isinstance(payload, Vote):
        return {"message_id": payload.message_id, "value": payload.value.value}
    if isinstance(payload, SectionAccess):
        return {"topic": payload.topic.slug, "dwell_seconds": payload.dwell_seconds}
    if isinstance(payload, MessageRead):
        return {"message_id": payload.message_id}
    if isinstance(payload, ActivitySample):
        return {"day": payload.day.isoformat(), "active_minutes": payload.active_minutes}
    if isinstance(payload, ProfileUpdate):
        return payload.profile.to_dict()
    if isinstance(payload, InterestsUpdate):
        return {"interests": list(payload.interests)}
    if isinstance(payload, Delivery):
        return {
            "message_id": payload.message_id,
            "topic": payload.topic.slug,
            "plan_date": payload.plan_date.isoformat(),
            "slot_index": payload.slot_index,
        }
    raise TypeError(f"not an event payload: {payload!r}")


def payload_from_dict(kind: str, data: dict[str, Any]) -> Payload:
    if kind == "vote":
        return Vote(str(data["message_id"]), VoteValue(data["value"]))
    if kind == "section_access":
        dwell = float(data["dwell_seconds"])
        if dwell < 0:
            raise DomainError("dwell_seconds must be >= 0")
        return SectionAccess(Topic.from_slug(data["topic"]), dwell)
    if kind == "message_read":
        return MessageRead(str(data["message_id"]))
    if kind == "activity_sample":
        minutes = float(data["active_minutes"])
        if minutes < 0:
            raise DomainError("active_minutes must be >= 0")
        return ActivitySample(date.fromisoformat(data["day"]), minutes)
    if kind == "profile_update":
        return ProfileUpdate(UserProfile.from_dict(data))
    if kind == "interests_update":
        return InterestsUpdate(_check_interests(tuple(data["interests"])))
    if kind == "delivery":
        return Delivery(
            str(data["message_id"]),
            Topic.from_slug(data["topic"]),
            date.fromisoformat(data["plan_date"]),
            int(data["slot_index"]),
        )
    raise DomainError(f"unknown event kind {kind!r}")


@dataclass(frozen=True)
class EventRecord:
    seq: int
    user_id: str
    at: datetime
    payload: Payload

    @property
    def kind(self) -> str:
        return self.payload.kind

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "user_id": self.user_id,
            "at": format_ts(self.at),
            "kind": self.kind,
            "payload": payload_to_dict(self.payload),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EventRecord":
        seq = data.get("seq") if isinstance(data, dict) else None
        try:
            if set(data) != {"seq", "user_id", "at", "kind", "payload"}:
                raise DomainError(f"unexpected field set {sorted(data)}")
            return cls(
                seq=int(data["seq"]),
                user_id=str(data["user_id"]),
                at=parse_ts(data["at"]),
                payload=payload_from_dict(data["kind"], data["payload"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(seq, str(exc)) from exc


@dataclass(frozen=True)
class DeliveryRecord:
    user_id: str
    message_id: str
    topic: Topic
    plan_date: date
    sent_at: datetime
    slot_index: int
    read_at: datetime | None = None

    def __post_init__(self) -> None:
        if self.read_at is not None and self.read_at < self.sent_at:
            raise DomainError("read_at precedes sent_at")
