from __future__ import annotations

from datetime import date, datetime, timedelta, timezone

import pytest

from msgtailor.catalog import Catalog, generate_catalog
from msgtailor.domain import (
    TOPICS,
    EventRecord,
    Message,
    MessageRead,
    ProfileUpdate,
    SectionAccess,
    TimeWindow,
    Topic,
    UserProfile,
    Vote,
    VoteValue,
)

DAY0 = date(2026, 3, 1)


def ts(day_offset: int = 0, minute: int = 600, second: int = 0) -> datetime:
    return datetime(2026, 3, 1, tzinfo=timezone.utc) + timedelta(days=day_offset, minutes=minute, seconds=second)


def profile(user_id: str = "alice", **kw) -> UserProfile:
    base = dict(
        user_id=user_id,
        name=user_id.title(),
        gender="female",
        employment_status="employed",
        age=40,
        quit_date=DAY0,
        fagerstrom=5,
        richmond=5,
        interests=(1, 1, 1, 1, 1),
        window=TimeWindow(0, 1440),
        enrolled_at=DAY0,
    )
    base.update(kw)
    return UserProfile(**base)


class LogBuilder:
    """Hand-rolled logs with dense seqs; ``at`` defaults to day 0, 10:00 + n seconds."""

    def __init__(self):
        self.records: list[EventRecord] = []

    def add(self, user_id: str, payload, at: datetime | None = None) -> "LogBuilder":
        seq = len(self.records) + 1
        self.records.append(EventRecord(seq, user_id, at or ts(0, 600, seq), payload))
        return self

    def register(self, p: UserProfile, at: datetime | None = None) -> "LogBuilder":
        return self.add(p.user_id, ProfileUpdate(p), at or ts(-1, 0, len(self.records)))

    def vote(self, user_id: str, message_id: str, value: str, at=None) -> "LogBuilder":
        return self.add(user_id, Vote(message_id, VoteValue(value)), at)

    def section(self, user_id: str, topic: Topic, dwell: float, at=None) -> "LogBuilder":
        return self.add(user_id, SectionAccess(topic, dwell), at)

    def read(self, user_id: str, message_id: str, at=None) -> "LogBuilder":
        return self.add(user_id, MessageRead(message_id), at)


@pytest.fixture
def builder() -> LogBuilder:
    return LogBuilder()


def small_catalog(per_topic: int = 4) -> Catalog:
    msgs = []
    for t in TOPICS:
        for k in range(per_topic):
            body = "Hi {name}, {delta_minutes} min vs average" if t is Topic.PPAL and k % 2 == 0 else f"{t.slug} {k}"
            msgs.append(Message(f"{t.slug}-{k}", t, body))
    return Catalog(msgs)


@pytest.fixture
def catalog() -> Catalog:
    return small_catalog()


@pytest.fixture(scope="session")
def full_catalog() -> Catalog:
    return generate_catalog(150, seed=0)



# -- acceptance reporting --------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, ok, note = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {name}{f' ({note})' if note else ''}")
