"""Random cohort logs for property checks and scale runs."""

from __future__ import annotations

import random
from dataclasses import replace
from datetime import date, datetime, timedelta

from ..catalog import Catalog
from ..domain import (
    TOPICS,
    ActivitySample,
    Delivery,
    EventRecord,
    InterestsUpdate,
    MessageRead,
    ProfileUpdate,
    SectionAccess,
    TimeWindow,
    UserProfile,
    Vote,
    VoteValue,
    midnight,
)

GENDERS = ("female", "male", "other")
EMPLOYMENT = ("employed", "unemployed", "retired", "student")


def random_profile(rng: random.Random, user_id: str, start: date) -> UserProfile:
    lo = rng.randrange(0, 1439)
    hi = rng.choice([lo + 1, rng.randrange(lo + 1, 1441), 1440])
    quit_date = start + timedelta(days=rng.randrange(-60, 10))
    return UserProfile(
        user_id=user_id,
        name=f"User {user_id}",
        gender=rng.choice(GENDERS),
        employment_status=rng.choice(EMPLOYMENT),
        age=rng.randint(18, 100),
        quit_date=quit_date,
        fagerstrom=rng.randint(0, 10),
        richmond=rng.randint(0, 10),
        interests=tuple(rng.choice((0, 1, 2)) for _ in TOPICS),
        window=TimeWindow(lo, hi),
        enrolled_at=start,
    )


def random_cohort_log(
    rng: random.Random,
    catalog: Catalog,
    n_users: int,
    n_events: int,
    start: date = date(2026, 1, 1),
    days: int = 30,
    message_share: float = 0.05,
) -> tuple[list[EventRecord], date]:
    """Registrations on ``start`` followed by ``n_events`` random events.

    Votes and reads draw from a small slice of the catalog (``message_share``)
    so that users co-rate messages often enough for Pearson to be exercised.
    Returns the records and the first date after the generated history.
    """
    messages = sorted(catalog.messages)
    hot = rng.sample(messages, max(2, int(len(messages) * message_share)))
    records: list[EventRecord] = []
    users = [f"u{k:03d}" for k in range(n_users)]
    profiles = {}
    t0 = midnight(start) + timedelta(minutes=1)
    for user_id in users:
        profiles[user_id] = random_profile(rng, user_id, start)
        records.append(EventRecord(len(records) + 1, user_id, t0, ProfileUpdate(profiles[user_id])))

    span = days * 86400
    stamps = sorted(rng.randrange(3600, span) for _ in range(n_events))
    for offset in stamps:
        if not users:
            break
        user_id = rng.choice(users)
        at: datetime = midnight(start) + timedelta(seconds=offset)
        roll = rng.random()
        if roll < 0.30:
            payload = Vote(rng.choice(hot), rng.choice(list(VoteValue)))
        elif roll < 0.55:
            payload = SectionAccess(rng.choice(TOPICS), round(rng.uniform(0, 12), 1))
        elif roll < 0.75:
            payload = MessageRead(rng.choice(hot))
        elif roll < 0.85:
            message_id = rng.choice(hot)
            payload = Delivery(message_id, catalog.topic_of(message_id), at.date(), 0)
        elif roll < 0.93:
            payload = ActivitySample(at.date(), float(rng.randint(0, 180)))
        elif roll < 0.997:
            payload = InterestsUpdate(tuple(rng.choice((0, 1, 2)) for _ in TOPICS))
        else:
            profiles[user_id] = replace(profiles[user_id], dropped_out_at=at.date())
            payload = ProfileUpdate(profiles[user_id])
        records.append(EventRecord(len(records) + 1, user_id, at, payload))
    return records, start + timedelta(days=days)
