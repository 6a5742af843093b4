"""Deterministic nightly cohort snapshot rebuilt from an event-log prefix."""

from __future__ import annotations

import hashlib
import json
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from datetime import date, datetime

from .catalog import Catalog
from .config import EngineConfig
from .domain import (
    N_TOPICS,
    ActivitySample,
    Delivery,
    DeliveryRecord,
    EventRecord,
    InterestsUpdate,
    MalformedRecord,
    MessageRead,
    ProfileUpdate,
    SectionAccess,
    Topic,
    UserProfile,
    Vote,
    VoteValue,
    format_ts,
    midnight,
    vote_value_to_score,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class UserStats:
    n_neighbors: int
    n_ratings: int
    explicit: tuple[float | None, ...]
    implicit: tuple[float, ...]
    ratings: Mapping[str, float]
    section_counts: tuple[int, ...]
    read_counts: tuple[int, ...]


@dataclass(frozen=True)
class CohortSnapshot:
    """Read-only view of the cohort at the start of ``as_of`` (UTC midnight).

    ``profiles`` holds every registered user, including dropped-out ones whose
    history stays available; ``active`` lists the users that count as the
    cohort (and as each other's neighbours).
    """

    as_of: date
    profiles: Mapping[str, UserProfile]
    active: tuple[str, ...]
    stats: Mapping[str, UserStats]
    votes: Mapping[str, Mapping[str, VoteValue]]
    message_topics: Mapping[str, Topic]
    deliveries: Mapping[str, tuple[DeliveryRecord, ...]]
    activity: Mapping[str, Mapping[date, float]]

    def is_active(self, user_id: str) -> bool:
        return user_id in self.active

    def to_canonical(self) -> dict:
        return {
            "as_of": self.as_of.isoformat(),
            "active": list(self.active),
            "profiles": {u: p.to_dict() for u, p in sorted(self.profiles.items())},
            "stats": {
                u: {
                    "n_neighbors": s.n_neighbors,
                    "n_ratings": s.n_ratings,
                    "explicit": list(s.explicit),
                    "implicit": list(s.implicit),
                    "ratings": dict(sorted(s.ratings.items())),
                    "section_counts": list(s.section_counts),
                    "read_counts": list(s.read_counts),
                }
                for u, s in sorted(self.stats.items())
            },
            "votes": {u: {m: v.value for m, v in sorted(vs.items())} for u, vs in sorted(self.votes.items())},
            "deliveries": {
                u: [
                    [d.message_id, d.topic.slug, d.plan_date.isoformat(), format_ts(d.sent_at),
                     format_ts(d.read_at) if d.read_at else None, d.slot_index]
                    for d in ds
                ]
                for u, ds in sorted(self.deliveries.items())
            },
            "activity": {
                u: {d.isoformat(): m for d, m in sorted(days.items())} for u, days in sorted(self.activity.items())
            },
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _explicit_rates(votes: Mapping[str, VoteValue], topic_of: Mapping[str, Topic]) -> tuple[float | None, ...]:
    sums = [0.0] * N_TOPICS
    counts = [0] * N_TOPICS
    for message_id, value in votes.items():
        t = topic_of[message_id]
        sums[t] += vote_value_to_score(value)
        counts[t] += 1
    return tuple(sums[t] / counts[t] if counts[t] else None for t in range(N_TOPICS))


def _share(counts: tuple[int, ...], t: int) -> float:
    total = sum(counts)
    return counts[t] / total if total else 1.0 / N_TOPICS


def _implicit_rates(sections: tuple[int, ...], reads: tuple[int, ...]) -> tuple[float, ...]:
    return tuple((_share(sections, t) + _share(reads, t)) / 2 for t in range(N_TOPICS))


def build_snapshot(
    records: Iterable[EventRecord],
    as_of: date,
    catalog: Catalog,
    config: EngineConfig | None = None,
) -> CohortSnapshot:
    """Replay ``records`` strictly before midnight of ``as_of``.

    Raises :class:`MalformedRecord` naming the offending seq when the log is
    out of order, refers to an unregistered user or to an unknown message.
    """
    config = config or EngineConfig()
    cutoff: datetime = midnight(as_of)

    profiles: dict[str, UserProfile] = {}
    votes: dict[str, dict[str, VoteValue]] = defaultdict(dict)
    sections: dict[str, list[int]] = defaultdict(lambda: [0] * N_TOPICS)
    reads: dict[str, list[int]] = defaultdict(lambda: [0] * N_TOPICS)
    read_times: dict[tuple[str, str], list[datetime]] = defaultdict(list)
    sent: dict[str, list[tuple[Delivery, datetime]]] = defaultdict(list)
    activity: dict[str, dict[date, float]] = defaultdict(dict)
    message_topics: dict[str, Topic] = {}

    last_seq = 0
    for rec in records:
        if rec.seq <= last_seq:
            raise MalformedRecord(rec.seq, f"seq not increasing (previous {last_seq})")
        last_seq = rec.seq
        if rec.at >= cutoff:
            continue
        p = rec.payload
        if isinstance(p, ProfileUpdate):
            if p.profile.user_id != rec.user_id:
                raise MalformedRecord(rec.seq, "profile user_id does not match record user_id")
            profiles[rec.user_id] = p.profile
            continue
        if rec.user_id not in profiles:
            raise MalformedRecord(rec.seq, f"event for unregistered user {rec.user_id!r}")
        if isinstance(p, (Vote, MessageRead, Delivery)) and p.message_id not in catalog:
            raise MalformedRecord(rec.seq, f"unknown message {p.message_id!r}")
        if isinstance(p, Vote):
            votes[rec.user_id][p.message_id] = p.value
            message_topics[p.message_id] = catalog.topic_of(p.message_id)
        elif isinstance(p, SectionAccess):
            if p.dwell_seconds >= config.min_dwell_seconds:
                sections[rec.user_id][p.topic] += 1
        elif isinstance(p, MessageRead):
            topic = catalog.topic_of(p.message_id)
            message_topics[p.message_id] = topic
            reads[rec.user_id][topic] += 1
            read_times[rec.user_id, p.message_id].append(rec.at)
        elif isinstance(p, ActivitySample):
            activity[rec.user_id][p.day] = p.active_minutes
        elif isinstance(p, InterestsUpdate):
            profiles[rec.user_id] = profiles[rec.user_id].with_interests(p.interests)
        elif isinstance(p, Delivery):
            sent[rec.user_id].append((p, rec.at))
        else:  # pragma: no cover - payload union is closed
            raise MalformedRecord(rec.seq, f"unhandled kind {rec.kind}")

    active: list[str] = []
    for user_id, profile in profiles.items():
        if profile.enrolled_at > as_of:
            continue
        if profile.dropped_out_at is not None and profile.dropped_out_at <= as_of:
            continue
        if len(active) >= config.cohort_cap:
            log.warning("cohort cap %d reached; %s left out of the cohort", config.cohort_cap, user_id)
            continue
        active.append(user_id)
    active.sort()
    n_active = len(active)
    active_set = set(active)

    stats: dict[str, UserStats] = {}
    deliveries: dict[str, tuple[DeliveryRecord, ...]] = {}
    for user_id in profiles:
        user_votes = votes.get(user_id, {})
        sec = tuple(sections[user_id]) if user_id in sections else (0,) * N_TOPICS
        rd = tuple(reads[user_id]) if user_id in reads else (0,) * N_TOPICS
        stats[user_id] = UserStats(
            n_neighbors=n_active - 1 if user_id in active_set else n_active,
            n_ratings=len(user_votes),
            explicit=_explicit_rates(user_votes, message_topics),
            implicit=_implicit_rates(sec, rd),
            ratings={m: vote_value_to_score(v) for m, v in user_votes.items()},
            section_counts=sec,
            read_counts=rd,
        )
        history = []
        for d, sent_at in sent.get(user_id, ()):
            later = [t for t in read_times.get((user_id, d.message_id), ()) if t >= sent_at]
            history.append(
                DeliveryRecord(user_id, d.message_id, d.topic, d.plan_date, sent_at, d.slot_index,
                               min(later) if later else None)
            )
        deliveries[user_id] = tuple(history)

    return CohortSnapshot(
        as_of=as_of,
        profiles=dict(profiles),
        active=tuple(active),
        stats=stats,
        votes={u: dict(v) for u, v in votes.items()},
        message_topics=dict(message_topics),
        deliveries=deliveries,
        activity={u: dict(a) for u, a in activity.items()},
    )

