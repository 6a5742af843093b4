"""Nightly planning job: snapshot -> topic -> message -> slot -> send minute."""

from __future__ import annotations

import hashlib
import json
import logging
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta

from .catalog import Catalog, pick_message
from .config import EngineConfig
from .domain import (
    TOPICS,
    Delivery,
    DeliveryRecord,
    DomainError,
    EventRecord,
    MessageRead,
    Topic,
    at_minute,
    format_ts,
    parse_ts,
)
from .eventlog import EventLog
from .hybrid import HybridRecommender
from .ppal import MissingActivity, activity_stats, render_ppal_message
from .selection import CandidateDistribution, roulette_select
from .snapshot import CohortSnapshot, build_snapshot
from .timing import choose_send_minute, slot_partition, slot_scores

log = logging.getLogger(__name__)


class PlanExists(DomainError):
    """The date already has a committed plan and ``force`` was not given."""


@dataclass(frozen=True)
class PlanEntry:
    user_id: str
    message_id: str
    topic: Topic
    send_at: datetime
    slot_index: int
    plan_date: date
    body: str
    ppal_fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "message_id": self.message_id,
            "topic": self.topic.slug,
            "send_at": format_ts(self.send_at),
            "slot_index": self.slot_index,
            "plan_date": self.plan_date.isoformat(),
            "body": self.body,
            "ppal_fallback": self.ppal_fallback,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlanEntry":
        return cls(
            user_id=data["user_id"],
            message_id=data["message_id"],
            topic=Topic.from_slug(data["topic"]),
            send_at=parse_ts(data["send_at"]),
            slot_index=int(data["slot_index"]),
            plan_date=date.fromisoformat(data["plan_date"]),
            body=data.get("body", ""),
            ppal_fallback=bool(data.get("ppal_fallback", False)),
        )


@dataclass(frozen=True)
class UserPlanDetail:
    """What the selectors saw for one user; kept for evaluation, not emitted."""

    seed: int
    topic_scores: tuple[float, ...]
    slot_bounds: tuple[tuple[int, int], ...]
    slot_scores: tuple[float, ...]


@dataclass(frozen=True)
class NightlyPlan:
    plan_date: date
    entries: tuple[PlanEntry, ...]
    details: dict[str, UserPlanDetail] = field(default_factory=dict)

    @property
    def seeds(self) -> dict[str, int]:
        return {u: d.seed for u, d in self.details.items()}

    def for_user(self, user_id: str) -> list[PlanEntry]:
        return [e for e in self.entries if e.user_id == user_id]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in self.entries)

    @classmethod
    def from_jsonl(cls, text: str, plan_date: date) -> "NightlyPlan":
        entries = tuple(PlanEntry.from_dict(json.loads(line)) for line in text.splitlines() if line.strip())
        return cls(plan_date, entries)


def user_seed(master_seed: int, user_id: str, plan_date: date) -> int:
    digest = hashlib.sha256(f"{master_seed}|{user_id}|{plan_date.isoformat()}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def eligible_users(snapshot: CohortSnapshot, plan_date: date) -> list[str]:
    """Active users whose quit date has arrived (the quit day itself included)."""
    out = []
    for user_id in snapshot.active:
        profile = snapshot.profiles[user_id]
        if profile.quit_date > plan_date:
            continue
        if profile.dropped_out_at is not None and profile.dropped_out_at <= plan_date:
            continue
        out.append(user_id)
    return sorted(out)


def planned_dates(records: Iterable[EventRecord]) -> set[date]:
    return {r.payload.plan_date for r in records if isinstance(r.payload, Delivery)}


def _plan_user(
    user_id: str,
    snapshot: CohortSnapshot,
    recommender: HybridRecommender,
    catalog: Catalog,
    plan_date: date,
    config: EngineConfig,
) -> tuple[list[PlanEntry], UserPlanDetail]:
    seed = user_seed(config.master_seed, user_id, plan_date)
    rng = random.Random(seed)
    profile = snapshot.profiles[user_id]
    history = snapshot.deliveries.get(user_id, ())

    topics = recommender.scores(user_id)
    model = slot_partition(profile.window, config.max_slots)
    slots = slot_scores(history, model, config.tau_minutes, config.slot_prior)
    topic_dist = CandidateDistribution.of(TOPICS, topics.scores)
    slot_dist = CandidateDistribution.of(range(model.slot_count), slots.scores)

    stats = None
    samples = snapshot.activity.get(user_id, {})
    try:
        stats = activity_stats(user_id, samples, plan_date - timedelta(days=1), config.activity_window_days)
    except MissingActivity:
        pass

    delivered = {d.message_id for d in history}
    entries = []
    for _ in range(config.messages_per_day):
        topic = roulette_select(topic_dist, rng)
        fallback = False
        if topic is Topic.PPAL and stats is None:
            message = pick_message(catalog.pools[topic], delivered, rng, accept=lambda m: not m.needs_activity)
            fallback = True
        else:
            message = pick_message(catalog.pools[topic], delivered, rng)
        delivered.add(message.id)
        if topic is Topic.PPAL:
            try:
                body = render_ppal_message(message, profile, stats)
            except MissingActivity:
                body = message.body.replace("{delta_minutes}", "").format_map({"name": profile.name})
        else:
            body = message.body
        slot = roulette_select(slot_dist, rng)
        minute = choose_send_minute(model.boundaries[slot], rng)
        entries.append(
            PlanEntry(user_id, message.id, topic, at_minute(plan_date, minute), slot, plan_date, body, fallback)
        )
    entries.sort(key=lambda e: (e.send_at, e.message_id))
    return entries, UserPlanDetail(seed, topics.scores, model.boundaries, slots.scores)


def run_nightly(
    records: Sequence[EventRecord],
    plan_date: date,
    catalog: Catalog,
    config: EngineConfig | None = None,
    *,
    force: bool = False,
) -> NightlyPlan:
    """Plan ``plan_date`` for every eligible user.

    Pure in ``(records, plan_date, catalog, config)``: each user draws from
    its own RNG seeded by ``(master_seed, user_id, plan_date)``, so one user's
    data never shifts another user's draws.
    """
    config = config or EngineConfig()
    catalog.require_complete()
    if not force and plan_date in planned_dates(records):
        raise PlanExists(f"{plan_date} already planned; use force to recompute")
    snapshot = build_snapshot(records, plan_date, catalog, config)
    recommender = HybridRecommender(snapshot)
    entries: list[PlanEntry] = []
    details: dict[str, UserPlanDetail] = {}
    for user_id in eligible_users(snapshot, plan_date):
        user_entries, details[user_id] = _plan_user(user_id, snapshot, recommender, catalog, plan_date, config)
        entries.extend(user_entries)
    log.info("planned %d messages for %d users on %s", len(entries), len(details), plan_date)
    return NightlyPlan(plan_date, tuple(entries), details)


def commit_plan(plan: NightlyPlan, log_: EventLog) -> list[EventRecord]:
    """Append a delivery event per entry, skipping entries already logged."""
    seen = {
        (r.user_id, r.payload.message_id, r.at)
        for r in log_.records()
        if isinstance(r.payload, Delivery) and r.payload.plan_date == plan.plan_date
    }
    appended = []
    for e in plan.entries:
        if (e.user_id, e.message_id, e.send_at) in seen:
            continue
        appended.append(log_.append(e.user_id, e.send_at, Delivery(e.message_id, e.topic, e.plan_date, e.slot_index)))
    return appended


@dataclass(frozen=True)
class ReadReceipt:
    user_id: str
    message_id: str
    read_at: datetime


@dataclass
class OutcomeReport:
    appended: list[EventRecord] = field(default_factory=list)
    deliveries: list[DeliveryRecord] = field(default_factory=list)
    rejected: list[tuple[ReadReceipt, str]] = field(default_factory=list)


def record_delivery_outcomes(plan: NightlyPlan, receipts: Iterable[ReadReceipt], log_: EventLog) -> OutcomeReport:
    """Turn read receipts for ``plan`` into MessageRead events.

    Bad receipts are rejected one by one and never stop the batch. The first
    read of a delivery wins.
    """
    by_key = {(e.user_id, e.message_id): e for e in plan.entries}
    already_read = {
        (r.user_id, r.payload.message_id)
        for r in log_.records()
        if isinstance(r.payload, MessageRead)
        and (r.user_id, r.payload.message_id) in by_key
        and r.at >= by_key[r.user_id, r.payload.message_id].send_at
    }
    report = OutcomeReport()
    for receipt in receipts:
        entry = by_key.get((receipt.user_id, receipt.message_id))
        if entry is None:
            report.rejected.append((receipt, "unknown delivery"))
            continue
        if receipt.read_at < entry.send_at:
            report.rejected.append((receipt, "read before send"))
            continue
        if (receipt.user_id, receipt.message_id) in already_read:
            report.rejected.append((receipt, "duplicate receipt"))
            continue
        already_read.add((receipt.user_id, receipt.message_id))
        report.appended.append(log_.append(receipt.user_id, receipt.read_at, MessageRead(receipt.message_id)))
        report.deliveries.append(
            DeliveryRecord(entry.user_id, entry.message_id, entry.topic, entry.plan_date, entry.send_at,
                           entry.slot_index, receipt.read_at)
        )
    return report
