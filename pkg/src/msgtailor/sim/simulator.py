"""Synthetic-cohort evaluation of the nightly pipeline.

Personas carry a latent topic preference and receptive hours. Each simulated
day the real nightly job plans messages, the personas read (or ignore) and
vote on them, browse app sections, and the resulting events feed the next
night. Because the latent preference is known, every delivered topic can be
scored as a correct prediction (top latent topic, voted Like) or a false
positive (voted Dislike).
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Any

from ..catalog import generate_catalog
from ..config import EngineConfig
from ..domain import (
    N_TOPICS,
    TOPICS,
    DomainError,
    ProfileUpdate,
    SectionAccess,
    TimeWindow,
    Topic,
    UserProfile,
    Vote,
    VoteValue,
    midnight,
    minute_of_day,
)
from ..eventlog import EventLog
from ..pipeline import ReadReceipt, commit_plan, record_delivery_outcomes, run_nightly

DEFAULT_START = date(2026, 1, 5)
CSV_HEADER = ("day", "date", "metric", "value")
METRICS = (
    "deliveries",
    "correct_rate",
    "false_positive_rate",
    "converged_fraction",
    "mean_slot_concentration",
)


class ScenarioError(ValueError):
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True)
class Persona:
    persona_id: str
    preferences: tuple[float, ...]
    interests: tuple[int, ...] = (1, 1, 1, 1, 1)
    window: TimeWindow = TimeWindow(8 * 60, 20 * 60)
    receptive: tuple[tuple[int, int], ...] = ((0, 1440),)
    read_prob_receptive: float = 0.9
    read_prob_other: float = 0.2
    receptive_delay_minutes: float = 2.0
    other_delay_minutes: float = 180.0
    vote_honesty: float = 1.0
    dwell_mean_seconds: float = 10.0
    section_visits_per_day: float = 1.0
    signup_day: int = 0
    dropout_day: int | None = None
    gender: str = "female"
    employment_status: str = "employed"
    age: int = 45
    fagerstrom: int = 5
    richmond: int = 7

    def __post_init__(self) -> None:
        if len(self.preferences) != N_TOPICS or any(p < 0 for p in self.preferences):
            raise DomainError(f"{self.persona_id}: preferences must be {N_TOPICS} non-negative weights")
        if not math.isclose(sum(self.preferences), 1.0, abs_tol=1e-9):
            raise DomainError(f"{self.persona_id}: preferences must sum to 1")
        for name in ("read_prob_receptive", "read_prob_other", "vote_honesty"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise DomainError(f"{self.persona_id}: {name} must lie in [0, 1]")

    @property
    def dominant(self) -> Topic:
        return Topic(max(range(N_TOPICS), key=lambda t: (self.preferences[t], -t)))

    def is_receptive(self, minute: int) -> bool:
        return any(lo <= minute < hi for lo, hi in self.receptive)

    def honest_vote(self, topic: Topic) -> VoteValue:
        affinity = self.preferences[topic] / max(self.preferences)
        if affinity >= 2 / 3:
            return VoteValue.LIKE
        if affinity >= 1 / 3:
            return VoteValue.NEUTRAL
        return VoteValue.DISLIKE

    def profile(self, day: date) -> UserProfile:
        return UserProfile(
            user_id=self.persona_id,
            name=self.persona_id.title(),
            gender=self.gender,
            employment_status=self.employment_status,
            age=self.age,
            quit_date=day,
            fagerstrom=self.fagerstrom,
            richmond=self.richmond,
            interests=self.interests,
            window=self.window,
            enrolled_at=day,
        )


@dataclass(frozen=True)
class Scenario:
    personas: tuple[Persona, ...]
    days: int = 60
    seed: int = 0
    cohort_cap: int = 120
    messages_per_day: int = 1
    start_date: date = DEFAULT_START
    pool_size: int = 150


@dataclass
class SimReport:
    seed: int
    start_date: date
    days: int
    daily: list[dict[str, float]] = field(default_factory=list)
    delivered_topics: dict[str, list[list[Topic]]] = field(default_factory=dict)
    topic_probabilities: dict[str, list[tuple[float, ...] | None]] = field(default_factory=dict)
    slot_scores: dict[str, list[tuple[float, ...] | None]] = field(default_factory=dict)
    convergence_day: dict[str, int | None] = field(default_factory=dict)

    def slot_concentration(self, persona_id: str) -> list[float | None]:
        out = []
        for scores in self.slot_scores[persona_id]:
            out.append(None if scores is None else max(scores) / sum(scores))
        return out

    def rates(self, metric: str) -> list[float]:
        return [row[metric] for row in self.daily]


# -- scenario files ------------------------------------------------------------

_PERSONA_KEYS = {
    "id", "count", "preferences", "interests", "window", "receptive", "read_prob_receptive",
    "read_prob_other", "receptive_delay_minutes", "other_delay_minutes", "vote_honesty",
    "dwell_mean_seconds", "section_visits_per_day", "signup_day", "dropout_day", "gender",
    "employment_status", "age", "fagerstrom", "richmond",
}


def _persona(data: Any, where: str) -> list[Persona]:
    if not isinstance(data, dict):
        raise ScenarioError(where, "persona must be an object")
    unknown = set(data) - _PERSONA_KEYS
    if unknown:
        raise ScenarioError(where, f"unknown keys {sorted(unknown)}")
    if "id" not in data or "preferences" not in data:
        raise ScenarioError(where, "persona needs 'id' and 'preferences'")
    kwargs = {k: v for k, v in data.items() if k not in {"id", "count", "window", "receptive"}}
    try:
        kwargs["preferences"] = tuple(float(p) for p in kwargs["preferences"])
        if "interests" in kwargs:
            kwargs["interests"] = tuple(int(x) for x in kwargs["interests"])
        if "window" in data:
            kwargs["window"] = TimeWindow(int(data["window"]["start"]), int(data["window"]["end"]))
        if "receptive" in data:
            kwargs["receptive"] = tuple((int(lo), int(hi)) for lo, hi in data["receptive"])
        count = int(data.get("count", 1))
        if count == 1:
            return [Persona(str(data["id"]), **kwargs)]
        return [Persona(f"{data['id']}-{k:03d}", **kwargs) for k in range(count)]
    except (DomainError, TypeError, ValueError, KeyError) as exc:
        raise ScenarioError(where, str(exc)) from exc


def scenario_from_dict(data: Any, source: str = "<scenario>") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(source, "top level must be an object")
    unknown = set(data) - {"personas", "cohort_cap", "messages_per_day", "days", "seed", "start_date", "pool_size"}
    if unknown:
        raise ScenarioError(source, f"unknown keys {sorted(unknown)}")
    raw = data.get("personas")
    if not isinstance(raw, list):
        raise ScenarioError(f"{source}#/personas", "must be a list")
    personas: list[Persona] = []
    for k, item in enumerate(raw):
        personas.extend(_persona(item, f"{source}#/personas/{k}"))
    ids = [p.persona_id for p in personas]
    if len(set(ids)) != len(ids):
        raise ScenarioError(f"{source}#/personas", "duplicate persona ids")
    try:
        return Scenario(
            personas=tuple(personas),
            days=int(data.get("days", 60)),
            seed=int(data.get("seed", 0)),
            cohort_cap=int(data.get("cohort_cap", 120)),
            messages_per_day=int(data.get("messages_per_day", 1)),
            start_date=date.fromisoformat(data.get("start_date", DEFAULT_START.isoformat())),
            pool_size=int(data.get("pool_size", 150)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(source, str(exc)) from exc


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(str(path), exc.strerror or "unreadable") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(str(path), f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    return scenario_from_dict(data, str(path))


# -- simulation ----------------------------------------------------------------


def _visits(rng: random.Random, rate: float) -> int:
    whole = int(rate)
    return whole + (1 if rng.random() < rate - whole else 0)


def _delay(rng: random.Random, mean_minutes: float) -> timedelta:
    if mean_minutes <= 0:
        return timedelta(0)
    return timedelta(minutes=rng.expovariate(1.0 / mean_minutes))


def _argmax(probs: tuple[float, ...]) -> int:
    return max(range(N_TOPICS), key=lambda t: (probs[t], -t))


def _convergence_day(probs: list[tuple[float, ...] | None], dominant: Topic) -> int | None:
    day = None
    for d, p in enumerate(probs):
        if p is None:
            continue
        hit = _argmax(p) == dominant
        if hit and day is None:
            day = d
        elif not hit:
            day = None
    return day


def simulate(scenario: Scenario, days: int | None = None, seed: int | None = None) -> SimReport:
    days = scenario.days if days is None else days
    seed = scenario.seed if seed is None else seed
    if days < 1:
        raise ValueError("days must be >= 1")
    report = SimReport(seed=seed, start_date=scenario.start_date, days=days)
    if not scenario.personas:
        return report

    config = EngineConfig(
        master_seed=seed,
        cohort_cap=scenario.cohort_cap,
        messages_per_day=scenario.messages_per_day,
        pool_size=scenario.pool_size,
    )
    catalog = generate_catalog(scenario.pool_size, seed=0)
    log = EventLog(None)
    rng = random.Random(seed)
    personas = {p.persona_id: p for p in scenario.personas}
    for pid in personas:
        report.delivered_topics[pid] = []
        report.topic_probabilities[pid] = []
        report.slot_scores[pid] = []

    for d in range(days):
        plan_date = scenario.start_date + timedelta(days=d)
        eve = midnight(plan_date) - timedelta(hours=1)
        for p in scenario.personas:
            if p.signup_day == d:
                log.append(p.persona_id, eve, ProfileUpdate(p.profile(plan_date)))
            elif p.dropout_day == d and p.signup_day < d:
                dropped = p.profile(scenario.start_date + timedelta(days=p.signup_day))
                log.append(p.persona_id, eve, ProfileUpdate(replace(dropped, dropped_out_at=plan_date)))

        plan = run_nightly(log.records(), plan_date, catalog, config)
        commit_plan(plan, log)

        receipts: list[ReadReceipt] = []
        votes: list[tuple[str, datetime, Vote]] = []
        n_delivered = n_correct = n_false = 0
        for pid, p in personas.items():
            detail = plan.details.get(pid)
            if detail is None:
                report.topic_probabilities[pid].append(None)
                report.slot_scores[pid].append(None)
                report.delivered_topics[pid].append([])
                continue
            total = sum(detail.topic_scores)
            report.topic_probabilities[pid].append(tuple(s / total for s in detail.topic_scores))
            report.slot_scores[pid].append(detail.slot_scores)
            entries = plan.for_user(pid)
            report.delivered_topics[pid].append([e.topic for e in entries])
            for e in entries:
                n_delivered += 1
                if p.is_receptive(minute_of_day(e.send_at)):
                    read, delay = rng.random() < p.read_prob_receptive, _delay(rng, p.receptive_delay_minutes)
                else:
                    read, delay = rng.random() < p.read_prob_other, _delay(rng, p.other_delay_minutes)
                if not read:
                    continue
                read_at = e.send_at + delay
                receipts.append(ReadReceipt(pid, e.message_id, read_at))
                if rng.random() < p.vote_honesty:
                    value = p.honest_vote(e.topic)
                else:
                    value = rng.choice(list(VoteValue))
                votes.append((pid, read_at + timedelta(seconds=30), Vote(e.message_id, value)))
                if value is VoteValue.LIKE and e.topic is p.dominant:
                    n_correct += 1
                elif value is VoteValue.DISLIKE:
                    n_false += 1

        record_delivery_outcomes(plan, receipts, log)
        for pid, at, vote in votes:
            log.append(pid, at, vote)

        for pid in plan.details:
            p = personas.get(pid)
            if p is None:
                continue
            for _ in range(_visits(rng, p.section_visits_per_day)):
                topic = rng.choices(TOPICS, weights=p.preferences)[0]
                at = midnight(plan_date) + timedelta(seconds=rng.randrange(86400))
                dwell = round(rng.expovariate(1.0 / p.dwell_mean_seconds), 1) if p.dwell_mean_seconds > 0 else 0.0
                log.append(pid, at, SectionAccess(topic, dwell))

        converged = [
            _argmax(probs[-1]) == personas[pid].dominant
            for pid, probs in report.topic_probabilities.items()
            if probs[-1] is not None
        ]
        concentrations = [max(s) / sum(s) for s in (report.slot_scores[pid][-1] for pid in personas) if s is not None]
        report.daily.append(
            {
                "deliveries": float(n_delivered),
                "correct_rate": n_correct / n_delivered if n_delivered else 0.0,
                "false_positive_rate": n_false / n_delivered if n_delivered else 0.0,
                "converged_fraction": sum(converged) / len(converged) if converged else 0.0,
                "mean_slot_concentration": sum(concentrations) / len(concentrations) if concentrations else 0.0,
            }
        )

    for pid, p in personas.items():
        report.convergence_day[pid] = _convergence_day(report.topic_probabilities[pid], p.dominant)
    return report


def report_to_csv(report: SimReport, path: str | Path) -> Path:
    """Write one ``(day, date, metric, value)`` row per day and metric."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for d, row in enumerate(report.daily):
                day = (report.start_date + timedelta(days=d)).isoformat()
                for metric in METRICS:
                    writer.writerow((d, day, metric, f"{row[metric]:.6f}"))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(path)) from exc
    return path
