"""Send-time recommender.

The user's daily window is cut into at most six equal slots. Each slot is
scored by a Laplace prior plus the read-latency utility of past deliveries
that landed in it, and the slot vector goes to the roulette selector.
"""

from __future__ import annotations

import math
import random
from collections.abc import Iterable
from dataclasses import dataclass
from datetime import datetime, timedelta

from .domain import DeliveryRecord, TimeWindow, midnight, minute_of_day

DEFAULT_TAU_MINUTES = 60.0
DEFAULT_SLOT_PRIOR = 0.1
DEFAULT_MAX_SLOTS = 6


@dataclass(frozen=True)
class SlotModel:
    window: TimeWindow
    boundaries: tuple[tuple[int, int], ...]

    @property
    def slot_count(self) -> int:
        return len(self.boundaries)

    def slot_of(self, minute: int) -> int | None:
        for k, (lo, hi) in enumerate(self.boundaries):
            if lo <= minute < hi:
                return k
        return None


@dataclass(frozen=True)
class SlotDistribution:
    scores: tuple[float, ...]

    def probabilities(self) -> tuple[float, ...]:
        total = sum(self.scores)
        return tuple(s / total for s in self.scores)


def slot_partition(window: TimeWindow, max_slots: int = DEFAULT_MAX_SLOTS) -> SlotModel:
    """Split ``window`` into ``min(max_slots, duration)`` contiguous slots.

    Leftover minutes go one each to the earliest slots, so lengths differ by
    at most one minute.
    """
    count = min(max_slots, window.duration)
    base, extra = divmod(window.duration, count)
    bounds = []
    lo = window.start
    for k in range(count):
        hi = lo + base + (1 if k < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return SlotModel(window, tuple(bounds))


def latency_to_utility(
    delivered: datetime,
    read: datetime | None,
    tau_minutes: float = DEFAULT_TAU_MINUTES,
    deadline: datetime | None = None,
) -> float:
    """``exp(-latency / tau)``; a message not read (by ``deadline``) is worth 0."""
    if read is None or (deadline is not None and read >= deadline):
        return 0.0
    delta = (read - delivered).total_seconds() / 60.0
    if delta < 0:
        raise ValueError("read precedes delivery")
    return math.exp(-delta / tau_minutes)


def slot_scores(
    history: Iterable[DeliveryRecord],
    model: SlotModel,
    tau_minutes: float = DEFAULT_TAU_MINUTES,
    prior: float = DEFAULT_SLOT_PRIOR,
) -> SlotDistribution:
    scores = [prior] * model.slot_count
    for rec in history:
        slot = model.slot_of(minute_of_day(rec.sent_at))
        if slot is None:
            continue
        day_end = midnight(rec.plan_date) + timedelta(days=1)
        scores[slot] += latency_to_utility(rec.sent_at, rec.read_at, tau_minutes, day_end)
    return SlotDistribution(tuple(scores))


def choose_send_minute(slot: tuple[int, int], rng: random.Random) -> int:
    lo, hi = slot
    if hi <= lo:
        raise ValueError(f"empty slot {slot}")
    return rng.randrange(lo, hi)
