"""Personal physical activity level (PPAL) message rendering."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from datetime import date, timedelta

from .domain import Message, Topic, UserProfile


class MissingActivity(LookupError):
    pass


@dataclass(frozen=True)
class ActivityStats:
    user_id: str
    day: date
    active_minutes: float
    rolling_mean: float

    @property
    def delta_minutes(self) -> int:
        return round_half_away(self.active_minutes - self.rolling_mean)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def activity_stats(
    user_id: str, samples: Mapping[date, float], day: date, window_days: int = 7
) -> ActivityStats:
    """Stats for ``day`` against the mean of the trailing ``window_days`` days.

    The window ends on ``day`` inclusive. Days without a sample are skipped
    rather than counted as zero activity.
    """
    if day not in samples:
        raise MissingActivity(f"no activity sample for {user_id} on {day}")
    window = [samples[d] for k in range(window_days) if (d := day - timedelta(days=k)) in samples]
    return ActivityStats(user_id, day, samples[day], sum(window) / len(window))


def render_ppal_message(template: Message, user: UserProfile, stats: ActivityStats | None) -> str:
    if template.topic is not Topic.PPAL:
        raise ValueError(f"message {template.id} is not a PPAL template")
    if template.needs_activity and stats is None:
        raise MissingActivity(f"template {template.id} needs activity data for {user.user_id}")
    values = {"name": user.name}
    if stats is not None:
        values["delta_minutes"] = str(stats.delta_minutes)
    return template.body.format_map(values)
