from datetime import date, timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import profile
from msgtailor.domain import Message, Topic
from msgtailor.ppal import ActivityStats, MissingActivity, activity_stats, render_ppal_message, round_half_away

TEMPLATE = Message("p1", Topic.PPAL, "Hello {name}! You were {delta_minutes} min over your average activity time.")
DAY = date(2026, 3, 10)


def test_worked_example_renders_fifteen():
    text = render_ppal_message(TEMPLATE, profile("peter", name="Peter"), ActivityStats("peter", DAY, 75, 60))
    assert text == "Hello Peter! You were 15 min over your average activity time."


def test_equal_activity_renders_zero():
    stats = ActivityStats("a", DAY, 42.0, 42.0)
    assert stats.delta_minutes == 0
    assert " 0 min" in render_ppal_message(TEMPLATE, profile("a"), stats)


def test_missing_stats():
    with pytest.raises(MissingActivity):
        render_ppal_message(TEMPLATE, profile("a"), None)
    plain = Message("p2", Topic.PPAL, "Keep moving, {name}!")
    assert render_ppal_message(plain, profile("a", name="Ann"), None) == "Keep moving, Ann!"


def test_non_ppal_template_rejected():
    with pytest.raises(ValueError):
        render_ppal_message(Message("d", Topic.DIET_TIPS, "eat fruit"), profile("a"), None)


def test_activity_stats_window():
    samples = {DAY - timedelta(days=k): float(10 * k) for k in range(10)}
    stats = activity_stats("a", samples, DAY, window_days=7)
    assert stats.active_minutes == 0.0
    assert stats.rolling_mean == pytest.approx(sum(10 * k for k in range(7)) / 7)
    with pytest.raises(MissingActivity):
        activity_stats("a", samples, DAY + timedelta(days=1))


def test_rounding_is_half_away_from_zero():
    assert [round_half_away(x) for x in (2.5, -2.5, 0.4, -0.6)] == [3, -3, 0, -1]


@given(st.dictionaries(st.integers(0, 20), st.integers(0, 300), min_size=1), st.integers(1, 10))
def test_delta_matches_brute_force(raw, window_days):
    samples = {DAY - timedelta(days=k): float(v) for k, v in raw.items()}
    day = max(samples)
    stats = activity_stats("a", samples, day, window_days)
    in_window = [v for d, v in samples.items() if day - timedelta(days=window_days) < d <= day]
    brute = samples[day] - sum(in_window) / len(in_window)
    assert abs(stats.delta_minutes - brute) <= 0.5
