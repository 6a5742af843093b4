import random
from datetime import timedelta

import pytest

from conftest import DAY0, profile, small_catalog, ts
from msgtailor.catalog import Catalog, CatalogError
from msgtailor.config import EngineConfig
from msgtailor.domain import ActivitySample, Delivery, MessageRead, ProfileUpdate, TimeWindow, Topic, minute_of_day
from msgtailor.eventlog import EventLog
from msgtailor.pipeline import (
    NightlyPlan,
    PlanExists,
    ReadReceipt,
    commit_plan,
    record_delivery_outcomes,
    run_nightly,
    user_seed,
)
from msgtailor.sim.cohort import random_cohort_log

PLAN_DAY = DAY0 + timedelta(days=1)


def test_quit_date_boundaries(builder, catalog):
    builder.register(profile("today", quit_date=PLAN_DAY))
    builder.register(profile("tomorrow", quit_date=PLAN_DAY + timedelta(days=1)))
    builder.register(profile("gone", dropped_out_at=PLAN_DAY))
    plan = run_nightly(builder.records, PLAN_DAY, catalog)
    assert {e.user_id for e in plan.entries} == {"today"}


def test_empty_cohort_gives_empty_plan(catalog):
    plan = run_nightly([], PLAN_DAY, catalog)
    assert plan.entries == () and plan.to_jsonl() == ""


def test_incomplete_catalog_is_refused(builder):
    builder.register(profile("a"))
    with pytest.raises(CatalogError):
        run_nightly(builder.records, PLAN_DAY, Catalog([]))


def test_plan_is_byte_identical_on_rerun(full_catalog):
    records, day = random_cohort_log(random.Random(4), full_catalog, 40, 2000)
    a = run_nightly(records, day, full_catalog)
    b = run_nightly(list(records), day, full_catalog)
    assert a.to_jsonl() == b.to_jsonl() and a.to_jsonl()
    assert NightlyPlan.from_jsonl(a.to_jsonl(), day).entries == a.entries


def test_master_seed_changes_draws(full_catalog):
    records, day = random_cohort_log(random.Random(4), full_catalog, 40, 2000)
    a = run_nightly(records, day, full_catalog, EngineConfig(master_seed=0))
    b = run_nightly(records, day, full_catalog, EngineConfig(master_seed=1))
    assert a.to_jsonl() != b.to_jsonl()
    assert user_seed(0, "u", day) != user_seed(1, "u", day)


def test_every_eligible_user_gets_messages_per_day(builder, catalog):
    for k in range(5):
        builder.register(profile(f"u{k}"))
    plan = run_nightly(builder.records, PLAN_DAY, catalog, EngineConfig(messages_per_day=3))
    assert len(plan.entries) == 15
    for k in range(5):
        entries = plan.for_user(f"u{k}")
        assert len({e.message_id for e in entries}) == 3
        assert [e.send_at for e in entries] == sorted(e.send_at for e in entries)


def test_rerun_requires_force(catalog):
    log = EventLog()
    log.append("a", ts(-1), ProfileUpdate(profile("a")))
    plan = run_nightly(log.records(), PLAN_DAY, catalog)
    assert len(commit_plan(plan, log)) == 1
    with pytest.raises(PlanExists):
        run_nightly(log.records(), PLAN_DAY, catalog)
    forced = run_nightly(log.records(), PLAN_DAY, catalog, force=True)
    assert commit_plan(forced, log) == []


def test_per_user_draws_are_independent_of_other_users(builder, catalog):
    builder.register(profile("alice", window=TimeWindow(480, 1200)))
    solo = run_nightly(builder.records, PLAN_DAY, catalog).for_user("alice")
    builder.register(profile("bob"))
    builder.vote("bob", "diet_tips-0", "dislike")
    builder.read("bob", "ppal-1")
    crowd = run_nightly(builder.records, PLAN_DAY, catalog)
    assert [(e.slot_index, e.send_at) for e in crowd.for_user("alice")] == [(e.slot_index, e.send_at) for e in solo]


def test_send_times_fall_inside_windows(builder, catalog):
    windows = [TimeWindow(0, 1440), TimeWindow(480, 1200), TimeWindow(1439, 1440), TimeWindow(600, 607)]
    for k, w in enumerate(windows):
        builder.register(profile(f"u{k}", window=w))
    plan = run_nightly(builder.records, PLAN_DAY, catalog, EngineConfig(messages_per_day=4))
    for e in plan.entries:
        w = windows[int(e.user_id[1:])]
        assert e.send_at.date() == PLAN_DAY and w.contains(minute_of_day(e.send_at))
    assert {minute_of_day(e.send_at) for e in plan.for_user("u2")} == {1439}


def test_ppal_without_activity_uses_fallback_template(builder):
    catalog = small_catalog()
    builder.register(profile("a", interests=(0, 0, 0, 2, 0)))
    plan = run_nightly(builder.records, PLAN_DAY, catalog, EngineConfig(messages_per_day=20))
    ppal = [e for e in plan.entries if e.topic is Topic.PPAL]
    assert ppal and all(e.ppal_fallback and "{" not in e.body for e in ppal)


def test_ppal_with_activity_renders_delta(builder):
    catalog = small_catalog(per_topic=1)
    builder.register(profile("a", name="Peter", interests=(0, 0, 0, 2, 0)))
    # six days at 60 min, then 77.5: the 7-day mean is 62.5, so delta is 15
    for k in range(1, 7):
        builder.add("a", ActivitySample(DAY0 - timedelta(days=k), 60.0), ts(0, 0, k))
    builder.add("a", ActivitySample(DAY0, 77.5), ts(0, 0, 10))
    plan = run_nightly(builder.records, PLAN_DAY, catalog, EngineConfig(messages_per_day=30))
    ppal = [e for e in plan.entries if e.topic is Topic.PPAL]
    assert ppal and all(not e.ppal_fallback for e in ppal)
    assert all(e.body == "Hi Peter, 15 min vs average" for e in ppal)


def _committed(catalog):
    log = EventLog()
    log.append("a", ts(-1), ProfileUpdate(profile("a")))
    plan = run_nightly(log.records(), PLAN_DAY, catalog)
    commit_plan(plan, log)
    return log, plan, plan.entries[0]


def test_read_receipt_records_latency(catalog):
    log, plan, entry = _committed(catalog)
    report = record_delivery_outcomes(plan, [ReadReceipt("a", entry.message_id, entry.send_at + timedelta(minutes=5))], log)
    assert not report.rejected
    (delivery,) = report.deliveries
    assert delivery.read_at - delivery.sent_at == timedelta(minutes=5)
    assert isinstance(log.records()[-1].payload, MessageRead)
    assert [r.payload for r in log.records() if isinstance(r.payload, Delivery)][0].message_id == entry.message_id


def test_bad_receipts_are_rejected_individually(catalog):
    log, plan, entry = _committed(catalog)
    later = entry.send_at + timedelta(minutes=1)
    receipts = [
        ReadReceipt("a", entry.message_id, later),
        ReadReceipt("a", entry.message_id, later + timedelta(minutes=9)),
        ReadReceipt("a", "nope", later),
        ReadReceipt("b", entry.message_id, later),
    ]
    report = record_delivery_outcomes(plan, receipts, log)
    assert [reason for _, reason in report.rejected] == ["duplicate receipt", "unknown delivery", "unknown delivery"]
    assert len(report.appended) == 1
    report = record_delivery_outcomes(plan, [ReadReceipt("a", entry.message_id, entry.send_at - timedelta(seconds=1))], log)
    assert report.rejected[0][1] == "read before send"
