import json
import os
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from datetime import datetime, timezone

import pytest

from conftest import profile
from msgtailor.cli import EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO, EXIT_OK, main
from msgtailor.domain import ProfileUpdate
from msgtailor.eventlog import EventLog


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["seed-catalog", "--out", "catalog.jsonl", "--pool-size", "10"]) == EXIT_OK
    log = EventLog(tmp_path / "events.jsonl")
    for name in ("ann", "bob"):
        log.append(name, datetime(2026, 2, 28, tzinfo=timezone.utc), ProfileUpdate(profile(name)))
    return tmp_path


def test_seed_catalog(workspace):
    lines = (workspace / "catalog.jsonl").read_text().splitlines()
    assert len(lines) == 50 and json.loads(lines[0])["id"]


def test_nightly_writes_plan_and_refuses_rerun(workspace, capsys):
    args = ["nightly", "--date", "2026-03-02"]
    assert main(args) == EXIT_OK
    plan = workspace / "plans" / "plan-2026-03-02.jsonl"
    first = plan.read_bytes()
    assert len(first.splitlines()) == 2
    assert "planned 2 messages for 2 users" in capsys.readouterr().out
    assert main(args) == EXIT_DOMAIN
    assert "--force" in capsys.readouterr().err
    assert main(args + ["--force"]) == EXIT_OK
    assert plan.read_bytes() == first
    deliveries = [r for r in EventLog(workspace / "events.jsonl").records() if r.payload.kind == "delivery"]
    assert len(deliveries) == 2


def test_nightly_date_from_environment(workspace, monkeypatch):
    monkeypatch.setenv("MSGTAILOR_DATE", "2026-03-03")
    assert main(["nightly", "--out", "p.jsonl"]) == EXIT_OK
    assert (workspace / "p.jsonl").exists()


def test_nightly_seed_changes_plan(workspace):
    main(["nightly", "--date", "2026-03-02", "--out", "a.jsonl", "--plans", "pa", "--log", "events.jsonl"])
    other = EventLog(workspace / "other.jsonl")
    for rec in EventLog(workspace / "events.jsonl").records()[:2]:
        other.append(rec.user_id, rec.at, rec.payload)
    main(["nightly", "--date", "2026-03-02", "--out", "b.jsonl", "--log", "other.jsonl", "--seed", "9"])
    assert (workspace / "a.jsonl").read_bytes() != (workspace / "b.jsonl").read_bytes()


def test_missing_inputs_fail_cleanly(workspace, capsys):
    assert main(["nightly", "--date", "2026-03-02", "--catalog", "nope.jsonl"]) == EXIT_CONFIG
    assert main(["simulate", "--scenario", "nope.json"]) == EXIT_CONFIG
    assert main(["report", "nope.jsonl"]) == EXIT_IO
    (workspace / "bad.ini").write_text("[timing]\ntau_minutes = -1\n")
    assert main(["nightly", "--date", "2026-03-02", "--config", "bad.ini"]) == EXIT_CONFIG
    assert "Traceback" not in capsys.readouterr().err


def test_simulate_demo_and_report(workspace, capsys):
    assert main(["simulate", "--days", "12", "--out", "sim.csv"]) == EXIT_OK
    first = (workspace / "sim.csv").read_bytes()
    assert main(["simulate", "--days", "12", "--out", "sim2.csv"]) == EXIT_OK
    assert (workspace / "sim2.csv").read_bytes() == first
    assert main(["simulate", "--days", "12", "--out", "sim3.csv", "--seed", "99"]) == EXIT_OK
    assert (workspace / "sim3.csv").read_bytes() != first
    capsys.readouterr()
    assert main(["report", "sim.csv"]) == EXIT_OK
    assert "correct_rate" in capsys.readouterr().out


def test_report_plan(workspace, capsys):
    main(["nightly", "--date", "2026-03-02"])
    capsys.readouterr()
    assert main(["report", "plans/plan-2026-03-02.jsonl"]) == EXIT_OK
    assert "2 messages for 2 users" in capsys.readouterr().out


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.mark.slow
def test_serve_subprocess(workspace):
    port = _free_port()
    env = {**os.environ, "PYTHONUNBUFFERED": "1"}
    proc = subprocess.Popen(
        [sys.executable, "-m", "msgtailor.cli", "serve", "--listen", f"127.0.0.1:{port}"],
        cwd=workspace, env=env, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
    )
    try:
        base = f"http://127.0.0.1:{port}"
        for _ in range(100):
            try:
                with urllib.request.urlopen(base + "/health", timeout=1) as r:
                    assert json.load(r) == {"status": "ok", "events": 2}
                break
            except OSError:
                time.sleep(0.1)
        else:
            pytest.fail("server did not start")
        body = json.dumps({"user_id": "ann", "message_id": "diet_tips-001"}).encode()
        req = urllib.request.Request(base + "/events/read", body, {"Content-Type": "application/json"})
        with urllib.request.urlopen(req, timeout=2) as r:
            assert r.status == 201 and json.load(r) == {"seq": 3}
    finally:
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(timeout=10) == 0
    assert len(EventLog(workspace / "events.jsonl")) == 3


def test_serve_refuses_bad_catalog(workspace):
    assert main(["serve", "--catalog", "nope.jsonl", "--listen", "127.0.0.1:1"]) == EXIT_CONFIG
