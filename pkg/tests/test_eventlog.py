import json
import threading

import pytest

from conftest import ts
from msgtailor.domain import MalformedRecord, MessageRead, Vote, VoteValue
from msgtailor.eventlog import EventLog, read_records


def test_append_assigns_dense_seqs_and_persists(tmp_path):
    path = tmp_path / "events.jsonl"
    log = EventLog(path)
    a = log.append("alice", ts(), Vote("m1", VoteValue.LIKE))
    b = log.append("alice", ts(0, 601), MessageRead("m1"))
    assert (a.seq, b.seq) == (1, 2)

    lines = path.read_text().splitlines()
    assert [json.loads(line)["seq"] for line in lines] == [1, 2]
    assert set(json.loads(lines[0])) == {"seq", "user_id", "at", "kind", "payload"}

    reopened = EventLog(path)
    assert reopened.records() == [a, b]
    assert reopened.append("bob", ts(), MessageRead("m2")).seq == 3


def test_concurrent_appends_are_linearised(tmp_path):
    log = EventLog(tmp_path / "events.jsonl", fsync=False)

    def worker(k):
        for i in range(50):
            log.append(f"user{k}", ts(0, i), MessageRead(f"m{i}"))

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    on_disk = read_records(log.path)
    assert [r.seq for r in on_disk] == list(range(1, 401))
    assert on_disk == log.records()


def test_corrupt_line_is_rejected(tmp_path):
    path = tmp_path / "events.jsonl"
    log = EventLog(path)
    log.append("alice", ts(), MessageRead("m1"))
    with path.open("a") as fh:
        fh.write("{not json\n")
    with pytest.raises(MalformedRecord, match="line 2"):
        EventLog(path)


def test_out_of_order_seq_is_rejected(tmp_path):
    path = tmp_path / "events.jsonl"
    log = EventLog(path)
    log.append("alice", ts(), MessageRead("m1"))
    line = path.read_text()
    path.write_text(line + line)
    with pytest.raises(MalformedRecord) as info:
        read_records(path)
    assert info.value.seq == 1


def test_in_memory_log():
    log = EventLog()
    log.append("a", ts(), MessageRead("m1"))
    assert len(log) == 1 and log.path is None
