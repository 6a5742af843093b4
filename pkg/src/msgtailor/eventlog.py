"""Append-only JSONL event log.

One JSON object per line. Appends are serialised behind a lock and flushed
(optionally fsynced) before ``append`` returns, so an acknowledged event is
on disk. A log with ``path=None`` lives in memory only, which is what the
simulator and the tests use.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

from .domain import EventRecord, MalformedRecord, Payload, utc


def encode_record(record: EventRecord) -> str:
    return json.dumps(record.to_dict(), separators=(",", ":"), sort_keys=True)


def read_records(path: str | Path) -> list[EventRecord]:
    """Parse a log file, rejecting the first bad line with its seq (or line number)."""
    records: list[EventRecord] = []
    last_seq = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(None, f"line {lineno}: {exc.msg}") from exc
            if not isinstance(data, dict):
                raise MalformedRecord(None, f"line {lineno}: not a JSON object")
            record = EventRecord.from_dict(data)
            if record.seq <= last_seq:
                raise MalformedRecord(record.seq, f"seq not increasing (previous {last_seq})")
            last_seq = record.seq
            records.append(record)
    return records


class EventLog:
    def __init__(self, path: str | Path | None = None, *, fsync: bool = True):
        self.path = Path(path) if path is not None else None
        self._fsync = fsync
        self._lock = threading.Lock()
        self._records: list[EventRecord] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                self._records = read_records(self.path)

    @classmethod
    def from_records(cls, records: Iterable[EventRecord]) -> "EventLog":
        log = cls(None)
        log._records = list(records)
        return log

    @property
    def next_seq(self) -> int:
        return self._records[-1].seq + 1 if self._records else 1

    def append(self, user_id: str, at: datetime, payload: Payload) -> EventRecord:
        with self._lock:
            record = EventRecord(self.next_seq, user_id, utc(at), payload)
            if self.path is not None:
                line = encode_record(record) + "\n"
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(line)
                    fh.flush()
                    if self._fsync:
                        os.fsync(fh.fileno())
            self._records.append(record)
            return record

    def records(self) -> list[EventRecord]:
        """Immutable prefix of the log as of this call."""
        with self._lock:
            return list(self._records)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.records())

    def __len__(self) -> int:
        return len(self._records)
