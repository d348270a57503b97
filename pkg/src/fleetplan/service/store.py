"""Append-only event log with snapshot compaction.

Every committed mutation is one JSON line in ``events.jsonl``.  A snapshot
captures the full service state at some sequence number so recovery replays
only the tail.  Writes are flushed before the call returns, which is what
makes the crash-restart guarantee hold for committed operations.
"""
from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from pathlib import Path


class EventStore:
    SNAPSHOT_EVERY = 50

    def __init__(self, data_dir: str | os.PathLike):
        self.dir = Path(data_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.events_path = self.dir / "events.jsonl"
        self.snapshot_path = self.dir / "snapshot.json"
        self.seq = 0
        for _seq, _kind, _data in self.tail(0):
            self.seq = _seq

    def append(self, kind: str, data: dict) -> int:
        self.seq += 1
        record = {"seq": self.seq, "ts": datetime.now(timezone.utc).isoformat(),
                  "kind": kind, "data": data}
        with self.events_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        return self.seq

    def tail(self, after_seq: int):
        """Yields (seq, kind, data) for every event past ``after_seq``."""
        if not self.events_path.exists():
            return
        with self.events_path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record["seq"] > after_seq:
                    yield record["seq"], record["kind"], record["data"]

    def write_snapshot(self, state: dict) -> None:
        payload = {"seq": self.seq, "state": state}
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        tmp.replace(self.snapshot_path)

    def load_snapshot(self) -> tuple[int, dict] | None:
        if not self.snapshot_path.exists():
            return None
        payload = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
        return payload["seq"], payload["state"]

    def maybe_compact(self, state: dict) -> None:
        loaded = self.load_snapshot()
        base = loaded[0] if loaded else 0
        if self.seq - base >= self.SNAPSHOT_EVERY:
            self.write_snapshot(state)
