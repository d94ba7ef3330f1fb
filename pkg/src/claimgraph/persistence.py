"""Durability for the live service: an append-only JSON Lines event log plus
periodic full snapshots. Recovery loads the latest snapshot and replays the
log tail; events carry the vectors computed at ingest time, so replay never
re-embeds and is deterministic.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional

from .errors import CorpusFormatError

EVENTS_FILE = "events.log"
SNAPSHOT_FILE = "snapshot.json"


class EventLog:
    """Append-only JSONL log; every append is flushed and fsynced before it
    is acknowledged."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._count = sum(1 for _ in self.iter_events())
        self._fh = open(self.path, "a", encoding="utf-8")

    @property
    def count(self) -> int:
        return self._count

    def append(self, event: dict) -> int:
        """Durably append one event; returns its sequence number."""
        self._fh.write(json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._count += 1
        return self._count - 1

    def iter_events(self, start: int = 0) -> Iterator[dict]:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as f:
            for i, line in enumerate(f):
                if not line.strip():
                    continue
                if i < start:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as e:
                    raise CorpusFormatError(f"{self.path}:{i + 1}: corrupt event: {e}") from e

    def close(self) -> None:
        self._fh.close()


@dataclass
class SnapshotStore:
    """Whole-state snapshot written atomically next to the event log."""

    path: Path

    def save(self, obj: dict) -> None:
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(obj, f, sort_keys=True, separators=(",", ":"))
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, self.path)

    def load(self) -> Optional[dict]:
        if not self.path.exists():
            return None
        with open(self.path, "r", encoding="utf-8") as f:
            return json.load(f)


@dataclass
class PersistenceDir:
    root: Path

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    @property
    def events_path(self) -> Path:
        return self.root / EVENTS_FILE

    @property
    def snapshot_path(self) -> Path:
        return self.root / SNAPSHOT_FILE

    def open_log(self) -> EventLog:
        return EventLog(self.events_path)

    def snapshot_store(self) -> SnapshotStore:
        return SnapshotStore(self.snapshot_path)
