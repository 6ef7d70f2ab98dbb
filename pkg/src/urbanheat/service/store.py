"""Durable scenario persistence: one JSON file per scenario.

Writes go through a temp file plus atomic replace, serialized per id, so
concurrent requests can never interleave partial content.  Listing sorts by
creation time.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path


class DuplicateScenario(Exception):
    pass


class UnknownScenario(Exception):
    pass


class ScenarioStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, scenario_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(scenario_id, threading.Lock())

    def _path(self, scenario_id: str) -> Path:
        safe = scenario_id.replace("/", "_").replace("\\", "_").replace("..", "_")
        return self.data_dir / f"{safe}.json"

    def create(self, payload: dict, scenario_id: str | None = None) -> dict:
        sid = scenario_id or uuid.uuid4().hex[:12]
        path = self._path(sid)
        with self._lock_for(sid):
            if path.exists():
                raise DuplicateScenario(sid)
            record = dict(payload)
            record["id"] = sid
            record["created_at"] = datetime.now(timezone.utc).isoformat()
            self._write(path, record)
        return record

    def _write(self, path: Path, record: dict) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)

    def get(self, scenario_id: str) -> dict:
        path = self._path(scenario_id)
        if not path.exists():
            raise UnknownScenario(scenario_id)
        return json.loads(path.read_text(encoding="utf-8"))

    def delete(self, scenario_id: str) -> None:
        path = self._path(scenario_id)
        with self._lock_for(scenario_id):
            if not path.exists():
                raise UnknownScenario(scenario_id)
            path.unlink()

    def list(self) -> list[dict]:
        records = []
        for p in self.data_dir.glob("*.json"):
            try:
                records.append(json.loads(p.read_text(encoding="utf-8")))
            except (OSError, json.JSONDecodeError):
                continue
        records.sort(key=lambda r: (r.get("created_at", ""), r.get("id", "")))
        return records
