"""File-backed persistence: append-only event logs with snapshot files.

One log and one snapshot per collection. Writes append to the log first and
then atomically rewrite the snapshot (write-temp + rename), so a crash at any
point leaves a readable store: boot loads the snapshot and replays any log
events past it, tolerating a torn final line.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Optional

COLLECTIONS = ("jobs", "submissions", "leaderboard")


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks = {name: threading.Lock() for name in COLLECTIONS}
        self._records: dict[str, dict[str, Any]] = {}
        self._seqs: dict[str, int] = {}
        for name in COLLECTIONS:
            self._load_collection(name)

    # -- paths -------------------------------------------------------------

    def _log_path(self, collection: str) -> Path:
        return self.root / f"{collection}.log"

    def _snapshot_path(self, collection: str) -> Path:
        return self.root / f"{collection}.snapshot.json"

    # -- boot --------------------------------------------------------------

    def _load_collection(self, collection: str) -> None:
        records: dict[str, Any] = {}
        last_seq = 0
        snapshot = self._snapshot_path(collection)
        if snapshot.exists():
            payload = json.loads(snapshot.read_text(encoding="utf-8"))
            records = payload.get("records", {})
            last_seq = payload.get("last_seq", 0)
        log = self._log_path(collection)
        if log.exists():
            with log.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        event = json.loads(line)
                    except json.JSONDecodeError:
                        continue  # torn tail write from a crash
                    if event.get("seq", 0) <= last_seq:
                        continue
                    last_seq = event["seq"]
                    if event["op"] == "put":
                        records[event["key"]] = event["value"]
                    elif event["op"] == "delete":
                        records.pop(event["key"], None)
        self._records[collection] = records
        self._seqs[collection] = last_seq

    # -- writes (single writer per collection) -------------------------------

    def put(self, collection: str, key: str, value: dict) -> None:
        with self._locks[collection]:
            seq = self._seqs[collection] + 1
            event = {"seq": seq, "op": "put", "key": key, "value": value}
            with self._log_path(collection).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._records[collection][key] = value
            self._seqs[collection] = seq
            self._write_snapshot(collection)

    def _write_snapshot(self, collection: str) -> None:
        payload = {
            "last_seq": self._seqs[collection],
            "records": self._records[collection],
        }
        path = self._snapshot_path(collection)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    # -- reads ----------------------------------------------------------------

    def get(self, collection: str, key: str) -> Optional[dict]:
        return self._records[collection].get(key)

    def all(self, collection: str) -> dict[str, dict]:
        return dict(self._records[collection])

    def __contains__(self, item: tuple[str, str]) -> bool:
        collection, key = item
        return key in self._records[collection]
