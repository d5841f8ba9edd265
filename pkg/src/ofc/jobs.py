"""Background jobs on a bounded worker pool, persisted through the store.

Status transitions are queued -> running -> done|failed only. A job's result
payload is materialized to the store before the status flips to done. On
boot, any job left in running (a crash mid-job) is marked failed, and queued
jobs are re-enqueued.
"""

from __future__ import annotations

import queue
import threading
import traceback
import uuid
from datetime import datetime, timezone
from typing import Callable, Optional

from .store import Store

JOB_KINDS = ("check", "llm_eval", "checker_eval")
_VALID_TRANSITIONS = {
    "queued": {"running"},
    "running": {"done", "failed"},
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class JobManager:
    def __init__(self, store: Store, handlers: dict[str, Callable[[dict], dict]], workers: int = 4):
        self.store = store
        self.handlers = handlers
        self._queue: queue.Queue[Optional[str]] = queue.Queue()
        self._threads = []
        self._recover()
        for _ in range(max(1, workers)):
            thread = threading.Thread(target=self._worker, daemon=True)
            thread.start()
            self._threads.append(thread)

    def _recover(self) -> None:
        for job_id, job in self.store.all("jobs").items():
            if job["status"] == "running":
                job = dict(job)
                job["status"] = "failed"
                job["error"] = "interrupted by restart"
                self.store.put("jobs", job_id, job)
            elif job["status"] == "queued":
                self._queue.put(job_id)

    def submit(self, kind: str, payload: dict, job_id: Optional[str] = None) -> str:
        if kind not in self.handlers:
            raise ValueError(f"no handler for job kind {kind!r}")
        job_id = job_id or uuid.uuid4().hex
        self.store.put(
            "jobs",
            job_id,
            {
                "job_id": job_id,
                "kind": kind,
                "status": "queued",
                "created_at": _now(),
                "payload": {**payload, "job_id": job_id},
                "result": None,
                "error": None,
            },
        )
        self._queue.put(job_id)
        return job_id

    def get(self, job_id: str) -> Optional[dict]:
        return self.store.get("jobs", job_id)

    def _set_status(self, job_id: str, status: str, **updates) -> dict:
        job = dict(self.store.get("jobs", job_id))
        allowed = _VALID_TRANSITIONS.get(job["status"], set())
        if status not in allowed:
            raise ValueError(f"illegal transition {job['status']} -> {status}")
        job["status"] = status
        job.update(updates)
        self.store.put("jobs", job_id, job)
        return job

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            job = self.store.get("jobs", job_id)
            if job is None or job["status"] != "queued":
                continue
            try:
                self._set_status(job_id, "running")
                handler = self.handlers[job["kind"]]
                result = handler(job["payload"])
                # materialize the result before flipping to done
                self._set_status(job_id, "done", result=result)
            except Exception as exc:  # noqa: BLE001 - job isolation
                detail = f"{type(exc).__name__}: {exc}"
                try:
                    self._set_status(job_id, "failed", error=detail)
                except Exception:
                    traceback.print_exc()

    def shutdown(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for thread in self._threads:
            thread.join(timeout=5)
