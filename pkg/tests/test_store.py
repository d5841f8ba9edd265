"""File store: durability, crash tolerance, and the job manager lifecycle."""

import json
import threading
import time

import pytest

from ofc.jobs import JobManager
from ofc.store import Store


class TestStore:
    def test_put_get_all(self, tmp_path):
        store = Store(tmp_path)
        store.put("jobs", "j1", {"status": "queued"})
        store.put("jobs", "j2", {"status": "done"})
        assert store.get("jobs", "j1") == {"status": "queued"}
        assert set(store.all("jobs")) == {"j1", "j2"}
        assert store.get("jobs", "missing") is None

    def test_persistence_across_reopen(self, tmp_path):
        store = Store(tmp_path)
        store.put("leaderboard", "e1", {"score": 1})
        reopened = Store(tmp_path)
        assert reopened.get("leaderboard", "e1") == {"score": 1}

    def test_replay_log_past_snapshot(self, tmp_path):
        store = Store(tmp_path)
        store.put("jobs", "j1", {"status": "queued"})
        # simulate a crash after a log append but before the snapshot write:
        # append an event to the log behind the store's back
        log = tmp_path / "jobs.log"
        with log.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"seq": 2, "op": "put", "key": "j2", "value": {"status": "queued"}}) + "\n")
        reopened = Store(tmp_path)
        assert reopened.get("jobs", "j2") == {"status": "queued"}

    def test_torn_tail_line_tolerated(self, tmp_path):
        store = Store(tmp_path)
        store.put("jobs", "j1", {"status": "queued"})
        log = tmp_path / "jobs.log"
        with log.open("a", encoding="utf-8") as fh:
            fh.write('{"seq": 99, "op": "put", "key": "half')  # torn write
        reopened = Store(tmp_path)
        assert reopened.get("jobs", "j1") == {"status": "queued"}
        assert reopened.get("jobs", "half") is None

    def test_updates_overwrite(self, tmp_path):
        store = Store(tmp_path)
        store.put("jobs", "j1", {"status": "queued"})
        store.put("jobs", "j1", {"status": "done"})
        assert Store(tmp_path).get("jobs", "j1") == {"status": "done"}


class TestJobManager:
    def test_full_lifecycle_observable(self, tmp_path):
        store = Store(tmp_path)
        started = threading.Event()
        release = threading.Event()

        def handler(payload):
            started.set()
            release.wait(5)
            return {"echo": payload["value"]}

        manager = JobManager(store, {"check": handler}, workers=1)
        try:
            # keep the single worker busy so the next job is observably queued
            blocker_started = threading.Event()
            blocker_release = threading.Event()

            def blocker(payload):
                blocker_started.set()
                blocker_release.wait(5)
                return {}

            manager.handlers["blocker"] = blocker
            manager.submit("blocker", {})
            assert blocker_started.wait(5)

            job_id = manager.submit("check", {"value": 42})
            assert manager.get(job_id)["status"] == "queued"

            blocker_release.set()
            assert started.wait(5)
            assert manager.get(job_id)["status"] == "running"

            release.set()
            deadline = time.monotonic() + 5
            while manager.get(job_id)["status"] != "done":
                assert time.monotonic() < deadline
                time.sleep(0.01)
            job = manager.get(job_id)
            assert job["result"] == {"echo": 42}
        finally:
            release.set()
            blocker_release.set()
            manager.shutdown()

    def test_failing_job(self, tmp_path):
        store = Store(tmp_path)

        def handler(payload):
            raise RuntimeError("handler blew up")

        manager = JobManager(store, {"check": handler}, workers=1)
        try:
            job_id = manager.submit("check", {})
            deadline = time.monotonic() + 5
            while manager.get(job_id)["status"] != "failed":
                assert time.monotonic() < deadline
                time.sleep(0.01)
            assert "handler blew up" in manager.get(job_id)["error"]
        finally:
            manager.shutdown()

    def test_restart_recovers_wedged_running_job(self, tmp_path):
        store = Store(tmp_path)
        # a crash mid-job: the store says running but no worker owns it
        store.put("jobs", "wedged", {
            "job_id": "wedged", "kind": "check", "status": "running",
            "created_at": "t", "payload": {}, "result": None, "error": None,
        })
        manager = JobManager(Store(tmp_path), {"check": lambda p: {}}, workers=1)
        try:
            job = manager.get("wedged")
            assert job["status"] == "failed"
            assert "interrupted" in job["error"]
        finally:
            manager.shutdown()

    def test_restart_requeues_queued_jobs(self, tmp_path):
        store = Store(tmp_path)
        store.put("jobs", "pending", {
            "job_id": "pending", "kind": "check", "status": "queued",
            "created_at": "t", "payload": {"job_id": "pending"}, "result": None, "error": None,
        })
        manager = JobManager(Store(tmp_path), {"check": lambda p: {"ran": True}}, workers=1)
        try:
            deadline = time.monotonic() + 5
            while manager.get("pending")["status"] != "done":
                assert time.monotonic() < deadline
                time.sleep(0.01)
        finally:
            manager.shutdown()

    def test_unknown_kind_rejected(self, tmp_path):
        manager = JobManager(Store(tmp_path), {"check": lambda p: {}}, workers=1)
        try:
            with pytest.raises(ValueError):
                manager.submit("mystery", {})
        finally:
            manager.shutdown()
