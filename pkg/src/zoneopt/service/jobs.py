"""In-memory background job store for optimization runs.

State transitions (queued -> running -> completed | failed) happen under a
lock, so every observer sees a consistent record. Results are kept in
memory for the lifetime of the process.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from ..orchestrate import RunConfig, UtilityRunResult, optimize_system
from ..topology import SystemModel


@dataclass
class JobRecord:
    id: str
    status: str
    system: SystemModel
    config: RunConfig
    results: Optional[list[UtilityRunResult]] = None
    error: Optional[str] = None
    wall_time_s: Optional[float] = None
    created: float = field(default_factory=time.time)

    @property
    def feasible(self) -> Optional[bool]:
        if self.results is None:
            return None
        return all(r.feasible for r in self.results)


class JobStore:
    def __init__(self, max_workers: int = 2):
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}
        self._counter = 0
        self._pool = ThreadPoolExecutor(max_workers=max_workers)
        self.latest_report: Optional[dict] = None

    def submit(self, system: SystemModel, config: RunConfig) -> str:
        with self._lock:
            self._counter += 1
            job_id = f"run-{self._counter:04d}"
            self._jobs[job_id] = JobRecord(
                id=job_id, status="queued", system=system, config=config
            )
        self._pool.submit(self._execute, job_id)
        return job_id

    def get(self, job_id: str) -> Optional[JobRecord]:
        with self._lock:
            return self._jobs.get(job_id)

    def list(self) -> list[JobRecord]:
        with self._lock:
            return sorted(self._jobs.values(), key=lambda j: j.id)

    def shutdown(self):
        self._pool.shutdown(wait=False, cancel_futures=True)

    def _execute(self, job_id: str):
        with self._lock:
            job = self._jobs[job_id]
            job.status = "running"
        started = time.perf_counter()
        try:
            results = optimize_system(job.system, job.config)
        except Exception as exc:  # surfaced via the status endpoint
            with self._lock:
                job.status = "failed"
                job.error = str(exc)
            return
        with self._lock:
            job.results = results
            job.wall_time_s = time.perf_counter() - started
            job.status = "completed"
