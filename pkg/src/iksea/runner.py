"""Parallel sweep execution and run-manifest bookkeeping.

Grid points are independent, so they are dispatched to a thread pool (the
heavy lifting happens inside numpy/LAPACK which releases the GIL).  Results
are re-assembled in submission order no matter when workers finish, and
per-point failures are captured rather than aborting the whole sweep.
Dense-oracle jobs at N >= 12 are forced through a serial lane to bound peak
memory.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import ConfigError, IkseaError

__all__ = ["resolve_workers", "run_grid", "sha256_file", "Manifest",
            "WORKERS_ENV"]

WORKERS_ENV = "IKSEA_WORKERS"

#: dense jobs at or above this size never run concurrently
SERIAL_DENSE_N = 12


def resolve_workers(flag: Optional[int] = None) -> int:
    """Worker budget: --workers flag > IKSEA_WORKERS env > cpu count."""
    if flag is not None:
        if flag < 1:
            raise ConfigError(f"--workers must be >= 1, got {flag}")
        return int(flag)
    env = os.environ.get(WORKERS_ENV)
    if env is not None and env.strip():
        try:
            val = int(env)
        except ValueError as exc:
            raise ConfigError(
                f"{WORKERS_ENV}={env!r} is not an integer") from exc
        if val < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {val}")
        return val
    return os.cpu_count() or 1


def run_grid(fn: Callable, items: Sequence, workers: int,
             serial: Optional[Callable[[object], bool]] = None
             ) -> List[Tuple[str, object]]:
    """Order-restoring parallel map with per-item failure capture.

    Returns one ("ok", value) or ("error", exception) pair per item, in the
    input order.  Items for which serial(item) is true are executed on the
    main thread after the parallel batch (memory-heavy dense jobs).
    """
    results: List[Optional[Tuple[str, object]]] = [None] * len(items)

    def run_one(i):
        try:
            results[i] = ("ok", fn(items[i]))
        except IkseaError as exc:
            results[i] = ("error", exc)

    parallel_idx = [i for i, it in enumerate(items)
                    if serial is None or not serial(it)]
    serial_idx = [i for i in range(len(items)) if i not in set(parallel_idx)]

    if workers <= 1 or len(parallel_idx) <= 1:
        for i in parallel_idx:
            run_one(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_one, parallel_idx))
    for i in serial_idx:
        run_one(i)
    return results  # type: ignore[return-value]


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Manifest:
    """Collects run metadata and writes <prefix>_manifest.json.

    The manifest is the only emitted file containing timestamps; data files
    stay byte-reproducible across runs.
    """

    def __init__(self, command: str, config_text: str, seed: int,
                 workers: int, version: str):
        self.command = command
        self.config_text = config_text
        self.seed = seed
        self.workers = workers
        self.version = version
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        self.tasks: List[dict] = []
        self.outputs: List[dict] = []

    def task(self, name: str, status: str, detail: str = "") -> None:
        self.tasks.append({"name": name, "status": status, "detail": detail})

    def output(self, path: str) -> None:
        self.outputs.append({
            "path": os.path.basename(path),
            "sha256": sha256_file(path),
            "bytes": os.path.getsize(path),
        })

    def write(self, out_dir: str, prefix: str) -> str:
        body = {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "workers": self.workers,
            "started": self.started,
            "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "config": self.config_text,
            "tasks": self.tasks,
            "outputs": self.outputs,
        }
        path = os.path.join(out_dir, f"{prefix}_manifest.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(body, fh, indent=1, sort_keys=False)
            fh.write("\n")
        return path
