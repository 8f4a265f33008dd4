"""Append-only JSON-lines store of variational results."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from typing import Optional

from ..systems import ParticleSystem, canonicalize
from ..varsolve.solver import SolverConfig, VariationalResult, svm_optimize


class CacheCollision(RuntimeError):
    pass


def system_key(sys: ParticleSystem) -> dict:
    c = canonicalize(sys)
    return {"x": [float(v) for v in c.x], "q": [float(v) for v in c.q]}


def cache_key(sys: ParticleSystem, config: SolverConfig) -> str:
    blob = json.dumps({"system": system_key(sys), "config": config.to_record()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _plain(obj):
    return json.loads(json.dumps(obj))


class RunCache:
    """Results keyed by (canonical system, solver configuration).

    Floats go through ``json`` with shortest round-trip repr, so a hit returns
    the stored energy bit for bit.  Reads are lock-free after loading; writes
    append one line under a lock.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._lock = threading.Lock()
        self._store: dict[str, dict] = {}
        self.hits = 0
        self.misses = 0
        if path and os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        rec = json.loads(line)
                        self._store[rec["key"]] = rec

    def __len__(self) -> int:
        return len(self._store)

    def get(self, sys: ParticleSystem, config: SolverConfig) -> Optional[VariationalResult]:
        key = cache_key(sys, config)
        rec = self._store.get(key)
        if rec is None:
            return None
        if rec["system"] != system_key(sys) or rec["config"] != _plain(config.to_record()):
            raise CacheCollision(f"key {key[:12]} maps to a different run")
        return VariationalResult.from_record(rec["result"])

    def put(self, sys: ParticleSystem, config: SolverConfig, result: VariationalResult) -> None:
        key = cache_key(sys, config)
        rec = {"key": key, "system": system_key(sys), "config": config.to_record(), "result": result.to_record()}
        # normalize tuples to lists so later comparisons see what a reload sees
        rec = _plain(rec)
        with self._lock:
            if key in self._store:
                return
            self._store[key] = rec
            if self.path:
                with open(self.path, "a") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def get_or_solve(self, sys: ParticleSystem, config: SolverConfig) -> VariationalResult:
        hit = self.get(sys, config)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        res = svm_optimize(canonicalize(sys), config)
        # hand back exactly what a later hit would return
        res = VariationalResult.from_record(_plain(res.to_record()))
        self.put(sys, config, res)
        return res
