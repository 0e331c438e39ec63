"""Content-addressed period cache (one JSON file per point and config).

Keys are SHA-256 digests of the canonical point, quadrature config and
ordering direction.  Writes go through a temporary file and ``os.replace``
under an exclusive lock, so readers never see partial files.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

from .curve_family import FamilyPoint
from .errors import SchemaError
from .jsonio import dumps, period_data_from_json, period_data_to_json
from .periods import PeriodData, periods_at
from .quadrature import DEFAULT_CONFIG, QuadratureConfig


def cache_key(p: FamilyPoint, cfg: QuadratureConfig, direction: complex = 1.0) -> str:
    d = complex(direction)
    blob = json.dumps(
        {"point": p.key(), "config": cfg.to_json(), "direction": [d.real, d.imag]},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode()).hexdigest()


class PeriodCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    @contextmanager
    def _lock(self):
        with open(self.root / ".lock", "a+") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def get(self, key: str) -> PeriodData | None:
        path = self.path(key)
        if not path.exists():
            return None
        try:
            return period_data_from_json(json.loads(path.read_text()))
        except (json.JSONDecodeError, SchemaError):
            return None

    def put(self, key: str, pd: PeriodData) -> None:
        path = self.path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock():
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                fh.write(dumps(period_data_to_json(pd)))
            os.replace(tmp, path)

    def periods(self, p: FamilyPoint, cfg: QuadratureConfig = DEFAULT_CONFIG, direction: complex = 1.0) -> PeriodData:
        key = cache_key(p, cfg, direction)
        pd = self.get(key)
        if pd is not None:
            self.hits += 1
            return pd
        self.misses += 1
        pd = periods_at(p, cfg, direction)
        self.put(key, pd)
        return pd
