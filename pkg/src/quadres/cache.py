"""Append-only CSV cache of evaluated L-value records.

One file per (sigma, method) pair under the cache directory, plus an
index.json sidecar holding expected row counts.  CSV was chosen over a
binary format so cached values stay auditable with a pager; values are
written as shortest round-trip decimals, so a load reproduces them exactly.

A file that fails to parse, or whose row count disagrees with the sidecar,
is dropped and rebuilt with a warning; the cache never poisons results.
Files are single-writer, many-reader.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

from .lfunc import CSV_HEADER, LValueRecord


def params_hash(parts: dict) -> str:
    """Stable short hash of the evaluation parameters (budget, cut lengths,
    anything that changes the value)."""
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


class LValueCache:
    def __init__(self, cache_dir: str | Path):
        self.root = Path(cache_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self._tables: dict[str, dict[tuple[int, str], LValueRecord]] = {}
        self._index = self._load_index()

    # -- layout ------------------------------------------------------------

    def _index_path(self) -> Path:
        return self.root / "index.json"

    @staticmethod
    def _file_key(sigma: float, method: str) -> str:
        return f"lv_{method}_s{sigma!r}.csv"

    def _load_index(self) -> dict:
        try:
            with open(self._index_path()) as fh:
                idx = json.load(fh)
            if not isinstance(idx, dict):
                raise ValueError("index is not a mapping")
            return idx
        except FileNotFoundError:
            return {}
        except (ValueError, OSError):
            print("warning: cache index unreadable; rebuilding", file=sys.stderr)
            return {}

    def _save_index(self):
        with open(self._index_path(), "w") as fh:
            json.dump(self._index, fh, sort_keys=True)

    # -- table loading -----------------------------------------------------

    def _table(self, fkey: str) -> dict[tuple[int, str], LValueRecord]:
        if fkey in self._tables:
            return self._tables[fkey]
        path = self.root / fkey
        table: dict[tuple[int, str], LValueRecord] = {}
        if path.exists():
            try:
                with open(path) as fh:
                    lines = fh.read().splitlines()
                if lines and lines[0] != CSV_HEADER + ",params_hash":
                    raise ValueError("bad header")
                for line in lines[1:]:
                    rec_part, _, ph = line.rpartition(",")
                    rec = LValueRecord.from_csv_row(rec_part)
                    table[(rec.d, ph)] = rec
                expected = self._index.get(fkey)
                if expected is not None and expected != len(lines) - 1:
                    raise ValueError(
                        f"row count {len(lines) - 1} != index {expected}"
                    )
            except (ValueError, OSError) as exc:
                print(
                    f"warning: cache file {fkey} corrupt ({exc}); rebuilding",
                    file=sys.stderr,
                )
                table = {}
                path.unlink(missing_ok=True)
                self._index.pop(fkey, None)
                self._save_index()
        self._tables[fkey] = table
        return table

    # -- API -----------------------------------------------------------------

    def get(self, d: int, sigma: float, method: str, ph: str) -> LValueRecord | None:
        return self._table(self._file_key(sigma, method)).get((d, ph))

    def put(self, record: LValueRecord, ph: str):
        fkey = self._file_key(record.sigma, record.method)
        table = self._table(fkey)
        if (record.d, ph) in table:
            return
        path = self.root / fkey
        new_file = not path.exists()
        with open(path, "a") as fh:
            if new_file:
                fh.write(CSV_HEADER + ",params_hash\n")
            fh.write(record.csv_row() + f",{ph}\n")
        table[(record.d, ph)] = record
        self._index[fkey] = self._index.get(fkey, 0) + 1
        self._save_index()

    def put_many(self, records, ph: str):
        """Bulk append with one index write."""
        by_file: dict[str, list[LValueRecord]] = {}
        for rec in records:
            by_file.setdefault(self._file_key(rec.sigma, rec.method), []).append(rec)
        for fkey, recs in by_file.items():
            table = self._table(fkey)
            fresh = [r for r in recs if (r.d, ph) not in table]
            if not fresh:
                continue
            path = self.root / fkey
            new_file = not path.exists()
            with open(path, "a") as fh:
                if new_file:
                    fh.write(CSV_HEADER + ",params_hash\n")
                for rec in fresh:
                    fh.write(rec.csv_row() + f",{ph}\n")
                    table[(rec.d, ph)] = rec
            self._index[fkey] = self._index.get(fkey, 0) + len(fresh)
        self._save_index()
