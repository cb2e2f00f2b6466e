"""Local persistence helpers for verification results."""

from __future__ import annotations

import json
import shutil
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from .utils import ensure_directory


def _safe_name(stem: str) -> str:
    return "".join(ch if ch.isalnum() or ch in {"-", "_", "."} else "-" for ch in stem)


class ResultStore:
    """Writes CSV tables and JSON summaries under one directory.

    Nothing time- or host-dependent is written, so the same run produces the
    same bytes.
    """

    def __init__(self, base_path: Path | str = "results") -> None:
        self.base_path = Path(base_path)
        self.table_dir = self.base_path / "tables"
        self.summary_dir = self.base_path / "summaries"
        ensure_directory(self.table_dir)
        ensure_directory(self.summary_dir)
        self.index_path = self.base_path / "index.json"
        if not self.index_path.exists():
            self._write_index([])

    def save_table(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.table_dir / f"{_safe_name(name)}.csv"
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n", encoding="utf-8")
        self._record(name, "table", path)
        return path

    def save_summary(self, name: str, payload: Dict) -> Path:
        path = self.summary_dir / f"{_safe_name(name)}.json"
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps(payload))
        self._record(name, "summary", path)
        return path

    def load_summary(self, name: str) -> Optional[Dict]:
        path = self.summary_dir / f"{_safe_name(name)}.json"
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)

    def list_artifacts(self) -> List[Dict]:
        return self._read_index()

    def _record(self, name: str, kind: str, path: Path) -> None:
        entries = [item for item in self._read_index() if not (item.get("name") == name and item.get("kind") == kind)]
        entries.append({"name": name, "kind": kind, "path": path.relative_to(self.base_path).as_posix()})
        entries.sort(key=lambda item: (item["kind"], item["name"]))
        self._write_index(entries)

    def _read_index(self) -> List[Dict]:
        if not self.index_path.exists():
            return []
        with open(self.index_path, "r", encoding="utf-8") as handle:
            try:
                return json.load(handle)
            except json.JSONDecodeError:
                return []

    def _write_index(self, entries: List[Dict]) -> None:
        ensure_directory(self.base_path)
        with open(self.index_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps(entries))

    def clear(self) -> None:
        for directory in (self.table_dir, self.summary_dir):
            if directory.exists():
                shutil.rmtree(directory)
            ensure_directory(directory)
        self._write_index([])


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
