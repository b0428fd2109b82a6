"""Suites on disk: a directory of `.litmus` files plus a `suite.json` index."""

from __future__ import annotations

import json
from pathlib import Path

from .axb import LitmusTest
from .litmus_io import parse_litmus, serialize_litmus


def save_suite(
    tests,
    out_dir: str | Path,
    lts_sizes=None,
) -> Path:
    """Write one file per test and the index; returns the index path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, test in enumerate(tests):
        fname = f"{test.name}.litmus"
        (out / fname).write_text(serialize_litmus(test), encoding="utf-8")
        entry = {"name": test.name, "file": fname}
        if lts_sizes is not None:
            entry["states"], entry["actions"] = lts_sizes[i]
        entries.append(entry)
    index = out / "suite.json"
    index.write_text(
        json.dumps({"tests": entries}, indent=2) + "\n", encoding="utf-8"
    )
    return index


def load_suite(suite_dir: str | Path) -> list[LitmusTest]:
    """Read a suite back, in index order (or sorted filenames without one)."""
    root = Path(suite_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"not a suite directory: {root}")
    index = root / "suite.json"
    if index.is_file():
        entries = json.loads(index.read_text(encoding="utf-8"))["tests"]
        files = [root / e["file"] for e in entries]
    else:
        files = sorted(root.glob("*.litmus"))
    if not files:
        return []
    return [parse_litmus(f.read_text(encoding="utf-8")) for f in files]
