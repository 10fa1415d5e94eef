"""On-disk corpus: ``<root>/<origin>/<hash>.bin`` plus ``<root>/layout.json``."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from ..ir.layout import BufferLayout
from .testcase import LayoutMismatch, TestCase

log = logging.getLogger(__name__)

LAYOUT_FILE = "layout.json"


def write_layout(root: Path, layout: BufferLayout) -> None:
    root.mkdir(parents=True, exist_ok=True)
    (root / LAYOUT_FILE).write_text(json.dumps(layout.describe(), indent=2, sort_keys=True) + "\n")


def save_test(root: str | Path, test: TestCase, subdir: str | None = None) -> Path:
    root = Path(root)
    if not (root / LAYOUT_FILE).exists():
        write_layout(root, test.layout)
    folder = root / (subdir or test.origin)
    folder.mkdir(parents=True, exist_ok=True)
    path = folder / f"{test.digest}.bin"
    if not path.exists():
        path.write_bytes(test.data)
    return path


def save_corpus(root: str | Path, tests, subdir: str | None = None) -> list[Path]:
    root = Path(root)
    if tests:
        write_layout(root, tests[0].layout)
    return [save_test(root, t, subdir) for t in tests]


def check_layout(root: Path, layout: BufferLayout) -> None:
    path = root / LAYOUT_FILE
    if not path.exists():
        return
    stored = json.loads(path.read_text())
    if stored != json.loads(json.dumps(layout.describe())):
        raise LayoutMismatch(f"{path} describes a different input layout than the model")


def load_corpus(root: str | Path, layout: BufferLayout) -> list[TestCase]:
    """All ``*.bin`` files below ``root`` in a stable (sorted path) order."""
    root = Path(root)
    if not root.exists():
        return []
    check_layout(root, layout)
    tests = []
    for path in sorted(root.rglob("*.bin")):
        data = path.read_bytes()
        if len(data) != layout.total_bytes:
            raise LayoutMismatch(f"{path}: {len(data)} bytes, layout needs {layout.total_bytes}")
        origin = path.parent.name if path.parent != root else "random"
        tests.append(TestCase(data, layout, origin=origin))
    log.debug("loaded %d corpus files from %s", len(tests), root)
    return tests
