"""Deterministic artifact emission: CSV/JSON writers, SVG heatmap, manifest.

Floats are serialized with shortest round-trip repr, so recomputing measures
from an emitted matrix reproduces them bit-exactly.  Every run writes a
manifest echoing the resolved configuration, per-stage wall-clock and peak
RSS, and a sha256 digest of each output file.
"""

from __future__ import annotations

import hashlib
import json
import resource
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__


def _code_digest() -> str:
    """sha256 over this package's source files, for run provenance."""
    h = hashlib.sha256()
    root = Path(__file__).parent
    for path in sorted(root.rglob("*.py")):
        h.update(path.relative_to(root).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path: str | Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_matrix_csv(path: str | Path, r: np.ndarray, labels: list[str]) -> None:
    """Rows are trained-through tasks, columns evaluated tasks."""
    t = r.shape[0]
    if len(labels) != t:
        raise ValueError("label count does not match matrix size")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("trained_through," + ",".join(labels) + "\n")
        for i in range(t):
            fh.write(labels[i] + "," + ",".join(repr(float(x)) for x in r[i]) + "\n")


def read_matrix_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    labels = lines[0].split(",")[1:]
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        rows.append([float(x) for x in line.split(",")[1:]])
    r = np.array(rows, dtype=np.float64)
    if r.shape[0] != len(labels) or (r.size and r.shape[1] != len(labels)):
        raise ValueError(f"{path}: matrix is not square")
    return r, labels


def write_histogram_csv(path: str | Path, hist: list[tuple[int, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("value,count\n")
        for value, count in hist:
            fh.write(f"{value},{count}\n")


def _heat_color(value: float) -> str:
    """Dark blue (0.0) to warm yellow (1.0)."""
    v = min(max(float(value), 0.0), 1.0)
    r = int(40 + 215 * v)
    g = int(40 + 180 * v)
    b = int(90 + 40 * (1.0 - v))
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_heatmap(r: np.ndarray, labels: list[str], title: str = "") -> str:
    """Self-contained SVG accuracy heatmap; cell text is the value to 2 decimals."""
    t = r.shape[0]
    cell, margin = 64, 110
    width = margin + t * cell + 20
    height = margin + t * cell + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="12">',
        f'<text x="{margin}" y="24" font-size="14">{title}</text>' if title else "",
        f'<text x="8" y="{margin - 30}" font-size="11">rows: trained through / cols: evaluated on</text>',
    ]
    for j, lab in enumerate(labels):
        parts.append(
            f'<text x="{margin + j * cell + cell // 2}" y="{margin - 8}" text-anchor="middle">{lab}</text>'
        )
    for i in range(t):
        parts.append(
            f'<text x="{margin - 8}" y="{margin + i * cell + cell // 2 + 4}" text-anchor="end">{labels[i]}</text>'
        )
        for j in range(t):
            x, y = margin + j * cell, margin + i * cell
            value = float(r[i, j])
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_heat_color(value)}" stroke="#ffffff"/>'
            )
            parts.append(
                f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" text-anchor="middle">'
                f"{value:.2f}</text>"
            )
    parts.append("</svg>")
    return "\n".join(p for p in parts if p)


class Manifest:
    """Collects stage timings and output digests for one run."""

    def __init__(self, command: str, config: dict):
        self.data = {
            "command": command,
            "config": config,
            "format": 1,
            "version": __version__,
            "code_digest": _code_digest(),
            "stages": {},
            "outputs": {},
        }

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.data["stages"][name] = {
                "wall_seconds": time.perf_counter() - start,
                "peak_rss_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
            }

    def record_output(self, path: str | Path) -> None:
        self.data["outputs"][Path(path).name] = sha256_file(path)

    def write(self, out_dir: str | Path) -> Path:
        path = Path(out_dir) / "manifest.json"
        write_json(path, self.data)
        return path
