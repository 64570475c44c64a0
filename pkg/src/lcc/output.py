"""Atomic CSV/text emission with deterministic float formatting."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .sim import SimulationTrace

__all__ = [
    "fmt",
    "write_text_atomic",
    "write_csv_atomic",
    "write_trace_csv",
    "write_events_csv",
]


def fmt(value) -> str:
    """Deterministic cell formatting: floats via %.12g, None blank."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_text_atomic(path, text: str) -> Path:
    """Write via a temp file and rename, so readers never see a torn file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv_atomic(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    return write_text_atomic(path, "\n".join(lines) + "\n")


def write_trace_csv(path, trace: SimulationTrace) -> Path:
    """One row per (step, vehicle): t,vehicle,pos,vel,acc,spacing."""

    def rows():
        for k, t in enumerate(trace.times):
            for j, vid in enumerate(trace.ids):
                yield (
                    float(t),
                    vid,
                    float(trace.position[k, j]),
                    float(trace.velocity[k, j]),
                    float(trace.acceleration[k, j]),
                    float(trace.spacing[k, j]),
                )

    return write_csv_atomic(path, ("t", "vehicle", "pos", "vel", "acc", "spacing"), rows())


def write_events_csv(path, trace: SimulationTrace) -> Path:
    return write_csv_atomic(
        path,
        ("t", "vehicle", "event"),
        ((float(t), vid, label) for t, vid, label in trace.events),
    )
