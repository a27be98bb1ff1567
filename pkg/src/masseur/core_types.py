"""Shared value types and the trace CSV format.

Coordinates follow the massage-axis convention: world Z points up, the
approach coordinate ``s = z_surface - z_tip`` is positive when the tip is
inside the tissue. Rotations are stored in degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np

CSV_HEADER = "t,fz,fy,x,y,z,rx,ry,rz"
CSV_FIELDS = CSV_HEADER.split(",")
POSE_FIELDS = ("x", "y", "z", "rx", "ry", "rz")

PathLike = Union[str, Path]


class TraceFormatError(ValueError):
    """Malformed trace CSV; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyTrace(ValueError):
    pass


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    rx: float = 0.0
    ry: float = 0.0
    rz: float = 0.0

    def __post_init__(self):
        for name in POSE_FIELDS:
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"pose.{name} must be finite, got {v!r}")
        for name in ("rx", "ry", "rz"):
            if abs(getattr(self, name)) > 360.0:
                raise ValueError(f"pose.{name} must lie in [-360, 360] degrees")

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z, self.rx, self.ry, self.rz)


@dataclass(frozen=True)
class ForceSample:
    t: float
    fz: float
    fy: float = 0.0


@dataclass(frozen=True, eq=False)
class ForceTrace:
    """Uniformly sampled contact force plus the commanded pose at each tick.

    Stored column-wise; ``poses`` is an ``(N, 6)`` array ordered as
    :data:`POSE_FIELDS`. Construction does not validate, use
    :func:`validate_trace` for that.
    """

    sample_rate: float
    t: np.ndarray
    fz: np.ndarray
    fy: np.ndarray
    poses: np.ndarray

    @classmethod
    def from_samples(cls, sample_rate: float, samples: Sequence[ForceSample],
                     poses: Sequence[Pose]) -> "ForceTrace":
        return cls(
            sample_rate=float(sample_rate),
            t=np.array([s.t for s in samples], dtype=float),
            fz=np.array([s.fz for s in samples], dtype=float),
            fy=np.array([s.fy for s in samples], dtype=float),
            poses=np.array([p.as_tuple() for p in poses], dtype=float).reshape(-1, 6),
        )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> list:
        return [ForceSample(t, fz, fy) for t, fz, fy in
                zip(self.t.tolist(), self.fz.tolist(), self.fy.tolist())]

    @property
    def pose_list(self) -> list:
        return [Pose(*row) for row in self.poses.tolist()]

    def column(self, name: str) -> np.ndarray:
        if name in ("t", "fz", "fy"):
            return getattr(self, name)
        return self.poses[:, POSE_FIELDS.index(name)]

    def window(self, t0: Optional[float] = None, t1: Optional[float] = None) -> "ForceTrace":
        """Sub-trace with ``t0 <= t < t1``; either bound may be ``None``."""
        mask = np.ones(len(self.t), dtype=bool)
        if t0 is not None:
            mask &= self.t >= t0 - 1e-12
        if t1 is not None:
            mask &= self.t < t1 - 1e-12
        return ForceTrace(self.sample_rate, self.t[mask], self.fz[mask],
                          self.fy[mask], self.poses[mask])


def validate_trace(trace: ForceTrace) -> Optional[str]:
    """Return ``None`` if every trace invariant holds, else the first violation."""
    n = len(trace.t)
    if not (len(trace.fz) == len(trace.fy) == n):
        return "force columns differ in length"
    if trace.poses.shape != (n, 6):
        return f"poses shape {trace.poses.shape} does not match {n} samples"
    if n < 2:
        return f"trace has {n} samples, need at least 2"
    if not (math.isfinite(trace.sample_rate) and trace.sample_rate > 0):
        return f"sample_rate must be positive, got {trace.sample_rate!r}"
    dt = 1.0 / trace.sample_rate
    for name, col in (("t", trace.t), ("fz", trace.fz), ("fy", trace.fy)):
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            return f"non-finite {name} at index {bad[0]}"
    bad = np.flatnonzero(~np.isfinite(trace.poses).all(axis=1))
    if bad.size:
        return f"non-finite pose at index {bad[0]}"
    if trace.t[0] < 0:
        return "negative t at index 0"
    steps = np.diff(trace.t)
    bad = np.flatnonzero(steps <= 0)
    if bad.size:
        return f"non-increasing t at index {bad[0] + 1}"
    bad = np.flatnonzero(np.abs(steps - dt) >= 1e-9)
    if bad.size:
        return f"non-uniform spacing at index {bad[0] + 1}"
    bad = np.flatnonzero(trace.fz < 0)
    if bad.size:
        return f"negative fz at index {bad[0]}"
    bad = np.flatnonzero(np.abs(trace.poses[:, 3:]) > 360.0)
    if bad.size:
        return f"rotation outside [-360, 360] at index {bad[0]}"
    return None


def _fmt(v: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(v))


def write_trace_csv(trace: ForceTrace, path: PathLike) -> None:
    if len(trace.t) == 0:
        raise EmptyTrace("cannot export an empty trace")
    path = Path(path)
    cols = [trace.t, trace.fz, trace.fy] + [trace.poses[:, j] for j in range(6)]
    rows = zip(*(c.tolist() for c in cols))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc.strerror or exc}") from exc


def _iter_rows(fh) -> Iterator[tuple]:
    for lineno, line in enumerate(fh, start=1):
        yield lineno, line.rstrip("\n").rstrip("\r")


def read_trace_csv(path: PathLike, sample_rate: Optional[float] = None) -> ForceTrace:
    """Parse a trace CSV. The sample rate is inferred from the time column
    unless given explicitly."""
    path = Path(path)
    rows = []
    with open(path, encoding="utf-8") as fh:
        it = _iter_rows(fh)
        try:
            _, header = next(it)
        except StopIteration:
            raise TraceFormatError(1, "empty file, expected header") from None
        if header.strip() != CSV_HEADER:
            raise TraceFormatError(1, f"expected header {CSV_HEADER!r}")
        for lineno, line in it:
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != len(CSV_FIELDS):
                raise TraceFormatError(lineno, f"expected {len(CSV_FIELDS)} fields, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise TraceFormatError(lineno, "non-numeric field") from None
    if not rows:
        raise EmptyTrace(f"{path}: no samples")
    data = np.array(rows, dtype=float)
    t = data[:, 0]
    if sample_rate is None:
        if len(t) < 2 or t[-1] <= t[0]:
            raise TraceFormatError(len(rows) + 1, "need two increasing timestamps to infer sample rate")
        sample_rate = float(f"{(len(t) - 1) / (t[-1] - t[0]):.9g}")
    return ForceTrace(sample_rate, t, data[:, 1], data[:, 2], data[:, 3:9].copy())
