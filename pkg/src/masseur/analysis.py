"""Time- and frequency-domain characterization of force traces.

Seven numbers per trace: max, min, mean, population std, Fisher-Pearson
skewness g1, excess kurtosis g2 and the dominant spectral frequency.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .core_types import ForceTrace, PathLike, read_trace_csv

MIN_SAMPLES = 16
DC_GUARD_HZ = 0.05
STAT_FIELDS = ("max", "min", "mean", "std", "skew", "kurt", "freq")

Window = Optional[Tuple[Optional[float], Optional[float]]]


class TooFewSamples(ValueError):
    pass


class ZeroVariance(ValueError):
    """Signal has no AC content. ``stats`` carries what could be computed."""

    def __init__(self, message: str, stats: Optional["TraceStats"] = None):
        super().__init__(message)
        self.stats = stats


class UnknownTechnique(KeyError):
    pass


@dataclass(frozen=True)
class TraceStats:
    max: float
    min: float
    mean: float
    std: float
    skew: Optional[float]
    kurt: Optional[float]
    freq: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "TraceStats":
        missing = [k for k in STAT_FIELDS if k not in d]
        if missing:
            raise KeyError(f"stats missing fields: {', '.join(missing)}")
        return cls(**{k: (None if d[k] is None else float(d[k])) for k in STAT_FIELDS})


read_trace = read_trace_csv


def _select(trace: ForceTrace, window: Window) -> ForceTrace:
    if window is None:
        return trace
    t0, t1 = window
    return trace.window(t0, t1)


def _is_constant(x: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(x))))
    return float(np.ptp(x)) <= 1e-12 * scale


def moments(x: np.ndarray) -> Tuple[float, float, Optional[float], Optional[float]]:
    """Two-pass population moments: mean, std, g1, g2 (``None`` when constant)."""
    x = np.asarray(x, dtype=float)
    mean = float(np.mean(x))
    d = x - mean
    m2 = float(np.mean(d * d))
    std = math.sqrt(m2)
    if _is_constant(x) or m2 == 0.0:
        return mean, std, None, None
    m3 = float(np.mean(d * d * d))
    m4 = float(np.mean((d * d) * (d * d)))
    return mean, std, m3 / m2 ** 1.5, m4 / (m2 * m2) - 3.0


def magnitude_spectrum(x: np.ndarray, sample_rate: float) -> Tuple[np.ndarray, np.ndarray]:
    """Hann-windowed, mean-removed magnitude spectrum, zero-padded to a power of two."""
    x = np.asarray(x, dtype=float)
    if len(x) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {len(x)}")
    n = len(x)
    nfft = 1 << (n - 1).bit_length()
    xw = (x - x.mean()) * np.hanning(n)
    mag = np.abs(np.fft.rfft(xw, nfft))
    freqs = np.fft.rfftfreq(nfft, d=1.0 / sample_rate)
    return freqs, mag


def peak_frequency(x: np.ndarray, sample_rate: float, min_freq: float = DC_GUARD_HZ) -> float:
    """Largest spectral peak above ``min_freq``, refined by fitting a parabola
    to the log magnitudes of the peak bin and its two neighbours."""
    x = np.asarray(x, dtype=float)
    if len(x) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {len(x)}")
    if _is_constant(x):
        raise ZeroVariance("signal has no AC content")
    freqs, mag = magnitude_spectrum(x, sample_rate)
    above = freqs > min_freq
    if not above.any():
        raise TooFewSamples("window too short to resolve anything above the DC guard")
    # a bin on the guard edge whose lower neighbour is larger is leakage from DC
    local_max = np.zeros_like(above)
    local_max[1:-1] = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:])
    candidates = np.flatnonzero(above & local_max)
    if candidates.size == 0:
        candidates = np.flatnonzero(above)
    k = int(candidates[np.argmax(mag[candidates])])
    df = freqs[1] - freqs[0]
    if 0 < k < len(mag) - 1 and mag[k - 1] > 0 and mag[k + 1] > 0:
        a, b, g = np.log(mag[k - 1]), np.log(mag[k]), np.log(mag[k + 1])
        denom = a - 2.0 * b + g
        offset = 0.5 * (a - g) / denom if denom != 0 else 0.0
        return float((k + offset) * df)
    return float(k * df)


def dominant_frequency(trace: ForceTrace, window: Window = None, column: str = "fz") -> float:
    sel = _select(trace, window)
    return peak_frequency(sel.column(column), trace.sample_rate)


def trace_stats(trace: ForceTrace, window: Window = None) -> TraceStats:
    """Characterize ``fz`` inside ``window`` (``t0 <= t < t1``).

    Raises :class:`ZeroVariance` for a constant signal; the exception's
    ``stats`` has max/min/mean/std filled and the rest ``None``.
    """
    fz = _select(trace, window).fz
    if len(fz) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples in window, got {len(fz)}")
    mean, std, skew, kurt = moments(fz)
    base = TraceStats(float(fz.max()), float(fz.min()), mean, std, None, None, None)
    if skew is None:
        raise ZeroVariance("constant force signal: skew, kurtosis and frequency undefined", base)
    freq = peak_frequency(fz, trace.sample_rate)
    return replace(base, skew=skew, kurt=kurt, freq=freq)


def export_spectrum(trace: ForceTrace, window: Window, path: PathLike, column: str = "fz") -> None:
    sel = _select(trace, window)
    freqs, mag = magnitude_spectrum(sel.column(column), trace.sample_rate)
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("freq_hz,magnitude\n")
            for f, m in zip(freqs.tolist(), mag.tolist()):
                fh.write(f"{f!r},{m!r}\n")
    except OSError as exc:
        raise OSError(f"cannot write spectrum to {path}: {exc.strerror or exc}") from exc


def read_spectrum(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float)
    return data[:, 0], data[:, 1]


# --- reference tables ---------------------------------------------------------

REFERENCE: Dict[Tuple[str, str], TraceStats] = {
    ("beat", "expert"): TraceStats(79.67, 0.00, 64.90, 12.17, -4.19, 21.78, 2.79),
    ("press", "expert"): TraceStats(42.59, 8.20, 15.64, 6.67, -0.62, -1.07, 0.14),
    ("push", "expert"): TraceStats(81.65, 0.00, 28.94, 9.02, 0.11, -0.16, 0.36),
    ("vibrate", "expert"): TraceStats(25.74, 14.39, 20.07, 2.80, -0.13, -0.04, 7.49),
    ("beat", "robot"): TraceStats(76.67, 0.00, 8.45, 18.02, 1.99, 2.73, 1.00),
    ("press", "robot"): TraceStats(43.22, 8.50, 31.72, 13.92, -0.78, -1.24, 0.19),
    ("push", "robot"): TraceStats(82.83, 0.00, 27.51, 27.78, 0.34, -1.26, 0.88),
    ("vibrate", "robot"): TraceStats(26.96, 12.69, 19.16, 4.18, 0.09, -1.52, 7.33),
}


def reference_stats(technique: str, which: str) -> TraceStats:
    key = (technique.lower(), which.lower())
    if key not in REFERENCE:
        if which.lower() not in ("expert", "robot"):
            raise UnknownTechnique(f"unknown reference {which!r}; expected expert or robot")
        raise UnknownTechnique(f"unknown technique {technique!r}")
    return REFERENCE[key]


@dataclass(frozen=True)
class Tolerance:
    """``kind`` is ``"rel"`` (|delta| <= value*|ref|), ``"abs"`` (|delta| <= value)
    or ``"sign"`` (same sign as the reference)."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rel", "abs", "sign"):
            raise ValueError(f"tolerance kind must be rel, abs or sign, got {self.kind!r}")
        if self.kind != "sign" and not (self.value >= 0):
            raise ValueError(f"tolerance value must be >= 0, got {self.value!r}")

    @classmethod
    def parse(cls, text: str) -> Optional["Tolerance"]:
        """``"rel:0.15"``, ``"abs:0.15"``, ``"sign"`` or ``"none"``."""
        text = text.strip().strip('"').lower()
        if text in ("none", ""):
            return None
        if text == "sign":
            return cls("sign")
        kind, _, value = text.partition(":")
        try:
            return cls(kind.strip(), float(value))
        except ValueError:
            raise ValueError(f"bad tolerance {text!r}; use rel:X, abs:X, sign or none") from None

    def check(self, value: float, ref: float) -> bool:
        delta = value - ref
        if self.kind == "rel":
            return bool(abs(delta) <= self.value * abs(ref))
        if self.kind == "abs":
            return bool(abs(delta) <= self.value)
        return bool(np.sign(value) == np.sign(ref))

    def __str__(self) -> str:
        return "sign" if self.kind == "sign" else f"{self.kind}:{self.value:g}"


DEFAULT_TOLERANCES: Dict[str, Optional[Tolerance]] = {
    "max": Tolerance("rel", 0.15),
    "min": Tolerance("rel", 0.15),
    "mean": Tolerance("rel", 0.15),
    "std": None,
    "skew": Tolerance("sign"),
    "kurt": Tolerance("sign"),
    "freq": Tolerance("abs", 0.15),
}


@dataclass(frozen=True)
class FieldComparison:
    value: Optional[float]
    ref: float
    delta: Optional[float]
    rel_delta: Optional[float]
    passed: Optional[bool]  # None when the field is not toleranced


@dataclass(frozen=True)
class ComparisonReport:
    technique: str
    reference: str
    fields: Dict[str, FieldComparison] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.fields.values())

    @property
    def failed_fields(self) -> list:
        return [k for k, c in self.fields.items() if c.passed is False]

    def as_dict(self) -> dict:
        return {
            "technique": self.technique,
            "reference": self.reference,
            "fields": {
                k: {"value": c.value, "ref": c.ref, "delta": c.delta,
                    "rel_delta": c.rel_delta, "pass": c.passed}
                for k, c in self.fields.items()
            },
        }


def compare_stats(stats: TraceStats, ref: TraceStats,
                  tolerances: Optional[Mapping[str, Optional[Tolerance]]] = None,
                  technique: str = "", reference: str = "") -> ComparisonReport:
    tolerances = DEFAULT_TOLERANCES if tolerances is None else tolerances
    out = {}
    for name in STAT_FIELDS:
        value = getattr(stats, name)
        r = getattr(ref, name)
        tol = tolerances.get(name)
        if value is None or r is None:
            out[name] = FieldComparison(value, r, None, None, None if tol is None else False)
            continue
        delta = value - r
        rel = delta / abs(r) if r != 0 else None
        out[name] = FieldComparison(value, r, delta, rel, None if tol is None else tol.check(value, r))
    return ComparisonReport(technique, reference, out)


def compare_to_reference(stats: TraceStats, technique: str, which: str = "expert",
                         tolerances: Optional[Mapping[str, Optional[Tolerance]]] = None
                         ) -> ComparisonReport:
    ref = reference_stats(technique, which)
    return compare_stats(stats, ref, tolerances, technique.lower(), which.lower())


def uniform_tolerances(tol: Tolerance) -> Dict[str, Tolerance]:
    return {name: tol for name in STAT_FIELDS}
