"""Fixed-step closed loop: technique -> admittance -> skin -> force feedback.

Force feedback is delayed one tick: the force recorded at tick ``i`` is
computed from tick ``i``'s commanded kinematics and reaches the controller
at tick ``i + 1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .admittance import AdmittanceParams
from .contact import SkinModel, contact_force, contact_force_array, require
from .core_types import ForceTrace, PathLike, validate_trace, write_trace_csv
from .techniques import (BeatParams, PressParams, PushParams, TechniqueSpec,
                         VibrateParams, beat_command, press_command, push_command)

log = logging.getLogger(__name__)

FORCE_LIMIT = 1000.0
# settle time after vibrate activation excluded from statistics
VIBRATE_SETTLE_S = 1.0


class UnstableSimulation(RuntimeError):
    def __init__(self, tick: int, t: float, detail: str = ""):
        msg = f"simulation unstable at tick {tick} (t = {t:.6g} s)"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.tick = tick
        self.t = t


@dataclass(frozen=True)
class SimConfig:
    technique: TechniqueSpec
    admittance: AdmittanceParams = field(default_factory=AdmittanceParams)
    skin: SkinModel = field(default_factory=SkinModel)
    seed: int = 0  # reserved; the core loop is deterministic

    def __post_init__(self):
        cycle = self.technique.cycle
        require(self.technique.duration >= 2 * cycle - 1e-9, "duration",
                f">= 2 technique cycles ({2 * cycle:.6g} s)", self.technique.duration)
        require(self.technique.duration >= 2 * self.admittance.T, "duration",
                ">= 2 control periods", self.technique.duration)

    @property
    def duration(self) -> float:
        return self.technique.duration

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.admittance.T))


@dataclass(frozen=True, eq=False)
class SimResult:
    technique: str
    trace: ForceTrace
    f_d: np.ndarray
    depth: np.ndarray  # approach coordinate of the (deepest) tip, m
    depth_rate: np.ndarray
    window: Tuple[float, float]  # statistics window after warm-up
    activation_time: Optional[float] = None
    steady_state_force_error: Optional[float] = None

    def summary(self) -> dict:
        out = {
            "technique": self.technique,
            "duration_s": float(len(self.trace) / self.trace.sample_rate),
            "sample_rate_hz": self.trace.sample_rate,
        }
        if self.activation_time is not None:
            out["activation_time_s"] = self.activation_time
        if self.steady_state_force_error is not None:
            out["steady_state_force_error_n"] = self.steady_state_force_error
        return out


def _poses(n, x=None, y=None, z=None, rx=None) -> np.ndarray:
    poses = np.zeros((n, 6))
    for j, col in enumerate((x, y, z, rx)):
        if col is not None:
            poses[:, j] = col
    return poses


def _check_trace(trace: ForceTrace) -> ForceTrace:
    problem = validate_trace(trace)
    if problem is not None:
        raise AssertionError(f"simulator produced an invalid trace: {problem}")
    return trace


def _final_cycle_error(fz, f_d, n_cycle) -> float:
    n_cycle = max(1, min(n_cycle, len(fz)))
    return float(np.mean(np.abs(fz[-n_cycle:] - f_d[-n_cycle:])))


def _run_force_loop(f_d, ref, x0, adm: AdmittanceParams, skin: SkinModel,
                    vibrate: Optional[VibrateParams] = None):
    ref_x, ref_xd, ref_xdd = (np.ascontiguousarray(r, dtype=float) for r in ref)
    f_meas0 = contact_force(skin, x0, 0.0)
    vib = vibrate or VibrateParams()
    depth, rate, fz, x_c, phi, act, bad = kernels.force_loop(
        np.ascontiguousarray(f_d, dtype=float), ref_x, ref_xd, ref_xdd,
        float(x0), float(f_meas0), adm.m, adm.b, adm.sigma, adm.T,
        skin.k, skin.n, skin.c,
        vibrate is not None, vib.f_activate, vib.vib_freq, vib.vib_amp)
    if bad >= 0:
        raise UnstableSimulation(bad, bad * adm.T,
                                 f"fz = {float(fz[bad]):.6g} N, x_c = {float(x_c[bad]):.6g} m, phi = {float(phi[bad]):.6g}")
    return depth, rate, fz, (act if act >= 0 else None)


def _run_beat(p: BeatParams, cfg: SimConfig, t: np.ndarray) -> SimResult:
    n = len(t)
    skin = cfg.skin
    arms = []
    for arm in range(p.n_arms):
        cmds = [beat_command(ti, p, arm) for ti in t.tolist()]
        s = np.array([c.ref.x_e for c in cmds])
        sd = np.array([c.ref.xd_e for c in cmds])
        x = np.array([c.lateral.x for c in cmds])
        rx = np.array([c.lateral.rx for c in cmds])
        arms.append((s, sd, x, rx, contact_force_array(skin, s, sd)))
    fz = np.sum([a[4] for a in arms], axis=0)
    if not np.all(np.isfinite(fz)) or np.any(fz > FORCE_LIMIT):
        bad = int(np.flatnonzero(~np.isfinite(fz) | (fz > FORCE_LIMIT))[0])
        raise UnstableSimulation(bad, float(t[bad]), f"fz = {float(fz[bad]):.6g} N")
    # record the pose of whichever fist is lower
    lead = np.argmax(np.stack([a[0] for a in arms]), axis=0)
    pick = lambda j: np.choose(lead, [a[j] for a in arms])
    depth = pick(0)
    trace = ForceTrace(1.0 / cfg.admittance.T, t, fz, np.zeros(n),
                       _poses(n, x=pick(2), z=skin.z_surface - depth, rx=pick(3)))
    return SimResult("beat", _check_trace(trace), np.zeros(n), depth, pick(1),
                     (p.cycle, cfg.duration))


def _run_tracking(name, p, cfg: SimConfig, t: np.ndarray) -> SimResult:
    n = len(t)
    skin = cfg.skin
    T = cfg.admittance.T
    vib = None
    y = None
    if isinstance(p, PressParams):
        cmds = [press_command(ti, p, skin) for ti in t.tolist()]
    elif isinstance(p, PushParams):
        cmds = [push_command(ti, p, skin) for ti in t.tolist()]
        y = np.array([c.lateral.y for c in cmds])
    else:
        vib = p
        cmds = None
    if cmds is not None:
        f_d = np.array([c.f_d for c in cmds])
        ref = (np.array([c.ref.x_e for c in cmds]), np.array([c.ref.xd_e for c in cmds]),
               np.array([c.ref.xdd_e for c in cmds]))
    else:
        f_d = np.full(n, vib.f_activate)
        ref = (np.zeros(n), np.zeros(n), np.zeros(n))
    x0 = float(ref[0][0])
    depth, rate, fz, act = _run_force_loop(f_d, ref, x0, cfg.admittance, skin, vib)

    activation_time = None
    window = (p.cycle, cfg.duration)
    if vib is not None:
        if act is None:
            log.warning("vibrate never reached %.3g N; statistics cover the whole run", vib.f_activate)
            window = (0.0, cfg.duration)
        else:
            activation_time = float(t[act])
            window = (min(activation_time + VIBRATE_SETTLE_S, cfg.duration - p.cycle), cfg.duration)
    n_cycle = int(round(p.cycle / T))
    trace = ForceTrace(1.0 / T, t, fz, np.zeros(n),
                       _poses(n, y=y, z=skin.z_surface - depth))
    return SimResult(name, _check_trace(trace), f_d, depth, rate, window, activation_time,
                     _final_cycle_error(fz, f_d, n_cycle))


def run_simulation(cfg: SimConfig) -> SimResult:
    """Run one technique for ``cfg.duration`` seconds at period ``cfg.admittance.T``."""
    n = cfg.n_ticks
    t = np.arange(n) * cfg.admittance.T
    p = cfg.technique.params
    log.info("running %s for %.3g s (%d ticks, %s kernels)", cfg.technique.name,
             cfg.duration, n, kernels.BACKEND)
    if isinstance(p, BeatParams):
        return _run_beat(p, cfg, t)
    return _run_tracking(cfg.technique.name, p, cfg, t)


def track_constant_force(f_d: float, duration: float,
                         admittance: AdmittanceParams = AdmittanceParams(),
                         skin: SkinModel = SkinModel(), x0: float = 0.0,
                         settle_window: float = 1.0) -> SimResult:
    """Hold a constant desired force against a static reference.

    ``steady_state_force_error`` is the mean ``|f_e - f_d|`` over the final
    ``settle_window`` seconds.
    """
    T = admittance.T
    n = int(round(duration / T))
    t = np.arange(n) * T
    f = np.full(n, float(f_d))
    ref = (np.full(n, float(x0)), np.zeros(n), np.zeros(n))
    depth, rate, fz, _ = _run_force_loop(f, ref, x0, admittance, skin)
    trace = ForceTrace(1.0 / T, t, fz, np.zeros(n), _poses(n, z=skin.z_surface - depth))
    err = _final_cycle_error(fz, f, int(round(settle_window / T)))
    return SimResult("constant", _check_trace(trace), f, depth, rate,
                     (max(0.0, duration - settle_window), duration), None, err)


def export_trace(result: SimResult, path: PathLike) -> None:
    write_trace_csv(result.trace, path)
