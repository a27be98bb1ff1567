"""Per-tick command generators for the four techniques.

Every generator is a pure function of time and its parameters, except
vibrate, whose activation time is threaded through by the caller. Motion
along the approach coordinate goes in ``TickCommand.ref``; motion outside
force control (x, y, rx) goes in ``lateral``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .admittance import ReferenceKinematics
from .contact import SkinModel, require
from .core_types import Pose

TWO_PI = 2.0 * math.pi


class Mode(enum.Enum):
    FORCE_TRACKING = "force-tracking"
    POSITION_DOMINANT = "position-dominant"


@dataclass(frozen=True)
class TickCommand:
    ref: ReferenceKinematics
    lateral: Pose = field(default_factory=Pose)
    lateral_velocity: Pose = field(default_factory=Pose)
    lateral_acceleration: Pose = field(default_factory=Pose)
    f_d: float = 0.0
    mode: Mode = Mode.FORCE_TRACKING
    # oscillation superimposed on the controller's depth (vibrate only)
    offset: float = 0.0
    offset_rate: float = 0.0

    def __post_init__(self):
        require(self.f_d >= 0, "f_d", ">= 0", self.f_d)


# --- beat -------------------------------------------------------------------

@dataclass(frozen=True)
class BeatParams:
    rot_x_deg: float = 25.0
    dx: float = 0.03
    dz: float = 0.16
    stroke_duration: float = 1.0
    corr_amp_deg: float = 1.0
    corr_omega: float = TWO_PI / 60.0
    corr_delta_deg: float = 0.0
    n_arms: int = 2
    # penetration of the struck pose below the undeformed surface
    strike_depth: float = 0.004

    def __post_init__(self):
        require(self.stroke_duration > 0, "stroke_duration", "> 0", self.stroke_duration)
        require(self.dz > 0, "dz", "> 0", self.dz)
        require(self.n_arms in (1, 2), "n_arms", "in {1, 2}", self.n_arms)
        require(0 <= self.strike_depth < self.dz, "strike_depth", "in [0, dz)", self.strike_depth)

    @property
    def cycle(self) -> float:
        return 2.0 * self.stroke_duration

    @property
    def strike_period(self) -> float:
        return self.cycle / self.n_arms


def min_jerk(tau: float) -> tuple:
    """Quintic blend 10τ³ − 15τ⁴ + 6τ⁵ and its first two τ-derivatives."""
    tau = min(max(tau, 0.0), 1.0)
    t2 = tau * tau
    t3 = t2 * tau
    p = t3 * (10.0 - 15.0 * tau + 6.0 * t2)
    dp = 30.0 * t2 * (1.0 - tau) ** 2
    ddp = 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau)
    return p, dp, ddp


def beat_correction(t: float, p: BeatParams) -> float:
    """Extra return-stroke rotation, degrees: amp*cos(omega*t) + delta."""
    return p.corr_amp_deg * math.cos(p.corr_omega * t) + p.corr_delta_deg


def beat_command(t: float, p: BeatParams, arm: int = 0) -> TickCommand:
    """Command for one effector. Arm 1 runs the same cycle delayed by one
    stroke, so with two arms strikes land every ``stroke_duration``.

    Movement 1 (strike) blends raised -> struck; movement 2 returns, rotating
    back by ``rot_x_deg + correction`` where the correction is sampled when
    the return starts. The next strike starts from wherever the return ended,
    which keeps rx continuous.
    """
    require(t >= 0, "t", ">= 0", t)
    D = p.stroke_duration
    local = t - arm * D
    raised = p.strike_depth - p.dz

    if local < 0.0:
        return TickCommand(ref=ReferenceKinematics(raised, 0.0, 0.0),
                           mode=Mode.POSITION_DOMINANT)

    k, u = divmod(local, p.cycle)
    k = int(k)
    if u < D:
        tau = u / D
        blend, dblend, ddblend = min_jerk(tau)
        sign = 1.0
        rx_start = -beat_correction(p.cycle * (k - 1) + D, p) if k > 0 else 0.0
        rx_end = p.rot_x_deg
    else:
        tau = (u - D) / D
        b, db, ddb = min_jerk(tau)
        blend, dblend, ddblend = 1.0 - b, -db, -ddb
        sign = -1.0
        rx_start = p.rot_x_deg
        rx_end = -beat_correction(p.cycle * k + D, p)

    s = raised + p.dz * blend
    sd = p.dz * dblend / D
    sdd = p.dz * ddblend / (D * D)
    if sign > 0:
        rb, drb, ddrb = blend, dblend, ddblend
    else:
        rb, drb, ddrb = 1.0 - blend, -dblend, -ddblend
    rx = rx_start + (rx_end - rx_start) * rb
    rxd = (rx_end - rx_start) * drb / D
    rxdd = (rx_end - rx_start) * ddrb / (D * D)
    return TickCommand(
        ref=ReferenceKinematics(s, sd, sdd),
        lateral=Pose(x=p.dx * blend, rx=rx),
        lateral_velocity=Pose(x=p.dx * dblend / D, rx=rxd),
        lateral_acceleration=Pose(x=p.dx * ddblend / (D * D), rx=rxdd),
        f_d=0.0,
        mode=Mode.POSITION_DOMINANT,
    )


# --- press ------------------------------------------------------------------

@dataclass(frozen=True)
class PressParams:
    f_max: float = 43.2
    f_min: float = 8.5
    hold_peak: float = 3.0
    hold_trough: float = 1.0
    sine_period: float = 1.26
    # derive the reference depth from the nominal skin so the admittance only
    # corrects the residual instead of chasing the whole profile
    feedforward: bool = True

    def __post_init__(self):
        require(self.f_min >= 0, "f_min", ">= 0", self.f_min)
        require(self.f_max > self.f_min, "f_max", "> f_min", self.f_max)
        require(self.sine_period > 0, "sine_period", "> 0", self.sine_period)
        require(self.hold_peak >= 0, "hold_peak", ">= 0", self.hold_peak)
        require(self.hold_trough >= 0, "hold_trough", ">= 0", self.hold_trough)

    @property
    def cycle(self) -> float:
        return self.sine_period + self.hold_peak + self.hold_trough


def _press_phase(u: float, p: PressParams) -> tuple:
    """Map cycle time to (sine time, d(sine time)/dt). The sine clock freezes
    at T/4 for the peak hold and at 3T/4 for the trough hold."""
    q = p.sine_period / 4.0
    bounds = (q, q + p.hold_peak, 3 * q + p.hold_peak, 3 * q + p.hold_peak + p.hold_trough)
    if u < bounds[0]:
        return u, 1.0
    if u < bounds[1]:
        return q, 0.0
    if u < bounds[2]:
        return u - p.hold_peak, 1.0
    if u < bounds[3]:
        return 3 * q, 0.0
    return u - p.hold_peak - p.hold_trough, 1.0


def press_force_rates(t: float, p: PressParams) -> tuple:
    """Desired force and its first two time derivatives."""
    require(t >= 0, "t", ">= 0", t)
    mid = 0.5 * (p.f_max + p.f_min)
    amp = 0.5 * (p.f_max - p.f_min)
    w = TWO_PI / p.sine_period
    tau, rate = _press_phase(math.fmod(t, p.cycle), p)
    if rate == 0.0:
        # holds sit exactly on the extremes
        return (p.f_max if tau < p.sine_period / 2 else p.f_min), 0.0, 0.0
    ph = w * tau
    return mid + amp * math.sin(ph), amp * w * math.cos(ph), -amp * w * w * math.sin(ph)


def press_desired_force(t: float, p: PressParams) -> float:
    return press_force_rates(t, p)[0]


def press_command(t: float, p: PressParams, skin: Optional[SkinModel] = None) -> TickCommand:
    f, fd, fdd = press_force_rates(t, p)
    if not p.feedforward or skin is None or f <= 0:
        ref = ReferenceKinematics(0.0, 0.0, 0.0)
    else:
        # s = (f/k)^(1/n): s' = s f'/(n f), s'' = s/(n f) * (f'' + f'^2 (1/n - 1)/f)
        s = skin.depth_for_force(f)
        g = s / (skin.n * f)
        ref = ReferenceKinematics(s, g * fd, g * (fdd + fd * fd * (1.0 / skin.n - 1.0) / f))
    return TickCommand(ref=ref, f_d=f, mode=Mode.FORCE_TRACKING)


# --- push -------------------------------------------------------------------

@dataclass(frozen=True)
class PushParams:
    y0: float = 0.0
    z0: float = 0.0  # world height the approach reference is anchored to
    amp: float = 0.10
    omega: float = TWO_PI * 0.88 / 2.0
    f_push: float = 29.0

    def __post_init__(self):
        require(self.amp > 0, "amp", "> 0", self.amp)
        require(self.omega > 0, "omega", "> 0", self.omega)
        require(self.f_push > 0, "f_push", "> 0", self.f_push)

    @property
    def cycle(self) -> float:
        return TWO_PI / self.omega

    @property
    def stroke_rate(self) -> float:
        return self.omega / TWO_PI


def push_command(t: float, p: PushParams, skin: Optional[SkinModel] = None) -> TickCommand:
    """Lateral y sine; depth is left entirely to the admittance loop."""
    require(t >= 0, "t", ">= 0", t)
    ph = p.omega * t
    z_surface = skin.z_surface if skin is not None else 0.0
    return TickCommand(
        ref=ReferenceKinematics(z_surface - p.z0, 0.0, 0.0),
        lateral=Pose(y=p.y0 + p.amp * math.sin(ph)),
        lateral_velocity=Pose(y=p.amp * p.omega * math.cos(ph)),
        lateral_acceleration=Pose(y=-p.amp * p.omega ** 2 * math.sin(ph)),
        f_d=p.f_push,
        mode=Mode.FORCE_TRACKING,
    )


# --- vibrate ----------------------------------------------------------------

@dataclass(frozen=True)
class VibrateParams:
    f_activate: float = 20.0
    vib_freq: float = 7.33
    vib_amp: float = 0.0015

    def __post_init__(self):
        require(self.f_activate > 0, "f_activate", "> 0", self.f_activate)
        require(self.vib_freq > 0, "vib_freq", "> 0", self.vib_freq)
        require(self.vib_amp > 0, "vib_amp", "> 0", self.vib_amp)

    @property
    def cycle(self) -> float:
        return 1.0 / self.vib_freq


def vibrate_command(t: float, p: VibrateParams, f_e_now: float,
                    activated_at: Optional[float]) -> tuple:
    """Returns ``(command, activated_at')``.

    ``activated_at`` is ``None`` until the first tick whose measured force
    reaches ``f_activate``; from then on a sine offset of ``vib_amp`` at
    ``vib_freq`` rides on the depth the admittance loop holds.
    """
    require(t >= 0, "t", ">= 0", t)
    if activated_at is None and f_e_now >= p.f_activate:
        activated_at = t
    offset = offset_rate = 0.0
    if activated_at is not None:
        w = TWO_PI * p.vib_freq
        ph = w * (t - activated_at)
        offset = p.vib_amp * math.sin(ph)
        offset_rate = p.vib_amp * w * math.cos(ph)
    cmd = TickCommand(ref=ReferenceKinematics(0.0, 0.0, 0.0), f_d=p.f_activate,
                      mode=Mode.FORCE_TRACKING, offset=offset, offset_rate=offset_rate)
    return cmd, activated_at


Technique = Union[BeatParams, PressParams, PushParams, VibrateParams]

TECHNIQUES = {
    "beat": BeatParams,
    "press": PressParams,
    "push": PushParams,
    "vibrate": VibrateParams,
}


def technique_name(params: Technique) -> str:
    for name, cls in TECHNIQUES.items():
        if isinstance(params, cls):
            return name
    raise TypeError(f"not a technique parameter set: {params!r}")


@dataclass(frozen=True)
class TechniqueSpec:
    params: Technique
    duration: float

    def __post_init__(self):
        technique_name(self.params)
        require(self.duration > 0, "duration", "> 0", self.duration)

    @property
    def name(self) -> str:
        return technique_name(self.params)

    @property
    def cycle(self) -> float:
        return self.params.cycle
