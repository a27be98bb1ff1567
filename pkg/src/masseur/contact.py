"""Nonlinear viscoelastic skin stand-in: power-law spring plus linear damper."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """A parameter invariant does not hold.

    ``field`` names the offending parameter, ``constraint`` the rule, e.g.
    ``"k"`` / ``"> 0"``.
    """

    def __init__(self, field: str, constraint: str, value=None):
        self.field = field
        self.constraint = constraint
        self.value = value
        msg = f"{field} {constraint} violated"
        if value is not None:
            msg += f" (got {value!r})"
        super().__init__(msg)


def require(ok: bool, field: str, constraint: str, value=None) -> None:
    if not ok:
        raise ParameterError(field, constraint, value)


@dataclass(frozen=True)
class SkinModel:
    """Contact environment.

    Attributes:
        k: stiffness coefficient, N/m^n
        n: stiffness exponent
        c: damping coefficient, N*s/m
        z_surface: undeformed surface height in world Z, m
    """

    k: float = 8000.0
    n: float = 1.5
    c: float = 50.0
    z_surface: float = 0.0

    def __post_init__(self):
        for name in ("k", "n", "c", "z_surface"):
            v = getattr(self, name)
            require(math.isfinite(v), name, "finite", v)
        require(self.k > 0, "k", "> 0", self.k)
        require(self.c >= 0, "c", ">= 0", self.c)
        require(1.0 <= self.n <= 3.0, "n", "in [1, 3]", self.n)

    def depth_for_force(self, f: float) -> float:
        """Static penetration giving spring force ``f`` (damping ignored)."""
        if f <= 0:
            return 0.0
        return (f / self.k) ** (1.0 / self.n)


def contact_force(model: SkinModel, s: float, s_dot: float) -> float:
    """Normal force for penetration ``s`` (m) and penetration rate ``s_dot`` (m/s).

    Zero out of contact; clamped at zero so fast retraction never pulls.
    """
    if s <= 0.0:
        return 0.0
    f = model.k * s ** model.n + model.c * s_dot
    return f if f > 0.0 else 0.0


def contact_force_array(model: SkinModel, s: np.ndarray, s_dot: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    s_dot = np.asarray(s_dot, dtype=float)
    pen = np.where(s > 0.0, s, 0.0)
    f = model.k * pen ** model.n + model.c * s_dot
    return np.where((s > 0.0) & (f > 0.0), f, 0.0)
