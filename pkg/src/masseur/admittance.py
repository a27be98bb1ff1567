"""Adaptive admittance controller in discrete position-control form.

The continuous law is ``m*e'' + b*(e' + phi) = f_d - f_e``. What runs is the
discrete form, on the approach coordinate::

    phi(t)    = phi(t-T) + sigma * (f_e(t-T) - f_d(t-T)) / b
    xdd_c(t)  = xdd_e(t) + (delta_f - b*(xd_c(t-1) - xd_e(t)) - phi(t)) / m
    xd_c(t)   = xd_c(t-1) + xdd_c(t) * T
    x_c(t)    = x_c(t-1) + xd_c(t) * T

with ``delta_f = f_d - f_e``. ``phi`` enters the acceleration bare (not
multiplied by ``b``) because its update already divides by ``b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .contact import require


class NonFiniteInput(ArithmeticError):
    pass


@dataclass(frozen=True)
class AdmittanceParams:
    m: float = 1.0
    b: float = 150.0
    sigma: float = 0.5
    T: float = 0.002

    def __post_init__(self):
        for name in ("m", "b", "sigma", "T"):
            v = getattr(self, name)
            require(math.isfinite(v), name, "finite", v)
        require(self.m > 0, "m", "> 0", self.m)
        require(self.b > 0, "b", "> 0", self.b)
        require(self.sigma >= 0, "sigma", ">= 0", self.sigma)
        require(self.T > 0, "T", "> 0", self.T)


@dataclass(frozen=True)
class AdmittanceState:
    x_c: float = 0.0
    xd_c: float = 0.0
    xdd_c: float = 0.0
    phi: float = 0.0
    f_err_prev: float = 0.0  # f_e - f_d of the previous call


@dataclass(frozen=True)
class ReferenceKinematics:
    x_e: float = 0.0
    xd_e: float = 0.0
    xdd_e: float = 0.0


def update_compensation(phi_prev: float, f_e_prev: float, f_d_prev: float,
                        params: AdmittanceParams) -> float:
    return phi_prev + params.sigma * (f_e_prev - f_d_prev) / params.b


def step(state: AdmittanceState, ref: ReferenceKinematics, f_d: float, f_e: float,
         params: AdmittanceParams) -> AdmittanceState:
    """Advance the controller by one period ``params.T``.

    ``f_e`` is the most recent force measurement. Raises
    :class:`NonFiniteInput` on NaN/inf anywhere in the inputs.
    """
    values = (state.x_c, state.xd_c, state.xdd_c, state.phi, state.f_err_prev,
              ref.x_e, ref.xd_e, ref.xdd_e, f_d, f_e)
    if not all(math.isfinite(v) for v in values):
        raise NonFiniteInput(f"non-finite controller input: state={state}, ref={ref}, "
                             f"f_d={f_d!r}, f_e={f_e!r}")
    phi = update_compensation(state.phi, state.f_err_prev, 0.0, params)
    delta_f = f_d - f_e
    xdd = ref.xdd_e + (delta_f - params.b * (state.xd_c - ref.xd_e) - phi) / params.m
    xd = state.xd_c + xdd * params.T
    x = state.x_c + xd * params.T
    return AdmittanceState(x_c=x, xd_c=xd, xdd_c=xdd, phi=phi, f_err_prev=f_e - f_d)
