"""Cart-pole plant with an attachable cart weight.

A uniform rod of mass ``m`` and full length ``L`` pivots on a cart of mass
``M`` driven by a horizontal force ``F``.  A dead weight of mass ``m_w`` can
be attached to (or removed from) the cart at run time, changing the effective
cart mass without touching the controller.

Sign convention: ``x`` grows to the right, ``theta`` is measured from the
upright vertical and ``theta > 0`` leans the pole toward positive ``x``.  A
positive force pushes the cart toward positive ``x``, which tips the pole
toward negative ``theta``.

With ``l = L / 2`` (pivot to rod center) and ``M_eff`` the cart mass plus the
attached weight, the accelerations are

    theta_dd = [g*sin(th) + cos(th) * (-F - m*l*thd^2*sin(th)) / (M_eff + m)]
               / [l * (4/3 - m*cos(th)^2 / (M_eff + m))]
    x_dd     = [F + m*l*(thd^2*sin(th) - theta_dd*cos(th))] / (M_eff + m)

which follow from the Lagrangian of the cart plus uniform rod; the 4/3 factor
is the rod's inertia about the pivot, (1/3) m L^2 / (m l).  Total energy
(kinetic plus ``m g l cos(theta)`` with the datum at pivot height) is an
invariant of the unforced flow and is used to validate the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

ATTACH_WEIGHT = "attach_weight"
REMOVE_WEIGHT = "remove_weight"
EVENT_KINDS = (ATTACH_WEIGHT, REMOVE_WEIGHT)

FAILURE_ANGLE = math.pi / 2
"""Pole angle magnitude beyond which the run counts as failed."""


class InvalidStateError(ValueError):
    """A state, force, or parameter is non-finite or out of range."""


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the cart-pole rig.

    Defaults are the case-study rig: a 10 kg cart, 4 kg / 4 m uniform pole,
    5 kg attachable weight, and a +/-200 N actuator.
    """

    cart_mass: float = 10.0
    pole_mass: float = 4.0
    pole_length: float = 4.0
    weight_mass: float = 5.0
    gravity: float = 9.81
    force_limit: float = 200.0

    def __post_init__(self) -> None:
        for name in ("cart_mass", "pole_mass", "pole_length", "gravity", "force_limit"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidStateError(f"{name} must be a finite positive number, got {value!r}")
        if not (math.isfinite(self.weight_mass) and self.weight_mass >= 0):
            raise InvalidStateError(f"weight_mass must be finite and >= 0, got {self.weight_mass!r}")

    @property
    def half_length(self) -> float:
        """Pivot-to-center distance l = L / 2."""
        return 0.5 * self.pole_length

    def effective_cart_mass(self, weight_present: bool) -> float:
        return self.cart_mass + (self.weight_mass if weight_present else 0.0)


@dataclass(frozen=True)
class PlantState:
    """Plant pose: cart position/velocity, pole angle/rate, weight flag."""

    x: float = 0.0
    x_dot: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    weight_present: bool = False

    def continuous(self) -> tuple[float, float, float, float]:
        """The four continuous coordinates as a tuple."""
        return (self.x, self.x_dot, self.theta, self.theta_dot)


@dataclass(frozen=True)
class DisturbanceEvent:
    """Attach or remove the cart weight at a given simulation time."""

    time: float
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise InvalidStateError(f"unknown event kind {self.kind!r}; expected one of {EVENT_KINDS}")
        if not (math.isfinite(self.time) and self.time >= 0):
            raise InvalidStateError(f"event time must be finite and >= 0, got {self.time!r}")


def _accelerations(
    theta: float,
    theta_dot: float,
    force: float,
    total_mass: float,
    pole_mass: float,
    half_length: float,
    gravity: float,
) -> tuple[float, float]:
    """(x_dd, theta_dd) on raw floats; hot path shared by the integrator."""
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    # Common subexpression (F + m l thd^2 sin) / (M_eff + m).
    tmp = (force + pole_mass * half_length * theta_dot * theta_dot * sin_t) / total_mass
    theta_dd = (gravity * sin_t - cos_t * tmp) / (
        half_length * (4.0 / 3.0 - pole_mass * cos_t * cos_t / total_mass)
    )
    x_dd = tmp - pole_mass * half_length * theta_dd * cos_t / total_mass
    return x_dd, theta_dd


def derivative(state: PlantState, force: float, params: PlantParams) -> tuple[float, float, float, float]:
    """Time derivative (x_dot, x_dd, theta_dot, theta_dd) under constant force.

    Raises InvalidStateError when any coordinate or the force is non-finite.
    """
    x, x_dot, theta, theta_dot = state.continuous()
    if not (
        math.isfinite(x)
        and math.isfinite(x_dot)
        and math.isfinite(theta)
        and math.isfinite(theta_dot)
        and math.isfinite(force)
    ):
        raise InvalidStateError(f"non-finite state or force: state={state}, force={force!r}")
    total = params.effective_cart_mass(state.weight_present) + params.pole_mass
    x_dd, theta_dd = _accelerations(
        theta, theta_dot, force, total, params.pole_mass, params.half_length, params.gravity
    )
    return (x_dot, x_dd, theta_dot, theta_dd)


def rk4_raw(
    x: float,
    x_dot: float,
    theta: float,
    theta_dot: float,
    force: float,
    step: float,
    total_mass: float,
    pole_mass: float,
    half_length: float,
    gravity: float,
) -> tuple[float, float, float, float]:
    """One classical RK4 step on raw floats with the force held constant."""
    a1x, a1t = _accelerations(theta, theta_dot, force, total_mass, pole_mass, half_length, gravity)
    h2 = 0.5 * step

    xd2 = x_dot + h2 * a1x
    td2 = theta_dot + h2 * a1t
    a2x, a2t = _accelerations(theta + h2 * theta_dot, td2, force, total_mass, pole_mass, half_length, gravity)

    xd3 = x_dot + h2 * a2x
    td3 = theta_dot + h2 * a2t
    a3x, a3t = _accelerations(theta + h2 * td2, td3, force, total_mass, pole_mass, half_length, gravity)

    xd4 = x_dot + step * a3x
    td4 = theta_dot + step * a3t
    a4x, a4t = _accelerations(theta + step * td3, td4, force, total_mass, pole_mass, half_length, gravity)

    sixth = step / 6.0
    return (
        x + sixth * (x_dot + 2.0 * (xd2 + xd3) + xd4),
        x_dot + sixth * (a1x + 2.0 * (a2x + a3x) + a4x),
        theta + sixth * (theta_dot + 2.0 * (td2 + td3) + td4),
        theta_dot + sixth * (a1t + 2.0 * (a2t + a3t) + a4t),
    )


def rk4_step(state: PlantState, force: float, params: PlantParams, step: float) -> PlantState:
    """Advance the plant one fixed step of classical RK4.

    The force is zero-order held across the step.  The weight flag is a
    discrete input and never changes inside a step.
    """
    if not (math.isfinite(step) and step > 0):
        raise InvalidStateError(f"step must be finite and > 0, got {step!r}")
    # Validates finiteness as a side effect.
    derivative(state, force, params)
    total = params.effective_cart_mass(state.weight_present) + params.pole_mass
    x, x_dot, theta, theta_dot = rk4_raw(
        state.x,
        state.x_dot,
        state.theta,
        state.theta_dot,
        force,
        step,
        total,
        params.pole_mass,
        params.half_length,
        params.gravity,
    )
    return replace(state, x=x, x_dot=x_dot, theta=theta, theta_dot=theta_dot)


def total_energy(state: PlantState, params: PlantParams) -> float:
    """Mechanical energy: kinetic of cart (plus weight) and rod, plus rod potential.

    Potential is ``m g l cos(theta)`` with the datum at pivot height, so the
    upright rest pose has energy ``m g l`` and the hanging pose ``-m g l``.
    The cart and weight ride a horizontal track and contribute no potential.
    """
    m_cart = params.effective_cart_mass(state.weight_present)
    m = params.pole_mass
    half = params.half_length
    cos_t = math.cos(state.theta)
    ke_cart = 0.5 * m_cart * state.x_dot * state.x_dot
    v_sq = (
        state.x_dot * state.x_dot
        + 2.0 * half * state.theta_dot * state.x_dot * cos_t
        + half * half * state.theta_dot * state.theta_dot
    )
    ke_pole = 0.5 * m * v_sq + (m * half * half / 6.0) * state.theta_dot * state.theta_dot
    return ke_cart + ke_pole + m * params.gravity * half * cos_t


def apply_event(state: PlantState, event: DisturbanceEvent) -> PlantState:
    """Set the weight flag per the event; idempotent on repeats."""
    return replace(state, weight_present=(event.kind == ATTACH_WEIGHT))
