"""Machine-side controller: linearization, ZOH discretization, discrete LQR.

The machine agent runs a discrete LQR designed around the upright
equilibrium of the nominal plant (weight detached).  The attachable weight
is deliberately absent from the design model; robustness to that mismatch
is part of what the testbed measures.

State order everywhere: (x, x_dot, theta, theta_dot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import PlantParams


class NumericsError(RuntimeError):
    """A numeric routine failed to converge or hit a singular quantity."""


@dataclass(frozen=True)
class LinearModel:
    """State-space pair; ``step`` is None for continuous time, else the ZOH period."""

    a: np.ndarray
    b: np.ndarray
    step: float | None = None

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != (a.shape[0], a.shape[0]) or b.shape != (a.shape[0],):
            raise ValueError(f"expected square a and matching b vector, got {a.shape} and {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def linearize_upright(params: PlantParams) -> LinearModel:
    """Analytic Jacobian of the nominal (weightless) plant at the upright rest point.

    With total = M + m and D = l * (4/3 - m / total):

        theta_dd ~ (g / D) * theta - F / (total * D)
        x_dd     ~ F / total - (m * l / total) * theta_dd
    """
    total = params.cart_mass + params.pole_mass
    half = params.half_length
    denom = half * (4.0 / 3.0 - params.pole_mass / total)
    dtheta_dd_dtheta = params.gravity / denom
    dtheta_dd_dforce = -1.0 / (total * denom)
    coupling = params.pole_mass * half / total
    a = np.zeros((4, 4))
    a[0, 1] = 1.0
    a[2, 3] = 1.0
    a[1, 2] = -coupling * dtheta_dd_dtheta
    a[3, 2] = dtheta_dd_dtheta
    b = np.zeros(4)
    b[1] = 1.0 / total - coupling * dtheta_dd_dforce
    b[3] = dtheta_dd_dforce
    return LinearModel(a, b, step=None)


def expm(matrix: np.ndarray, rel_tol: float = 1e-12, max_terms: int = 200) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring around a Taylor series.

    The input is scaled by 2**s until its 1-norm is at most 0.5, the series
    is summed until the next term falls below ``rel_tol`` of the running
    sum, and the result is squared s times.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericsError("expm got a non-finite matrix")
    norm = np.linalg.norm(m, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    scaled = m / (2.0**squarings)
    result = np.eye(m.shape[0])
    term = np.eye(m.shape[0])
    for k in range(1, max_terms + 1):
        term = term @ scaled / k
        result = result + term
        if np.linalg.norm(term, 1) <= rel_tol * np.linalg.norm(result, 1):
            break
    else:
        raise NumericsError("expm series did not converge")
    for _ in range(squarings):
        result = result @ result
    return result


def discretize_zoh(model: LinearModel, period: float) -> LinearModel:
    """Exact zero-order-hold discretization via the augmented exponential.

    exp([[A, B], [0, 0]] * h) holds A_d in the top-left block and B_d in the
    top-right column.
    """
    if model.step is not None:
        raise ValueError("model is already discrete")
    if not (math.isfinite(period) and period > 0):
        raise ValueError(f"period must be finite and > 0, got {period!r}")
    n = model.a.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = model.a
    aug[:n, n] = model.b
    phi = expm(aug * period)
    return LinearModel(phi[:n, :n], phi[:n, n], step=period)


def solve_dare(
    a: np.ndarray,
    b: np.ndarray,
    q: np.ndarray,
    r: float,
    tol: float = 1e-12,
    max_iterations: int = 100_000,
) -> np.ndarray:
    """Fixed-point solution of the discrete algebraic Riccati equation.

    Iterates P <- Q + A^T (P - P b (r + b^T P b)^(-1) b^T P) A from P = Q
    until the DARE residual's Frobenius norm drops below ``tol``.  Raises
    NumericsError on a non-positive innovation term or no convergence.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float)
    p = q.copy()
    for _ in range(max_iterations):
        pb = p @ b
        denom = r + b @ pb
        if not (math.isfinite(denom) and denom > 0):
            raise NumericsError(f"singular innovation term r + b'Pb = {denom!r}")
        p_next = q + a.T @ (p - np.outer(pb, pb) / denom) @ a
        p_next = 0.5 * (p_next + p_next.T)
        if dare_residual(a, b, q, r, p_next) < tol:
            return p_next
        p = p_next
    raise NumericsError(f"DARE fixed point did not reach residual {tol} in {max_iterations} iterations")


def dare_residual(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: float, p: np.ndarray) -> float:
    """Frobenius norm of A'PA - P - A'Pb (r + b'Pb)^(-1) b'PA + Q."""
    b = np.asarray(b, dtype=float).reshape(-1)
    pb = p @ b
    residual = a.T @ p @ a - p - np.outer(a.T @ pb, pb @ a) / (r + b @ pb) + q
    return float(np.linalg.norm(residual, "fro"))


def lqr_gain(a: np.ndarray, b: np.ndarray, p: np.ndarray, r: float) -> np.ndarray:
    """Row gain K = (r + b'Pb)^(-1) b'PA for the control law u = -K s."""
    b = np.asarray(b, dtype=float).reshape(-1)
    pb = p @ b
    denom = r + b @ pb
    if not (math.isfinite(denom) and denom > 0):
        raise NumericsError(f"singular innovation term r + b'Pb = {denom!r}")
    return (pb @ a) / denom


@dataclass(frozen=True)
class LqrDesign:
    """One controller design: models, weights, Riccati solution, and gain."""

    continuous: LinearModel
    discrete: LinearModel
    q: np.ndarray
    r: float
    p: np.ndarray
    k: np.ndarray

    def closed_loop_spectral_radius(self) -> float:
        closed = self.discrete.a - np.outer(self.discrete.b, self.k)
        return float(np.max(np.abs(np.linalg.eigvals(closed))))


DEFAULT_Q_DIAGONAL = (0.01, 0.01, 10.0, 0.1)
DEFAULT_R = 0.001


def design_lqr(
    params: PlantParams,
    control_period: float,
    q_diagonal=DEFAULT_Q_DIAGONAL,
    r: float = DEFAULT_R,
) -> LqrDesign:
    """Full design pipeline: linearize, discretize at the control period, solve."""
    q = np.diag(np.asarray(q_diagonal, dtype=float))
    if q.shape != (4, 4) or np.any(np.diag(q) < 0):
        raise ValueError(f"q_diagonal must be four non-negative entries, got {q_diagonal!r}")
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"r must be finite and > 0, got {r!r}")
    continuous = linearize_upright(params)
    discrete = discretize_zoh(continuous, control_period)
    p = solve_dare(discrete.a, discrete.b, q, r)
    k = lqr_gain(discrete.a, discrete.b, p, r)
    return LqrDesign(continuous=continuous, discrete=discrete, q=q, r=r, p=p, k=k)


def machine_command(gain: np.ndarray, estimate, force_limit: float) -> float:
    """Saturated state feedback u = clip(-K s, +/-force_limit)."""
    u = -float(np.dot(gain, estimate))
    if u > force_limit:
        return force_limit
    if u < -force_limit:
        return -force_limit
    return u


ZERO_INPUT = "zero_input"
HOLD_LAST = "hold_last"
LOSS_POLICY_KINDS = (ZERO_INPUT, HOLD_LAST)


@dataclass
class LossPolicy:
    """What the actuator applies on a lost command packet.

    ``zero_input`` coasts with zero force; ``hold_last`` repeats the most
    recently delivered command.  ``record`` must be called on every
    successful delivery.
    """

    kind: str = ZERO_INPUT
    last_command: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in LOSS_POLICY_KINDS:
            raise ValueError(f"unknown loss policy {self.kind!r}; expected one of {LOSS_POLICY_KINDS}")

    def record(self, command: float) -> None:
        self.last_command = command

    def on_loss(self) -> float:
        return self.last_command if self.kind == HOLD_LAST else 0.0
