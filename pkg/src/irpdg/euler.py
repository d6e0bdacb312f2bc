"""Conserved states, equation of state and admissible-region functionals.

Conserved variables are (rho, m, E) in 1D and (rho, m, n, E) in 2D, stored
as the trailing axis of float arrays so every operation broadcasts.  The
admissible region is

    {rho > 0,  p > 0,  q <= 0},   q = (s0 - s) * rho,   s = log(p / rho**gamma),

with s0 a global lower entropy bound; q is convex and p concave in the
conserved variables, which is what the limiter's convex-combination
argument relies on.  Numerically the region is floored at rho >= eps,
p >= eps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "GasModel",
    "State1",
    "State2",
    "RegionMargins",
    "VacuumStateError",
    "pressure",
    "specific_entropy",
    "q_functional",
    "region_margins",
    "flux_1d",
    "flux_2d",
    "projected_flux",
    "max_wave_speed_1d",
    "max_wave_speed_dir",
    "sound_speed",
    "conserved_1d",
    "conserved_2d",
    "rotate_to_normal",
    "rotate_from_normal",
]


class VacuumStateError(ValueError):
    """Raised when an operation requires positive density (or pressure)."""


@dataclass(frozen=True)
class GasModel:
    """Ideal-gas parameters: heat-capacity ratio, floors, entropy bound.

    ``epsilon`` is the positive floor enforced on density and pressure;
    ``s0`` is the global lower bound of the specific entropy (estimated
    from initial data by the solver).
    """

    gamma: float
    epsilon: float = 1e-13
    s0: float = 0.0

    def __post_init__(self):
        if not 1.0 < self.gamma < 3.0:
            raise ValueError(f"gamma must lie in (1, 3), got {self.gamma}")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    def with_entropy_floor(self, s0: float) -> "GasModel":
        return replace(self, s0=float(s0))


class State1(NamedTuple):
    """1D conserved state (density, momentum, total energy)."""

    rho: float
    m: float
    E: float


class State2(NamedTuple):
    """2D conserved state (density, x/y momentum, total energy)."""

    rho: float
    m: float
    n: float
    E: float


class RegionMargins(NamedTuple):
    """Signed distances to the floored admissible set.

    Membership: rho_margin >= 0 and p_margin >= 0 and q_value <= 0;
    strict inequalities for the interior.
    """

    rho_margin: float
    p_margin: float
    q_value: float

    @property
    def in_region(self) -> bool:
        return self.rho_margin >= 0.0 and self.p_margin >= 0.0 and self.q_value <= 0.0

    @property
    def in_interior(self) -> bool:
        return self.rho_margin > 0.0 and self.p_margin > 0.0 and self.q_value < 0.0


def _as_state_array(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape[-1] not in (3, 4):
        raise ValueError(f"state arrays need 3 or 4 trailing components, got shape {w.shape}")
    return w


def _kinetic(w: np.ndarray) -> np.ndarray:
    if w.shape[-1] == 4:
        return 0.5 * (w[..., 1] ** 2 + w[..., 2] ** 2) / w[..., 0]
    return 0.5 * w[..., 1] ** 2 / w[..., 0]


def pressure(w, g: GasModel):
    """p = (gamma - 1) * (E - |m|^2 / (2 rho)); may be negative or zero."""
    w = _as_state_array(w)
    if np.any(w[..., 0] == 0.0):
        raise VacuumStateError("vacuum state: rho = 0")
    return (g.gamma - 1.0) * (w[..., -1] - _kinetic(w))


def specific_entropy(w, g: GasModel):
    """s = log(p / rho**gamma); requires rho > 0 and p > 0."""
    w = _as_state_array(w)
    rho = w[..., 0]
    if np.any(rho <= 0.0):
        raise VacuumStateError("entropy undefined: rho <= 0")
    p = pressure(w, g)
    if np.any(p <= 0.0):
        raise VacuumStateError("entropy undefined: p <= 0")
    return np.log(p) - g.gamma * np.log(rho)


def q_functional(w, g: GasModel):
    """q = (s0 - s) * rho; convex, nonpositive exactly on admissible states."""
    return (g.s0 - specific_entropy(w, g)) * np.asarray(w, dtype=float)[..., 0]


def region_margins(w, g: GasModel) -> RegionMargins:
    """Total membership test for a single state.

    Never raises: when rho or p is nonpositive the entropy functional is
    reported as +inf (the state is definitively outside), and at rho = 0
    the undecidable pressure margin is reported as -inf.
    """
    w = _as_state_array(w)
    if w.ndim != 1:
        raise ValueError("region_margins expects a single state")
    rho = w[0]
    if rho == 0.0:
        return RegionMargins(rho - g.epsilon, -np.inf, np.inf)
    p = float(pressure(w, g))
    if rho < 0.0 or p <= 0.0:
        return RegionMargins(rho - g.epsilon, p - g.epsilon, np.inf)
    s = np.log(p) - g.gamma * np.log(rho)
    return RegionMargins(rho - g.epsilon, p - g.epsilon, (g.s0 - s) * rho)


def flux_1d(w, g: GasModel) -> np.ndarray:
    """Physical flux (m, rho u^2 + p, (E + p) u)."""
    w = _as_state_array(w)
    rho = w[..., 0]
    if np.any(rho <= 0.0):
        raise VacuumStateError("flux undefined: rho <= 0")
    p = pressure(w, g)
    u = w[..., 1] / rho
    return np.stack([w[..., 1], w[..., 1] * u + p, (w[..., -1] + p) * u], axis=-1)


def flux_2d(w, g: GasModel) -> tuple[np.ndarray, np.ndarray]:
    """Physical flux pair (F1, F2) of the 2D system."""
    w = _as_state_array(w)
    rho, m, n, E = (w[..., i] for i in range(4))
    if np.any(rho <= 0.0):
        raise VacuumStateError("flux undefined: rho <= 0")
    p = pressure(w, g)
    u = m / rho
    v = n / rho
    f1 = np.stack([m, m * u + p, n * u, (E + p) * u], axis=-1)
    f2 = np.stack([n, m * v, n * v + p, (E + p) * v], axis=-1)
    return f1, f2


def projected_flux(w, nu, g: GasModel) -> np.ndarray:
    """F1 * nu_x + F2 * nu_y for a unit direction nu."""
    nu = np.asarray(nu, dtype=float)
    if abs(float(nu @ nu) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    f1, f2 = flux_2d(w, g)
    return nu[0] * f1 + nu[1] * f2


def sound_speed(w, g: GasModel):
    """c = sqrt(gamma p / rho); requires rho > 0 and p >= 0."""
    w = _as_state_array(w)
    rho = w[..., 0]
    if np.any(rho <= 0.0):
        raise VacuumStateError("sound speed undefined: rho <= 0")
    p = pressure(w, g)
    if np.any(p < 0.0):
        raise VacuumStateError("sound speed undefined: p < 0")
    return np.sqrt(g.gamma * p / rho)


def max_wave_speed_1d(w, g: GasModel):
    """|u| + c, the spectral radius of the flux Jacobian."""
    w = _as_state_array(w)
    return np.abs(w[..., 1] / w[..., 0]) + sound_speed(w, g)


def max_wave_speed_dir(w, nu, g: GasModel):
    """|u . nu| + c for the system projected onto the unit direction nu."""
    w = _as_state_array(w)
    nu = np.asarray(nu, dtype=float)
    if abs(float(nu @ nu) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    un = (w[..., 1] * nu[0] + w[..., 2] * nu[1]) / w[..., 0]
    return np.abs(un) + sound_speed(w, g)


def conserved_1d(rho, u, p, g: GasModel) -> np.ndarray:
    """Conserved (rho, m, E) from primitive (rho, u, p)."""
    rho, u, p = np.broadcast_arrays(*map(np.asarray, (rho, u, p)))
    E = p / (g.gamma - 1.0) + 0.5 * rho * u**2
    return np.stack([rho, rho * u, E], axis=-1).astype(float)


def conserved_2d(rho, u, v, p, g: GasModel) -> np.ndarray:
    """Conserved (rho, m, n, E) from primitive (rho, u, v, p)."""
    rho, u, v, p = np.broadcast_arrays(*map(np.asarray, (rho, u, v, p)))
    E = p / (g.gamma - 1.0) + 0.5 * rho * (u**2 + v**2)
    return np.stack([rho, rho * u, rho * v, E], axis=-1).astype(float)


def rotate_to_normal(w, nu) -> np.ndarray:
    """Express a 2D state in the (normal, tangential) momentum frame.

    The tangential direction is nu_perp = (-nu_y, nu_x); kinetic energy is
    rotation invariant so the energy component passes through.
    """
    w = _as_state_array(w)
    nu = np.asarray(nu, dtype=float)
    out = w.copy()
    out[..., 1] = w[..., 1] * nu[0] + w[..., 2] * nu[1]
    out[..., 2] = -w[..., 1] * nu[1] + w[..., 2] * nu[0]
    return out


def rotate_from_normal(w, nu) -> np.ndarray:
    """Inverse of :func:`rotate_to_normal`."""
    w = _as_state_array(w)
    nu = np.asarray(nu, dtype=float)
    out = w.copy()
    out[..., 1] = w[..., 1] * nu[0] - w[..., 2] * nu[1]
    out[..., 2] = w[..., 1] * nu[1] + w[..., 2] * nu[0]
    return out
