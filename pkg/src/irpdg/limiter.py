"""Explicit admissible-region limiter for modal DG polynomials.

A violating polynomial is pulled toward its cell average by a linear convex
combination w~ = theta*w + (1-theta)*wbar, with theta computed in closed
form from the extrema of the three region functionals (density, pressure,
entropy surrogate q) over the cell's test set:

    theta1 = (rho_bar - eps) / (rho_bar - rho_min)      if rho_min < eps
    theta2 = (p_bar - eps) / (p_bar - p_min)            if p_min   < eps
    theta3 = q_bar / (q_bar - q_max)                    if q_max violates

and theta = min(1, theta1, theta2, theta3).  Concavity of p and convexity
of q guarantee the scaled polynomial is admissible at every test point
while the cell average is untouched (mode 0 is never modified).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels as kernels
from .euler import GasModel

__all__ = [
    "LimiterConfig",
    "LimiterEvent",
    "RegionViolationError",
    "theta_generic",
    "theta_euler",
    "limit_cell",
    "limit_field",
    "write_events_csv",
    "EVENT_CSV_HEADER",
]

# Violations of the entropy functional below this absolute size are ignored:
# they are round-off on cells sitting exactly on the q = 0 boundary (uniform
# regions whose initial entropy attains the global bound), and limiting them
# would needlessly flatten the polynomial.  The kept slack matches the
# region-membership guarantee advertised by the limiter (q <= 1e-12).
Q_VIOLATION_SLACK = 1e-12

# Cell averages are accepted up to this q excess; the scheme's stage
# guarantee is itself only exact up to round-off.
Q_AVERAGE_SLACK = 1e-11

EVENT_CSV_HEADER = (
    "step", "stage", "cell", "theta",
    "rho_min", "p_min", "q_max", "rho_bar", "p_bar", "q_bar",
)


class RegionViolationError(RuntimeError):
    """A cell average left the admissible region (CFL or flux bug)."""


@dataclass(frozen=True)
class LimiterConfig:
    """Limiter settings.

    ``mode`` selects the constraint set: "euler" enforces density, pressure
    and the entropy bound; "positivity" drops the entropy bound; "generic"
    enforces a single user-supplied convex functional U <= 0.  ``theta_clip``
    is the lower clip applied to theta after floating-point evaluation
    (theta is always capped at 1).
    """

    epsilon: float = 1e-13
    mode: str = "euler"
    theta_clip: float = 0.0
    functional: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 <= self.theta_clip <= 1.0:
            raise ValueError("theta_clip must lie in [0, 1]")
        if self.mode not in ("euler", "positivity", "generic"):
            raise ValueError(f"unknown limiter mode {self.mode!r}")
        if self.mode == "generic" and self.functional is None:
            raise ValueError("generic mode needs a functional")


@dataclass(slots=True)
class LimiterEvent:
    """One limiter activation (recorded only when theta < 1)."""

    cell_id: object
    step_index: int
    stage_index: int
    theta: float
    u_max_per_functional: tuple[float, float, float]  # (rho_min, p_min, q_max)
    avg_functional_values: tuple[float, float, float]  # (rho_bar, p_bar, q_bar)

    def csv_row(self) -> tuple:
        cell = self.cell_id
        cell_s = f"({cell[0]},{cell[1]})" if isinstance(cell, tuple) else cell
        return (self.step_index, self.stage_index, cell_s, repr(self.theta),
                *(repr(v) for v in self.u_max_per_functional),
                *(repr(v) for v in self.avg_functional_values))


def write_events_csv(events: Sequence[LimiterEvent], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_CSV_HEADER)
        for ev in events:
            writer.writerow(ev.csv_row())


def theta_generic(u_bar: float, u_max: float) -> float:
    """Scaling factor for a single convex functional U with U(wbar) < 0."""
    if u_bar >= 0.0:
        raise RegionViolationError(f"cell average outside interior: U(wbar) = {u_bar}")
    if u_max <= 0.0:
        return 1.0
    return u_bar / (u_bar - u_max)


def _theta_vec(rho_bar, p_bar, q_bar, rho_min, p_min, q_max, eps, entropy: bool):
    """Vectorized theta over cells; returns (theta, violating_mask)."""
    theta = np.ones_like(rho_bar)
    viol = rho_min < eps
    with np.errstate(invalid="ignore", divide="ignore"):
        if np.any(viol):
            t1 = (rho_bar - eps) / (rho_bar - rho_min)
            theta = np.where(viol, np.minimum(theta, t1), theta)
        pv = p_min < eps
        if np.any(pv):
            t2 = np.where(np.isneginf(p_min), 0.0, (p_bar - eps) / (p_bar - p_min))
            theta = np.where(pv, np.minimum(theta, t2), theta)
            viol = viol | pv
        if entropy:
            qv = q_max > Q_VIOLATION_SLACK * np.maximum(1.0, np.abs(q_bar))
            if np.any(qv):
                q_eff = np.minimum(q_bar, 0.0)
                t3 = np.where(np.isposinf(q_max), 0.0, q_eff / (q_eff - q_max))
                theta = np.where(qv, np.minimum(theta, t3), theta)
                viol = viol | qv
    return theta, viol


def _check_averages(rho_bar, p_bar, q_bar, viol, eps, entropy, cell_label):
    """Averages of cells that need limiting must be (weakly) admissible."""
    bad = viol & (
        (rho_bar < eps - 1e-12)
        | (p_bar < eps - 1e-12)
        | (entropy & (q_bar > Q_AVERAGE_SLACK * np.maximum(1.0, np.abs(q_bar))))
    )
    if np.any(bad):
        i = int(np.argmax(bad))
        raise RegionViolationError(
            f"average outside region in cell {cell_label(i)}: "
            f"rho={rho_bar[i]!r} p={p_bar[i]!r} q={q_bar[i]!r}"
        )


def theta_euler(w_bar, samples, g: GasModel, include_entropy: bool = True) -> float:
    """Limiter parameter from the three constraints for one cell.

    ``samples`` are the state values at the cell's test points, shape
    (npts, nc).  The cell average must be admissible (up to round-off);
    otherwise a :class:`RegionViolationError` is raised.
    """
    w_bar = np.asarray(w_bar, dtype=float)[None, :]
    vals = np.ascontiguousarray(np.asarray(samples, dtype=float).T)[None, :, :]
    rho_min, p_min, q_max = kernels.functional_minmax(vals, g.gamma, g.s0)
    rho_bar, p_bar, q_bar = kernels.cell_functionals(w_bar, g.gamma, g.s0)
    if (rho_bar[0] < g.epsilon - 1e-12 or p_bar[0] < g.epsilon - 1e-12
            or (include_entropy and q_bar[0] > Q_AVERAGE_SLACK * max(1.0, abs(q_bar[0])))):
        raise RegionViolationError(
            f"average outside region: rho={rho_bar[0]!r} p={p_bar[0]!r} q={q_bar[0]!r}"
        )
    theta, _ = _theta_vec(rho_bar, p_bar, q_bar, rho_min, p_min, q_max,
                          g.epsilon, include_entropy)
    return float(np.clip(theta[0], 0.0, 1.0))


def _limit_coeffs(coeffs, test_matrix, g: GasModel, cfg: LimiterConfig, cell_label):
    """Limit a flat coefficient block (ncells, nc, nmodes) in place.

    ``test_matrix`` maps modal coefficients to test-point values, shape
    (nmodes, npts).  Returns (theta, indices of limited cells, extrema,
    averages) for event assembly.
    """
    vals = np.ascontiguousarray(coeffs @ test_matrix)  # (ncells, nc, npts)
    wbar = np.ascontiguousarray(coeffs[:, :, 0])

    if cfg.mode == "generic":
        u_pts = cfg.functional(np.moveaxis(vals, 1, 2))  # (ncells, npts)
        u_max = np.asarray(u_pts).max(axis=1)
        u_bar = np.asarray(cfg.functional(wbar))
        viol = u_max > 0.0
        if np.any(viol & (u_bar >= 0.0)):
            i = int(np.argmax(viol & (u_bar >= 0.0)))
            raise RegionViolationError(
                f"cell average outside interior in cell {cell_label(i)}: U(wbar)={u_bar[i]!r}")
        with np.errstate(invalid="ignore", divide="ignore"):
            theta = np.where(viol, u_bar / (u_bar - u_max), 1.0)
        extrema = np.stack([u_max, u_max, u_max], axis=1)
        averages = np.stack([u_bar, u_bar, u_bar], axis=1)
    else:
        entropy = cfg.mode == "euler"
        rho_min, p_min, q_max = kernels.functional_minmax(vals, g.gamma, g.s0)
        rho_bar, p_bar, q_bar = kernels.cell_functionals(wbar, g.gamma, g.s0)
        theta, viol = _theta_vec(rho_bar, p_bar, q_bar, rho_min, p_min, q_max,
                                 cfg.epsilon, entropy)
        _check_averages(rho_bar, p_bar, q_bar, viol, cfg.epsilon, entropy, cell_label)
        extrema = np.stack([rho_min, p_min, q_max], axis=1)
        averages = np.stack([rho_bar, p_bar, q_bar], axis=1)

    theta = np.clip(theta, cfg.theta_clip, 1.0)
    limited = np.nonzero(theta < 1.0)[0]
    if limited.size:
        kernels.scale_modes(coeffs, theta)
    return theta, limited, extrema, averages


def limit_cell(poly, test_set, g: GasModel, cfg: LimiterConfig | None = None,
               step_index: int = 0, stage_index: int = 0):
    """Limit one cell polynomial; returns (limited poly, event or None).

    The polynomial's cell average is preserved to machine precision (mode 0
    is copied, not rescaled).
    """
    cfg = cfg or LimiterConfig(epsilon=g.epsilon)
    coeffs = np.ascontiguousarray(poly.coeffs.reshape(1, poly.coeffs.shape[0], -1)).copy()
    tm = poly.basis_matrix(test_set.points)  # (nmodes, npts)
    theta, limited, extrema, averages = _limit_coeffs(
        coeffs, tm, g, cfg, cell_label=lambda i: getattr(poly, "cell_id", 0))
    out = poly.with_coeffs(coeffs[0].reshape(poly.coeffs.shape))
    if limited.size == 0:
        return out, None
    ev = LimiterEvent(getattr(poly, "cell_id", 0), step_index, stage_index,
                      float(theta[0]), tuple(extrema[0].tolist()),
                      tuple(averages[0].tolist()))
    return out, ev


def limit_field(sol, cfg: LimiterConfig | None = None, step_index: int = 0,
                stage_index: int = 0, max_events: int | None = None) -> list[LimiterEvent]:
    """Limit every cell of a DG solution in place; returns events in cell order.

    Raises :class:`RegionViolationError`, naming the first offending cell,
    if a cell that needs limiting has an inadmissible average: under the
    scheme's CFL condition that cannot happen, so it indicates a broken
    time step or flux.  ``max_events`` truncates event materialization for
    long runs (limiting itself always covers every cell).
    """
    cfg = cfg or LimiterConfig(epsilon=sol.gas.epsilon)
    coeffs = sol.flat_coeffs()  # view: (ncells, nc, nmodes)
    tm = sol.test_value_matrix()

    def label(i):
        return sol.cell_index_label(i)

    theta, limited, extrema, averages = _limit_coeffs(coeffs, tm, sol.gas, cfg, label)
    if max_events is not None and limited.size > max_events:
        limited = limited[:max_events]
    return [
        LimiterEvent(label(i), step_index, stage_index, t, tuple(e), tuple(a))
        for i, t, e, a in zip(limited.tolist(), theta[limited].tolist(),
                              extrema[limited].tolist(), averages[limited].tolist())
    ]
