"""Experiment driver: benchmark initial data, runs, norms and CSV artifacts.

Six experiment ids are built in:

    ex1-1d-accuracy        smooth 1D advected density wave, periodic
    ex2-2d-accuracy        smooth low-density 2D wave, periodic
    ex3-sod                Sod shock tube
    ex4-double-rarefaction near-vacuum double rarefaction
    ex5-config2 / ex5-config6   quadrant 2D Riemann problems
    custom                 resume from a checkpoint file

Everything an experiment writes (solution samples, limiter events, error
tables, checkpoints) is plain CSV with repr-formatted floats, so identical
specs produce byte-identical artifacts.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .euler import GasModel, conserved_1d, conserved_2d
from .fluxes import FLUX_TOKENS, exact_riemann, riemann_sample
from .limiter import LimiterConfig, write_events_csv
from .quadrature import gauss_legendre
from .solver import (
    CflPolicy,
    DGSolution,
    Mesh,
    basis_matrix,
    cfl_dt,
    estimate_entropy_floor,
    l2_project,
    load_checkpoint,
    save_checkpoint,
    ssp_rk3_step,
    total_mass,
)

__all__ = [
    "ExperimentSpec",
    "ErrorReport",
    "EXAMPLES",
    "build_solution",
    "run_simulation",
    "run_experiment",
    "exact_solution",
    "error_norms",
    "convergence_orders",
    "emit_plot_data",
    "contour_levels",
    "load_spec_config",
    "sample_at_centers",
]

GAMMA_DEFAULT = 1.4


# ---------------------------------------------------------------------------
# Example registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Example:
    dim: int
    xlim: tuple[float, float]
    ylim: tuple[float, float] | None
    bc: str  # periodic | transmissive
    tfinal: float
    initial: object  # primitive-variable callable
    has_exact: bool


def _ex1_prim(x):
    rho = 1.0 + 0.5 * np.sin(2.0 * np.pi * np.asarray(x))
    return rho, np.ones_like(rho), np.ones_like(rho)


def _ex2_prim(x, y):
    rho = 1.0 + 0.99 * np.sin(np.asarray(x) + np.asarray(y))
    one = np.ones_like(rho)
    return rho, one, one, one


SOD_LEFT = (1.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.1)
DR_LEFT = (1.0, -12.0, 1.0)
DR_RIGHT = (1.0, 12.0, 1.0)

# Quadrant primitive states (rho, u, v, p), quadrant order: x>1/2,y>1/2 then
# counterclockwise.
CONFIG2 = (
    (1.0, 0.0, 0.0, 1.0),
    (0.5197, -0.7259, 0.0, 0.4),
    (1.0, -0.7259, -0.7259, 1.0),
    (0.5197, 0.0, -0.7259, 0.4),
)
CONFIG6 = (
    (1.0, 0.75, -0.5, 1.0),
    (2.0, 0.75, 0.5, 1.0),
    (1.0, -0.75, 0.5, 1.0),
    (3.0, -0.75, -0.5, 1.0),
)


def _riemann_prim(left, right):
    def prim(x):
        x = np.asarray(x)
        pick = x < 0.0
        rho = np.where(pick, left[0], right[0])
        u = np.where(pick, left[1], right[1])
        p = np.where(pick, left[2], right[2])
        return rho, u, p

    return prim


def _quadrant_prim(states):
    def prim(x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        right = x >= 0.5
        top = y >= 0.5
        out = []
        for c in range(4):
            vals = (np.where(right & top, states[0][c],
                    np.where(~right & top, states[1][c],
                    np.where(~right & ~top, states[2][c], states[3][c]))))
            out.append(vals)
        return tuple(out)

    return prim


EXAMPLES = {
    "ex1-1d-accuracy": _Example(1, (0.0, 1.0), None, "periodic", 0.1, _ex1_prim, True),
    "ex2-2d-accuracy": _Example(2, (0.0, 2.0 * np.pi), (0.0, 2.0 * np.pi), "periodic",
                                0.1, _ex2_prim, True),
    "ex3-sod": _Example(1, (-0.5, 0.5), None, "transmissive", 0.16,
                        _riemann_prim(SOD_LEFT, SOD_RIGHT), True),
    # the rarefaction heads travel at |u| + c ~ 13.2, so +-4 keeps all waves
    # interior through T = 0.3
    "ex4-double-rarefaction": _Example(1, (-4.0, 4.0), None, "transmissive", 0.3,
                                       _riemann_prim(DR_LEFT, DR_RIGHT), True),
    "ex5-config2": _Example(2, (0.0, 1.0), (0.0, 1.0), "transmissive", 0.2,
                            _quadrant_prim(CONFIG2), False),
    "ex5-config6": _Example(2, (0.0, 1.0), (0.0, 1.0), "transmissive", 0.3,
                            _quadrant_prim(CONFIG6), False),
}

_SHORT_IDS = {"ex1": "ex1-1d-accuracy", "ex2": "ex2-2d-accuracy", "ex3": "ex3-sod",
              "ex4": "ex4-double-rarefaction"}


def _resolve_example(name: str) -> str:
    name = _SHORT_IDS.get(name, name)
    if name not in EXAMPLES and name != "custom":
        raise ValueError(f"unknown example {name!r}")
    return name


# ---------------------------------------------------------------------------
# Spec and config file
# ---------------------------------------------------------------------------


def _normalize_cells(cells):
    """Accept an int, a sweep of ints, or (nx, ny) pairs for 2D meshes."""
    if np.isscalar(cells):
        return (int(cells),)
    out = []
    for c in cells:
        if np.isscalar(c):
            out.append(int(c))
        else:
            pair = tuple(int(v) for v in c)
            if len(pair) != 2:
                raise ValueError("2D cell counts must be (nx, ny) pairs")
            out.append(pair)
    return tuple(out)


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce one experiment run or sweep."""

    example: str
    cells: tuple[int, ...]
    degree: int
    flux: str = "lxf-local"
    limiter: str = "irp"  # irp | positivity | off
    tfinal: float | None = None
    cfl: str = "practical"  # practical | theoretical
    dt_divisor: float | None = None
    safety: float = 1.0
    out_dir: str = "irpdg-out"
    gamma: float = GAMMA_DEFAULT
    epsilon: float = 1e-13
    seed: int = 0
    checkpoint: str | None = None

    def __post_init__(self):
        self.example = _resolve_example(self.example)
        self.cells = _normalize_cells(self.cells)
        flat = [v for c in self.cells for v in (c if isinstance(c, tuple) else (c,))]
        if any(n < 4 for n in flat):
            raise ValueError("mesh sizes must be >= 4")
        if self.flux not in FLUX_TOKENS:
            raise ValueError(f"unknown flux {self.flux!r}")
        if self.limiter not in ("irp", "positivity", "off"):
            raise ValueError(f"unknown limiter mode {self.limiter!r}")
        if self.tfinal is None and self.example != "custom":
            self.tfinal = EXAMPLES[self.example].tfinal
        if self.tfinal is None or self.tfinal <= 0.0:
            raise ValueError("final time must be positive")
        if self.example == "custom" and not self.checkpoint:
            raise ValueError("custom runs need a checkpoint file")


_SPEC_PARSERS = {
    "example": str, "cells": lambda s: tuple(int(v) for v in s.split(",")),
    "degree": int, "flux": str, "limiter": str, "tfinal": float, "cfl": str,
    "dt_divisor": float, "safety": float, "out_dir": str, "gamma": float,
    "epsilon": float, "seed": int, "checkpoint": str,
}


def load_spec_config(path) -> dict:
    """Parse a key=value experiment file; unknown keys are errors."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _SPEC_PARSERS:
            raise ValueError(f"{path}:{ln}: unknown key {key!r}")
        out[key] = _SPEC_PARSERS[key](val)
    return out


# ---------------------------------------------------------------------------
# Building and running
# ---------------------------------------------------------------------------


def _limiter_config(spec_like_mode: str, epsilon: float) -> LimiterConfig | None:
    if spec_like_mode == "off":
        return None
    mode = "euler" if spec_like_mode == "irp" else "positivity"
    return LimiterConfig(epsilon=epsilon, mode=mode)


def build_solution(example: str, n_cells, degree: int, gamma: float = GAMMA_DEFAULT,
                   epsilon: float = 1e-13) -> DGSolution:
    """Project an example's initial data and estimate its entropy floor."""
    example = _resolve_example(example)
    ex = EXAMPLES[example]
    gas = GasModel(gamma, epsilon)
    if ex.dim == 1:
        mesh = Mesh(ex.xlim, int(n_cells), bc_x=(ex.bc, ex.bc))

        def fn(x):
            return conserved_1d(*ex.initial(x), gas)

    else:
        nx, ny = (n_cells, n_cells) if np.isscalar(n_cells) else n_cells
        mesh = Mesh(ex.xlim, int(nx), ex.ylim, int(ny),
                    bc_x=(ex.bc, ex.bc), bc_y=(ex.bc, ex.bc))

        def fn(x, y):
            return conserved_2d(*ex.initial(x, y), gas)

    sol = l2_project(fn, mesh, degree, gas)
    sol.gas = gas.with_entropy_floor(estimate_entropy_floor(sol))
    return sol


@dataclass
class RunInfo:
    """Bookkeeping of one simulation run."""

    steps: int = 0
    events: list = field(default_factory=list)
    events_capped: bool = False
    runtime_s: float = 0.0
    mass_initial: np.ndarray | None = None
    mass_final: np.ndarray | None = None
    conservation_defect: float = 0.0  # |dM - boundary flux integral|, relative


def run_simulation(sol: DGSolution, tfinal: float, flux: str, limiter_mode: str,
                   cfl_mode: str = "practical", dt_divisor: float | None = None,
                   safety: float = 1.0, audit_conservation: bool = True,
                   max_steps: int = 10_000_000, event_cap: int = 200_000) -> RunInfo:
    """Advance ``sol`` in place to ``tfinal``; returns run diagnostics.

    The conservation audit accumulates the RK-weighted discrete boundary
    flux and reports the worst relative defect between the mass change and
    that integral (zero defect means exactly conservative bookkeeping).
    Event recording stops after ``event_cap`` entries; limiting itself is
    unaffected.
    """
    policy = CflPolicy(mode=cfl_mode, safety=safety, dt_divisor=dt_divisor)
    cfg = _limiter_config(limiter_mode, sol.gas.epsilon)
    info = RunInfo()
    if cfg is not None:
        from .limiter import limit_field

        info.events.extend(limit_field(sol, cfg, step_index=-1, stage_index=0,
                                       max_events=event_cap))
    info.mass_initial = total_mass(sol)
    mass_ref = float(np.max(np.abs(info.mass_initial))) or 1.0
    expected = np.zeros_like(info.mass_initial)
    t0 = _time.perf_counter()
    while sol.time < tfinal - 1e-14:
        dt = min(cfl_dt(sol, policy, flux), tfinal - sol.time)
        budget = event_cap - len(info.events)
        if budget <= 0:
            info.events_capped = True
            budget = 0
        if audit_conservation:
            events, dmass = ssp_rk3_step(sol, dt, flux, cfg, info.steps,
                                         collect_boundary_flux=True, max_events=budget)
            expected += dmass
            defect = np.max(np.abs(total_mass(sol) - info.mass_initial - expected))
            info.conservation_defect = max(info.conservation_defect, defect / mass_ref)
        else:
            events = ssp_rk3_step(sol, dt, flux, cfg, info.steps, max_events=budget)
        info.events.extend(events)
        info.steps += 1
        if info.steps > max_steps:
            raise RuntimeError("step limit exceeded")
    info.mass_final = total_mass(sol)
    info.runtime_s = _time.perf_counter() - t0
    return info


# ---------------------------------------------------------------------------
# Exact solutions
# ---------------------------------------------------------------------------


def _vacuum_double_rarefaction(xi, left, right, g: GasModel):
    """Closed-form sample of the symmetric vacuum-forming Riemann solution."""
    rho_l, u_l, p_l = left
    rho_r, u_r, p_r = right
    gamma = g.gamma
    cl = math.sqrt(gamma * p_l / rho_l)
    cr = math.sqrt(gamma * p_r / rho_r)
    s_hl = u_l - cl
    s_hr = u_r + cr
    s_vl = u_l + 2.0 * cl / (gamma - 1.0)  # vacuum front speeds
    s_vr = u_r - 2.0 * cr / (gamma - 1.0)

    if xi <= s_hl:
        rho, u, p = rho_l, u_l, p_l
    elif xi < s_vl:
        fac = 2.0 / (gamma + 1.0) + (gamma - 1.0) / ((gamma + 1.0) * cl) * (u_l - xi)
        rho = rho_l * fac ** (2.0 / (gamma - 1.0))
        u = 2.0 / (gamma + 1.0) * (cl + 0.5 * (gamma - 1.0) * u_l + xi)
        p = p_l * fac ** (2.0 * gamma / (gamma - 1.0))
    elif xi <= s_vr:
        rho, u, p = 0.0, 0.0, 0.0
    elif xi < s_hr:
        fac = 2.0 / (gamma + 1.0) - (gamma - 1.0) / ((gamma + 1.0) * cr) * (u_r - xi)
        rho = rho_r * fac ** (2.0 / (gamma - 1.0))
        u = 2.0 / (gamma + 1.0) * (-cr + 0.5 * (gamma - 1.0) * u_r + xi)
        p = p_r * fac ** (2.0 * gamma / (gamma - 1.0))
    else:
        rho, u, p = rho_r, u_r, p_r
    en = p / (gamma - 1.0) + 0.5 * rho * u * u
    return np.array([rho, rho * u, en])


def exact_solution(example: str, x, t: float, g: GasModel, y=None) -> np.ndarray:
    """Pointwise exact state of an example at time t.

    Smooth examples use the closed form; the shock-tube examples sample the
    exact Riemann solution at x/t.  ex5 has no closed form.
    """
    example = _resolve_example(example)
    if example == "ex1-1d-accuracy":
        rho = 1.0 + 0.5 * np.sin(2.0 * np.pi * (np.asarray(x) - t))
        return conserved_1d(rho, np.ones_like(rho), np.ones_like(rho), g)
    if example == "ex2-2d-accuracy":
        rho = 1.0 + 0.99 * np.sin(np.asarray(x) + np.asarray(y) - 2.0 * t)
        one = np.ones_like(rho)
        return conserved_2d(rho, one, one, one, g)
    if example == "ex3-sod":
        wl = conserved_1d(*SOD_LEFT, g)
        wr = conserved_1d(*SOD_RIGHT, g)
        if t == 0.0:
            return np.where((np.asarray(x) < 0.0)[..., None], wl, wr)
        star = exact_riemann(wl, wr, g)
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.stack([riemann_sample(star, wl, wr, xi / t, g) for xi in xs])
        return out[0] if scalar else out
    if example == "ex4-double-rarefaction":
        if t == 0.0:
            wl = conserved_1d(*DR_LEFT, g)
            wr = conserved_1d(*DR_RIGHT, g)
            return np.where((np.asarray(x) < 0.0)[..., None], wl, wr)
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.stack([_vacuum_double_rarefaction(xi / t, DR_LEFT, DR_RIGHT, g) for xi in xs])
        return out[0] if scalar else out
    raise ValueError(f"no exact solution available for {example!r}")


# ---------------------------------------------------------------------------
# Norms, orders, emitters
# ---------------------------------------------------------------------------


def error_norms(sol: DGSolution, example: str) -> tuple[float, float]:
    """(Linf, L1) density error against the exact solution.

    Both norms are measured on a per-cell Gauss grid whose rule is exact
    past degree 2k + 2; L1 is the quadrature integral of |rho_h - rho|.
    """
    example = _resolve_example(example)
    k = sol.degree
    rule = gauss_legendre(k + 2)
    bm = basis_matrix(k, rule.nodes)
    m = sol.mesh
    if m.dim == 1:
        x = m.x_centers[:, None] + m.dx * rule.nodes[None, :]
        num = (sol.coeffs @ bm)[:, 0, :]  # density values (nx, nq)
        exact = exact_solution(example, x.ravel(), sol.time, sol.gas).reshape(x.shape + (3,))[..., 0]
        err = np.abs(num - exact)
        l1 = float(np.sum(err @ rule.weights) * m.dx)
        return float(err.max()), l1
    x = m.x_centers[:, None] + m.dx * rule.nodes[None, :]
    y = m.y_centers[:, None] + m.dy * rule.nodes[None, :]
    a = np.tensordot(sol.coeffs, bm, axes=([3], [0]))
    num = np.tensordot(a, bm, axes=([3], [0]))[:, :, 0]  # (nx, ny, qa, qb)
    exact = exact_solution(example, x[:, None, :, None], sol.time, sol.gas,
                           y=y[None, :, None, :])[..., 0]
    err = np.abs(num - exact)
    l1 = float(np.einsum("xyab,a,b->", err, rule.weights, rule.weights) * m.dx * m.dy)
    return float(err.max()), l1


def convergence_orders(errors) -> list[float]:
    """log2 error ratios between consecutive meshes (sizes doubling)."""
    errors = list(errors)
    return [math.log2(errors[i - 1] / errors[i]) for i in range(1, len(errors))]


@dataclass
class ErrorReport:
    """Per-mesh errors, observed orders and runtimes of one sweep."""

    cells: list[int] = field(default_factory=list)
    linf: list[float] = field(default_factory=list)
    l1: list[float] = field(default_factory=list)
    runtime_s: list[float] = field(default_factory=list)

    @property
    def linf_orders(self) -> list[float]:
        return convergence_orders(self.linf)

    @property
    def l1_orders(self) -> list[float]:
        return convergence_orders(self.l1)

    def markdown(self) -> str:
        lines = ["| N | Linf error | order | L1 error | order | runtime [s] |",
                 "|---|-----------|-------|----------|-------|-------------|"]
        for i, n in enumerate(self.cells):
            lo = f"{self.linf_orders[i - 1]:.2f}" if i else "-"
            l1o = f"{self.l1_orders[i - 1]:.2f}" if i else "-"
            lines.append(f"| {n} | {self.linf[i]:.3e} | {lo} | {self.l1[i]:.3e} |"
                         f" {l1o} | {self.runtime_s[i]:.2f} |")
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("cells,linf,linf_order,l1,l1_order,runtime_s\n")
            for i, n in enumerate(self.cells):
                lo = repr(self.linf_orders[i - 1]) if i else ""
                l1o = repr(self.l1_orders[i - 1]) if i else ""
                fh.write(f"{n},{self.linf[i]!r},{lo},{self.l1[i]!r},{l1o},"
                         f"{self.runtime_s[i]:.3f}\n")


def sample_at_centers(sol: DGSolution) -> dict[str, np.ndarray]:
    """Pointwise solution fields at the cell centers (for line/contour data)."""
    k = sol.degree
    g = sol.gas
    phi0 = basis_matrix(k, np.array([0.0]))[:, 0]
    m = sol.mesh
    if m.dim == 1:
        w = sol.coeffs @ phi0  # (nx, 3)
        rho, mn, en = w[:, 0], w[:, 1], w[:, 2]
        u = mn / rho
        p = (g.gamma - 1.0) * (en - 0.5 * mn * u)
        out = {"x": m.x_centers, "rho": rho, "u": u, "p": p}
    else:
        a = np.tensordot(sol.coeffs, phi0, axes=([3], [0]))
        w = np.tensordot(a, phi0, axes=([3], [0]))  # (nx, ny, 4)
        rho = w[..., 0]
        u = w[..., 1] / rho
        v = w[..., 2] / rho
        p = (g.gamma - 1.0) * (w[..., 3] - 0.5 * rho * (u**2 + v**2))
        xg, yg = np.meshgrid(m.x_centers, m.y_centers, indexing="ij")
        out = {"x": xg.ravel(), "y": yg.ravel(), "rho": rho.ravel(),
               "u": u.ravel(), "v": v.ravel(), "p": p.ravel()}
        rho, p = out["rho"], out["p"]
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (np.asarray(out["rho"]) > 0.0) & (np.asarray(out["p"]) > 0.0)
        s = np.where(ok, np.log(np.where(ok, out["p"], 1.0))
                     - g.gamma * np.log(np.where(ok, out["rho"], 1.0)), np.nan)
    out["s"] = s
    out["q"] = np.where(np.isnan(s), np.nan, (g.s0 - s) * out["rho"])
    return out


def emit_plot_data(sol: DGSolution, path) -> None:
    """Write center-sampled fields as CSV: x[,y],rho,u[,v],p,s,q."""
    data = sample_at_centers(sol)
    cols = (["x", "rho", "u", "p", "s", "q"] if sol.mesh.dim == 1
            else ["x", "y", "rho", "u", "v", "p", "s", "q"])
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        arrays = [np.asarray(data[c]).ravel() for c in cols]
        for row in zip(*arrays):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def contour_levels(sol: DGSolution, n_levels: int = 30) -> np.ndarray:
    """Equally spaced contour levels spanning the density range."""
    rho = sample_at_centers(sol)["rho"]
    return np.linspace(float(np.min(rho)), float(np.max(rho)), n_levels)


# ---------------------------------------------------------------------------
# Top-level experiment runner
# ---------------------------------------------------------------------------


def run_experiment(spec: ExperimentSpec) -> ErrorReport:
    """Run (or sweep) one experiment and write its artifacts.

    Per mesh size N, ``<out_dir>/N<N>/`` receives solution.csv,
    limiter_events.csv, checkpoint.csv and (2D) levels.csv; sweeps with an
    exact solution also get error_report.csv and table.md at the top level.
    """
    out_root = Path(spec.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    report = ErrorReport()
    for n in spec.cells:
        if spec.example == "custom":
            sol = load_checkpoint(spec.checkpoint)
            sol.gas = replace(sol.gas, gamma=spec.gamma) if spec.gamma != sol.gas.gamma else sol.gas
        else:
            sol = build_solution(spec.example, n, spec.degree, spec.gamma, spec.epsilon)
        info = run_simulation(sol, spec.tfinal, spec.flux, spec.limiter,
                              cfl_mode=spec.cfl, dt_divisor=spec.dt_divisor,
                              safety=spec.safety)
        case_dir = out_root / (f"N{n[0]}x{n[1]}" if isinstance(n, tuple) else f"N{n}")
        case_dir.mkdir(parents=True, exist_ok=True)
        emit_plot_data(sol, case_dir / "solution.csv")
        write_events_csv(info.events, case_dir / "limiter_events.csv")
        save_checkpoint(sol, case_dir / "checkpoint.csv")
        if sol.mesh.dim == 2:
            np.savetxt(case_dir / "levels.csv", contour_levels(sol), fmt="%r")
        with open(case_dir / "run_info.txt", "w") as fh:
            fh.write(f"example={spec.example} cells={n} degree={spec.degree} "
                     f"flux={spec.flux} limiter={spec.limiter} tfinal={spec.tfinal!r}\n")
            fh.write(f"steps={info.steps} runtime_s={info.runtime_s:.3f} "
                     f"events={len(info.events)} s0={sol.gas.s0!r}\n")
            fh.write(f"conservation_defect={info.conservation_defect!r}\n")
        if spec.example != "custom" and EXAMPLES[spec.example].has_exact:
            linf, l1 = error_norms(sol, spec.example)
            report.cells.append(n)
            report.linf.append(linf)
            report.l1.append(l1)
            report.runtime_s.append(info.runtime_s)
    if report.cells:
        report.write_csv(out_root / "error_report.csv")
        (out_root / "table.md").write_text(report.markdown() + "\n")
    return report
