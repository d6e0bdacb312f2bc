"""Numerical interface fluxes and the exact Riemann solver.

Five interface fluxes are provided, selectable by token:

    lxf-global  global Lax-Friedrichs          (region-preserving, c0 = 1)
    lxf-local   local Lax-Friedrichs           (c0 = 1/2)
    hll         two-wave approximate solver    (c0 = 1/2)
    hllc        three-wave, contact restored   (c0 = 1/2)
    godunov     exact-Riemann interface state  (c0 = 1)

c0 is the flux-dependent CFL constant under which a first-order step keeps
admissible data admissible.  Pair-level functions accept 3-component states
or 4-component rotated states (tangential momentum advected passively);
array-level entry points feed the kernel backend.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np

from . import _kernels as kernels
from .euler import GasModel, VacuumStateError, flux_1d, pressure

__all__ = [
    "WaveSpeedEstimate",
    "RiemannStarState",
    "VacuumFormationError",
    "NewtonConvergenceError",
    "FLUX_TOKENS",
    "cfl_constant",
    "lxf_global",
    "lxf_local",
    "hll",
    "hllc",
    "godunov",
    "hllc_wavespeeds",
    "exact_riemann",
    "riemann_sample",
    "exact_signal_speeds",
    "flux_interfaces",
    "interface_flux_2d",
]

log = logging.getLogger(__name__)

FLUX_TOKENS = ("lxf-global", "lxf-local", "hll", "hllc", "godunov")

# CFL constant c0 per flux token.
_C0 = {
    "lxf-global": 1.0,
    "lxf-local": 0.5,
    "hll": 0.5,
    "hllc": 0.5,
    "godunov": 1.0,
}


class VacuumFormationError(ValueError):
    """Riemann data violating the pressure positivity condition."""


class NewtonConvergenceError(RuntimeError):
    """Star-pressure iteration failed to converge."""


class WaveSpeedEstimate(NamedTuple):
    """Leftmost/rightmost (and optionally contact) signal speeds."""

    sigma_l: float
    sigma_r: float
    sigma_star: float | None = None


class RiemannStarState(NamedTuple):
    """Pressure, contact speed and contact-adjacent densities."""

    p_star: float
    u_star: float
    rho_star_l: float
    rho_star_r: float


def cfl_constant(token: str) -> float:
    if token not in _C0:
        raise ValueError(f"unknown flux token {token!r}; choose from {FLUX_TOKENS}")
    return _C0[token]


def _check_nonvacuum(*states, g: GasModel):
    for w in states:
        w = np.asarray(w, dtype=float)
        if w[0] <= 0.0:
            raise VacuumStateError("flux undefined: rho <= 0")
        if pressure(w, g) < 0.0:
            raise VacuumStateError("flux undefined: p < 0")


def _pair(wl, wr):
    wl = np.asarray(wl, dtype=float)[None, :]
    wr = np.asarray(wr, dtype=float)[None, :]
    return wl, wr


def lxf_global(wl, wr, sigma: float, g: GasModel) -> np.ndarray:
    """Global Lax-Friedrichs flux; sigma must dominate both local speeds."""
    _check_nonvacuum(wl, wr, g=g)
    a, b = _pair(wl, wr)
    return kernels.lxf_flux(a, b, float(sigma), g.gamma)[0]


def lxf_local(wl, wr, g: GasModel) -> np.ndarray:
    """Local Lax-Friedrichs flux (HLL with symmetric speed estimates)."""
    _check_nonvacuum(wl, wr, g=g)
    a, b = _pair(wl, wr)
    sig = np.maximum(kernels.max_speed(a, g.gamma), kernels.max_speed(b, g.gamma))
    return kernels.lxf_flux(a, b, sig, g.gamma)[0]


def hll(wl, wr, est: WaveSpeedEstimate, g: GasModel) -> np.ndarray:
    """Two-wave flux with caller-supplied signal speed estimates."""
    if est.sigma_l > est.sigma_r:
        raise ValueError("wave speed estimate must satisfy sigma_l <= sigma_r")
    _check_nonvacuum(wl, wr, g=g)
    a, b = _pair(wl, wr)
    return kernels.hll_flux(
        a, b, np.array([est.sigma_l]), np.array([est.sigma_r]), g.gamma
    )[0]


def hllc_wavespeeds(wl, wr, g: GasModel) -> WaveSpeedEstimate:
    """Davis-type bounds plus the momentum-balance contact speed."""
    _check_nonvacuum(wl, wr, g=g)
    a, b = _pair(wl, wr)
    sl, sr = kernels.davis_speeds(a, b, g.gamma)
    rho_l, rho_r = a[0, 0], b[0, 0]
    ul, ur = a[0, 1] / rho_l, b[0, 1] / rho_r
    pl = float(pressure(a[0], g))
    pr = float(pressure(b[0], g))
    dl = rho_l * (sl[0] - ul)
    dr = rho_r * (sr[0] - ur)
    if dl == dr:
        star = 0.5 * (ul + ur)
    else:
        star = (pr - pl + ul * dl - ur * dr) / (dl - dr)
    return WaveSpeedEstimate(float(sl[0]), float(sr[0]), float(star))


def hllc(wl, wr, g: GasModel) -> np.ndarray:
    """Three-wave flux with a single star pressure.

    The star states are the integral averages of the Riemann fan on each
    side of the contact, so the two intermediate fluxes satisfy
    f_*r = f_*l + sigma_* (w_*r - w_*l).  A degenerate contact-speed
    denominator falls back to the HLL average (and is logged).
    """
    _check_nonvacuum(wl, wr, g=g)
    a, b = _pair(wl, wr)
    sl, sr = kernels.davis_speeds(a, b, g.gamma)
    rho_l, rho_r = a[0, 0], b[0, 0]
    dl = rho_l * (sl[0] - a[0, 1] / rho_l)
    dr = rho_r * (sr[0] - b[0, 1] / rho_r)
    if abs(dl - dr) < 1e-300 and sl[0] < 0.0 < sr[0]:
        log.warning("hllc contact speed degenerate (%r == %r); using hll", dl, dr)
    return kernels.hllc_flux(a, b, sl, sr, g.gamma)[0]


# ---------------------------------------------------------------------------
# Exact Riemann solver (also the Godunov kernel)
# ---------------------------------------------------------------------------


def _primitive(w, g: GasModel):
    w = np.asarray(w, dtype=float)
    rho = float(w[0])
    if rho <= 0.0:
        raise VacuumStateError("Riemann data must have rho > 0")
    u = float(w[1]) / rho
    p = float(pressure(w, g))
    if p <= 0.0:
        raise VacuumStateError("Riemann data must have p > 0")
    return rho, u, p


def _pressure_fn_side(p, rho_k, p_k, c_k, gamma):
    """Single-wave contribution f_K(p) and its derivative."""
    if p > p_k:  # shock branch (Rankine-Hugoniot)
        ak = 2.0 / ((gamma + 1.0) * rho_k)
        bk = (gamma - 1.0) / (gamma + 1.0) * p_k
        root = math.sqrt(ak / (p + bk))
        f = (p - p_k) * root
        df = root * (1.0 - 0.5 * (p - p_k) / (p + bk))
    else:  # rarefaction branch (isentropic)
        ex = (gamma - 1.0) / (2.0 * gamma)
        f = 2.0 * c_k / (gamma - 1.0) * ((p / p_k) ** ex - 1.0)
        df = (p / p_k) ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho_k * c_k)
    return f, df


def pressure_function(p, wl, wr, g: GasModel) -> float:
    """Residual whose root is the star pressure: f_l(p) + f_r(p) + (ur - ul)."""
    rho_l, ul, pl = _primitive(wl, g)
    rho_r, ur, pr = _primitive(wr, g)
    cl = math.sqrt(g.gamma * pl / rho_l)
    cr = math.sqrt(g.gamma * pr / rho_r)
    fl, _ = _pressure_fn_side(p, rho_l, pl, cl, g.gamma)
    fr, _ = _pressure_fn_side(p, rho_r, pr, cr, g.gamma)
    return fl + fr + (ur - ul)


def _guess_p(rho_l, ul, pl, cl, rho_r, ur, pr, cr, gamma):
    """Adaptive initial guess (PVRS / two-rarefaction / two-shock)."""
    p_pv = 0.5 * (pl + pr) - 0.125 * (ur - ul) * (rho_l + rho_r) * (cl + cr)
    p_min, p_max = min(pl, pr), max(pl, pr)
    if p_max / p_min <= 2.0 and p_min <= p_pv <= p_max:
        return max(p_pv, 1e-14)
    if p_pv < p_min:  # two rarefactions
        ex = (gamma - 1.0) / (2.0 * gamma)
        num = cl + cr - 0.5 * (gamma - 1.0) * (ur - ul)
        den = cl / pl**ex + cr / pr**ex
        return max((num / den) ** (1.0 / ex), 1e-14)
    # two shocks, with PVRS pressure inside the mass-flux estimates
    gl = math.sqrt((2.0 / ((gamma + 1.0) * rho_l)) / (max(p_pv, 0.0) + (gamma - 1.0) / (gamma + 1.0) * pl))
    gr = math.sqrt((2.0 / ((gamma + 1.0) * rho_r)) / (max(p_pv, 0.0) + (gamma - 1.0) / (gamma + 1.0) * pr))
    return max((gl * pl + gr * pr - (ur - ul)) / (gl + gr), 1e-14)


def exact_riemann(wl, wr, g: GasModel, tol: float = 1e-12, max_iter: int = 100) -> RiemannStarState:
    """Solve the Riemann problem for the star region by Newton iteration.

    Raises ``VacuumFormationError`` when the data generate a vacuum (the
    pressure positivity condition fails) and ``NewtonConvergenceError``
    after ``max_iter`` steps without |dp|/p < tol.
    """
    rho_l, ul, pl = _primitive(wl, g)
    rho_r, ur, pr = _primitive(wr, g)
    gamma = g.gamma
    cl = math.sqrt(gamma * pl / rho_l)
    cr = math.sqrt(gamma * pr / rho_r)

    if 2.0 * (cl + cr) / (gamma - 1.0) <= ur - ul:
        raise VacuumFormationError("vacuum formation: pressure positivity condition violated")

    p = _guess_p(rho_l, ul, pl, cl, rho_r, ur, pr, cr, gamma)
    for _ in range(max_iter):
        fl, dfl = _pressure_fn_side(p, rho_l, pl, cl, gamma)
        fr, dfr = _pressure_fn_side(p, rho_r, pr, cr, gamma)
        delta = (fl + fr + (ur - ul)) / (dfl + dfr)
        p_new = p - delta
        if p_new <= 0.0:
            p_new = 0.5 * p  # bisect toward zero instead of leaving the domain
        if abs(p_new - p) / p_new < tol:
            p = p_new
            break
        p = p_new
    else:
        raise NewtonConvergenceError(f"no convergence after {max_iter} iterations")

    fl, _ = _pressure_fn_side(p, rho_l, pl, cl, gamma)
    fr, _ = _pressure_fn_side(p, rho_r, pr, cr, gamma)
    u_star = 0.5 * (ul + ur) + 0.5 * (fr - fl)

    gm = (gamma - 1.0) / (gamma + 1.0)
    if p > pl:
        rho_sl = rho_l * (p / pl + gm) / (gm * p / pl + 1.0)
    else:
        rho_sl = rho_l * (p / pl) ** (1.0 / gamma)
    if p > pr:
        rho_sr = rho_r * (p / pr + gm) / (gm * p / pr + 1.0)
    else:
        rho_sr = rho_r * (p / pr) ** (1.0 / gamma)
    return RiemannStarState(p, u_star, rho_sl, rho_sr)


def exact_signal_speeds(star: RiemannStarState, wl, wr, g: GasModel) -> WaveSpeedEstimate:
    """True leftmost/rightmost signal speeds of the solved Riemann fan."""
    rho_l, ul, pl = _primitive(wl, g)
    rho_r, ur, pr = _primitive(wr, g)
    gamma = g.gamma
    cl = math.sqrt(gamma * pl / rho_l)
    cr = math.sqrt(gamma * pr / rho_r)
    if star.p_star > pl:
        sl = ul - cl * math.sqrt((gamma + 1.0) / (2.0 * gamma) * star.p_star / pl
                                 + (gamma - 1.0) / (2.0 * gamma))
    else:
        sl = ul - cl
    if star.p_star > pr:
        sr = ur + cr * math.sqrt((gamma + 1.0) / (2.0 * gamma) * star.p_star / pr
                                 + (gamma - 1.0) / (2.0 * gamma))
    else:
        sr = ur + cr
    return WaveSpeedEstimate(sl, sr, star.u_star)


def riemann_sample(star: RiemannStarState, wl, wr, xi: float, g: GasModel) -> np.ndarray:
    """Sample the self-similar solution at xi = x/t.

    Returns a conserved state with the same component count as the inputs;
    a passive tangential momentum component is taken from the upwind side
    of the contact.
    """
    wl = np.asarray(wl, dtype=float)
    wr = np.asarray(wr, dtype=float)
    rho_l, ul, pl = _primitive(wl, g)
    rho_r, ur, pr = _primitive(wr, g)
    gamma = g.gamma
    cl = math.sqrt(gamma * pl / rho_l)
    cr = math.sqrt(gamma * pr / rho_r)
    p, us = star.p_star, star.u_star

    if xi <= us:  # left of the contact
        vt = wl[2] / wl[0] if wl.size == 4 else None
        if p > pl:  # left shock
            s = ul - cl * math.sqrt((gamma + 1.0) / (2.0 * gamma) * p / pl
                                    + (gamma - 1.0) / (2.0 * gamma))
            rho, u, pp = (rho_l, ul, pl) if xi < s else (star.rho_star_l, us, p)
        else:  # left rarefaction
            head = ul - cl
            c_sl = cl * (p / pl) ** ((gamma - 1.0) / (2.0 * gamma))
            tail = us - c_sl
            if xi < head:
                rho, u, pp = rho_l, ul, pl
            elif xi < tail:
                fac = (2.0 / (gamma + 1.0) + (gamma - 1.0) / ((gamma + 1.0) * cl) * (ul - xi))
                rho = rho_l * fac ** (2.0 / (gamma - 1.0))
                u = 2.0 / (gamma + 1.0) * (cl + 0.5 * (gamma - 1.0) * ul + xi)
                pp = pl * fac ** (2.0 * gamma / (gamma - 1.0))
            else:
                rho, u, pp = star.rho_star_l, us, p
    else:  # right of the contact
        vt = wr[2] / wr[0] if wr.size == 4 else None
        if p > pr:  # right shock
            s = ur + cr * math.sqrt((gamma + 1.0) / (2.0 * gamma) * p / pr
                                    + (gamma - 1.0) / (2.0 * gamma))
            rho, u, pp = (rho_r, ur, pr) if xi > s else (star.rho_star_r, us, p)
        else:  # right rarefaction
            head = ur + cr
            c_sr = cr * (p / pr) ** ((gamma - 1.0) / (2.0 * gamma))
            tail = us + c_sr
            if xi > head:
                rho, u, pp = rho_r, ur, pr
            elif xi > tail:
                fac = (2.0 / (gamma + 1.0) - (gamma - 1.0) / ((gamma + 1.0) * cr) * (ur - xi))
                rho = rho_r * fac ** (2.0 / (gamma - 1.0))
                u = 2.0 / (gamma + 1.0) * (-cr + 0.5 * (gamma - 1.0) * ur + xi)
                pp = pr * fac ** (2.0 * gamma / (gamma - 1.0))
            else:
                rho, u, pp = star.rho_star_r, us, p

    if vt is None:
        en = pp / (gamma - 1.0) + 0.5 * rho * u**2
        return np.array([rho, rho * u, en])
    en = pp / (gamma - 1.0) + 0.5 * rho * (u**2 + vt**2)
    return np.array([rho, rho * u, rho * vt, en])


def godunov(wl, wr, g: GasModel) -> np.ndarray:
    """Physical flux of the exact Riemann solution sampled at xi = 0."""
    star = exact_riemann(wl, wr, g)
    w0 = riemann_sample(star, wl, wr, 0.0, g)
    if w0.size == 4:
        rho, mn, mt, en = w0
        p = (g.gamma - 1.0) * (en - 0.5 * (mn**2 + mt**2) / rho)
        u = mn / rho
        return np.array([mn, mn * u + p, mt * u, (en + p) * u])
    return flux_1d(w0, g)


# ---------------------------------------------------------------------------
# Array-level entry points used by the solver
# ---------------------------------------------------------------------------


def flux_interfaces(token: str, wl: np.ndarray, wr: np.ndarray, g: GasModel,
                    sigma_global: float | None = None) -> np.ndarray:
    """Numerical flux at many interfaces at once; states shape (n, nc)."""
    wl = np.ascontiguousarray(wl, dtype=float)
    wr = np.ascontiguousarray(wr, dtype=float)
    if token == "lxf-global":
        if sigma_global is None:
            sigma_global = float(
                max(kernels.max_speed(wl, g.gamma).max(), kernels.max_speed(wr, g.gamma).max())
            )
        return kernels.lxf_flux(wl, wr, float(sigma_global), g.gamma)
    if token == "lxf-local":
        return kernels.lxf_local_flux(wl, wr, g.gamma)
    if token == "hll":
        return kernels.hll_flux_davis(wl, wr, g.gamma)
    if token == "hllc":
        return kernels.hllc_flux_davis(wl, wr, g.gamma)
    if token == "godunov":
        out = np.empty_like(wl)
        for i in range(wl.shape[0]):
            out[i] = godunov(wl[i], wr[i], g)
        return out
    raise ValueError(f"unknown flux token {token!r}; choose from {FLUX_TOKENS}")


def interface_flux_2d(token: str, wl: np.ndarray, wr: np.ndarray, nu, g: GasModel,
                      sigma_global: float | None = None) -> np.ndarray:
    """2D interface flux: rotate into the normal frame, apply the 1D flux
    with the tangential momentum advected passively, rotate back."""
    from .euler import rotate_from_normal, rotate_to_normal

    a = rotate_to_normal(wl, nu)
    b = rotate_to_normal(wr, nu)
    f = flux_interfaces(token, a.reshape(-1, 4), b.reshape(-1, 4), g, sigma_global)
    return rotate_from_normal(f.reshape(wl.shape), nu)
