"""Vectorized numpy implementations of the hot per-step kernels.

These mirror the compiled core in ``_core.pyx`` exactly; states are
float64 arrays of shape (n, nc) with nc = 3 or 4 and component order
(rho, normal momentum[, tangential momentum], E).  None of these functions
validate admissibility: the solver guarantees it where needed, and the
limiter's extremum scan handles out-of-region samples via the -inf/+inf
conventions.
"""

import numpy as np

BACKEND = "numpy"


def phys_flux(w, gamma):
    """Flux of the (projected) 1D system; tangential momentum is passive."""
    rho = w[..., 0]
    mn = w[..., 1]
    en = w[..., -1]
    u = mn / rho
    if w.shape[-1] == 4:
        p = (gamma - 1.0) * (en - 0.5 * (mn * mn + w[..., 2] * w[..., 2]) / rho)
    else:
        p = (gamma - 1.0) * (en - 0.5 * mn * mn / rho)
    f = np.empty_like(w)
    f[..., 0] = mn
    f[..., 1] = mn * u + p
    if w.shape[-1] == 4:
        f[..., 2] = w[..., 2] * u
    f[..., -1] = (en + p) * u
    return f


def max_speed(w, gamma):
    """|u| + c per state, with p floored at zero for the sound speed."""
    rho = w[..., 0]
    mn = w[..., 1]
    if w.shape[-1] == 4:
        p = (gamma - 1.0) * (w[..., -1] - 0.5 * (mn**2 + w[..., 2] ** 2) / rho)
    else:
        p = (gamma - 1.0) * (w[..., -1] - 0.5 * mn**2 / rho)
    return np.abs(mn / rho) + np.sqrt(gamma * np.maximum(p, 0.0) / rho)


def lxf_flux(wl, wr, sigma, gamma):
    """Lax-Friedrichs flux 0.5*(f(wl) + f(wr) - sigma*(wr - wl)).

    ``sigma`` is a scalar (global variant) or per-interface array (local).
    """
    sig = np.asarray(sigma, dtype=float)
    if sig.ndim == 1:
        sig = sig[:, None]
    return 0.5 * (phys_flux(wl, gamma) + phys_flux(wr, gamma) - sig * (wr - wl))


def hll_flux(wl, wr, sl, sr, gamma):
    """Three-branch HLL flux for given leftmost/rightmost speed estimates."""
    fl = phys_flux(wl, gamma)
    fr = phys_flux(wr, gamma)
    sl_ = np.asarray(sl, dtype=float)[:, None]
    sr_ = np.asarray(sr, dtype=float)[:, None]
    denom = sr_ - sl_
    safe = np.where(denom == 0.0, 1.0, denom)
    middle = (sr_ * fl - sl_ * fr + sl_ * sr_ * (wr - wl)) / safe
    out = np.where(sl_ >= 0.0, fl, np.where(sr_ <= 0.0, fr, middle))
    return out


def _hllc_star(w, f, s, u, p, s_star, gamma):
    """Star state and flux on one side of the contact."""
    rho = w[..., 0]
    coef = rho * (s - u) / (s - s_star)
    wstar = np.empty_like(w)
    wstar[..., 0] = coef
    wstar[..., 1] = coef * s_star
    if w.shape[-1] == 4:
        wstar[..., 2] = coef * (w[..., 2] / rho)
    wstar[..., -1] = coef * (
        w[..., -1] / rho + (s_star - u) * (s_star + p / (rho * (s - u)))
    )
    return f + s[..., None] * (wstar - w)


def hllc_flux(wl, wr, sl, sr, gamma):
    """HLLC flux with a single star pressure; falls back to HLL where the
    contact-speed denominator degenerates."""
    rho_l, rho_r = wl[:, 0], wr[:, 0]
    ul = wl[:, 1] / rho_l
    ur = wr[:, 1] / rho_r
    if wl.shape[-1] == 4:
        pl = (gamma - 1.0) * (wl[:, -1] - 0.5 * (wl[:, 1] ** 2 + wl[:, 2] ** 2) / rho_l)
        pr = (gamma - 1.0) * (wr[:, -1] - 0.5 * (wr[:, 1] ** 2 + wr[:, 2] ** 2) / rho_r)
    else:
        pl = (gamma - 1.0) * (wl[:, -1] - 0.5 * wl[:, 1] ** 2 / rho_l)
        pr = (gamma - 1.0) * (wr[:, -1] - 0.5 * wr[:, 1] ** 2 / rho_r)

    sl_ = np.asarray(sl, dtype=float)
    sr_ = np.asarray(sr, dtype=float)
    dl = rho_l * (sl_ - ul)
    dr = rho_r * (sr_ - ur)
    denom = dl - dr
    degenerate = np.abs(denom) < 1e-300
    safe = np.where(degenerate, 1.0, denom)
    s_star = (pr - pl + ul * dl - ur * dr) / safe

    fl = phys_flux(wl, gamma)
    fr = phys_flux(wr, gamma)
    f_sl = _hllc_star(wl, fl, sl_, ul, pl, s_star, gamma)
    f_sr = _hllc_star(wr, fr, sr_, ur, pr, s_star, gamma)

    out = np.where(
        sl_[:, None] >= 0.0,
        fl,
        np.where(
            sr_[:, None] <= 0.0,
            fr,
            np.where(s_star[:, None] >= 0.0, f_sl, f_sr),
        ),
    )
    if np.any(degenerate):
        out = np.where(degenerate[:, None], hll_flux(wl, wr, sl_, sr_, gamma), out)
    return out


def phys_fluxes_2d(vals, gamma):
    """Both directional fluxes at once; ``vals`` has shape (n, 4, npts)."""
    rho = vals[:, 0]
    m = vals[:, 1]
    n_ = vals[:, 2]
    en = vals[:, 3]
    u = m / rho
    v = n_ / rho
    p = (gamma - 1.0) * (en - 0.5 * (m * u + n_ * v))
    f1 = np.empty_like(vals)
    f2 = np.empty_like(vals)
    f1[:, 0] = m
    f1[:, 1] = m * u + p
    f1[:, 2] = n_ * u
    f1[:, 3] = (en + p) * u
    f2[:, 0] = n_
    f2[:, 1] = m * v
    f2[:, 2] = n_ * v + p
    f2[:, 3] = (en + p) * v
    return f1, f2


def lxf_local_flux(wl, wr, gamma):
    """Local Lax-Friedrichs flux with its per-interface speed fused in."""
    sig = np.maximum(max_speed(wl, gamma), max_speed(wr, gamma))
    return lxf_flux(wl, wr, sig, gamma)


def hll_flux_davis(wl, wr, gamma):
    sl, sr = davis_speeds(wl, wr, gamma)
    return hll_flux(wl, wr, sl, sr, gamma)


def hllc_flux_davis(wl, wr, gamma):
    sl, sr = davis_speeds(wl, wr, gamma)
    return hllc_flux(wl, wr, sl, sr, gamma)


def speed_scan(vals, gamma):
    """Max |u_normal| + c and |u_tangential| + c over a (n, nc, npts) block.

    The tangential maximum is 0.0 for 3-component states.
    """
    rho = vals[:, 0]
    mn = vals[:, 1]
    if vals.shape[1] == 4:
        mt = vals[:, 2]
        p = (gamma - 1.0) * (vals[:, 3] - 0.5 * (mn**2 + mt**2) / rho)
        c = np.sqrt(gamma * np.maximum(p, 0.0) / rho)
        return float((np.abs(mn / rho) + c).max()), float((np.abs(mt / rho) + c).max())
    p = (gamma - 1.0) * (vals[:, 2] - 0.5 * mn**2 / rho)
    c = np.sqrt(gamma * np.maximum(p, 0.0) / rho)
    return float((np.abs(mn / rho) + c).max()), 0.0


def davis_speeds(wl, wr, gamma):
    """Davis-type leftmost/rightmost speed estimates (sl, sr)."""
    rho_l, rho_r = wl[:, 0], wr[:, 0]
    ul = wl[:, 1] / rho_l
    ur = wr[:, 1] / rho_r
    if wl.shape[-1] == 4:
        pl = (gamma - 1.0) * (wl[:, -1] - 0.5 * (wl[:, 1] ** 2 + wl[:, 2] ** 2) / rho_l)
        pr = (gamma - 1.0) * (wr[:, -1] - 0.5 * (wr[:, 1] ** 2 + wr[:, 2] ** 2) / rho_r)
    else:
        pl = (gamma - 1.0) * (wl[:, -1] - 0.5 * wl[:, 1] ** 2 / rho_l)
        pr = (gamma - 1.0) * (wr[:, -1] - 0.5 * wr[:, 1] ** 2 / rho_r)
    cl = np.sqrt(gamma * np.maximum(pl, 0.0) / rho_l)
    cr = np.sqrt(gamma * np.maximum(pr, 0.0) / rho_r)
    sl = np.minimum(ul - cl, ur - cr)
    sr = np.maximum(ul + cl, ur + cr)
    return sl, sr


def functional_minmax(vals, gamma, s0):
    """Per-cell extrema of the admissibility functionals.

    ``vals`` has shape (ncells, nc, npts).  Returns (rho_min, p_min, q_max)
    arrays; at samples where rho <= 0 the pressure is treated as -inf and
    the entropy functional as +inf, and q is +inf wherever p <= 0, so the
    extrema always witness inadmissible samples.
    """
    rho = vals[:, 0, :]
    mn = vals[:, 1, :]
    en = vals[:, -1, :]
    if vals.shape[1] == 4:
        kin = 0.5 * (mn**2 + vals[:, 2, :] ** 2)
    else:
        kin = 0.5 * mn**2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (gamma - 1.0) * (en - kin / rho)
        bad_rho = rho <= 0.0
        p = np.where(bad_rho, -np.inf, p)
        ok = ~bad_rho & (p > 0.0)
        q = np.where(ok, (s0 - (np.log(np.where(ok, p, 1.0)) - gamma * np.log(np.where(ok, rho, 1.0)))) * rho, np.inf)
    return rho.min(axis=1), p.min(axis=1), q.max(axis=1)


def cell_functionals(wbar, gamma, s0):
    """(rho, p, q) at cell averages, with the same out-of-region conventions."""
    rho = wbar[:, 0]
    mn = wbar[:, 1]
    en = wbar[:, -1]
    if wbar.shape[1] == 4:
        kin = 0.5 * (mn**2 + wbar[:, 2] ** 2)
    else:
        kin = 0.5 * mn**2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(rho == 0.0, -np.inf, (gamma - 1.0) * (en - kin / rho))
        ok = (rho > 0.0) & (p > 0.0)
        q = np.where(ok, (s0 - (np.log(np.where(ok, p, 1.0)) - gamma * np.log(np.where(ok, rho, 1.0)))) * rho, np.inf)
    return rho, p, q


def scale_modes(coeffs, theta):
    """In place: multiply every non-mean mode of each cell by its theta.

    ``coeffs`` has shape (ncells, nc, nmodes) with mode 0 the cell average.
    """
    coeffs[:, :, 1:] *= theta[:, None, None]
