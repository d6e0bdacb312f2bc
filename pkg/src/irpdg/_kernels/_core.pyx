# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel core; one-to-one with ``numpy_backend``.

States are C-contiguous float64 arrays of shape (n, nc), nc = 3 or 4, with
component order (rho, normal momentum[, tangential momentum], E).  The hot
loops are written with scalar locals and no helper calls: Cython struct or
pointer helpers defeat inlining and cost an order of magnitude here.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin, log, sqrt

cnp.import_array()

BACKEND = "cython"


def phys_flux(const double[:, ::1] w, double gamma):
    cdef Py_ssize_t n = w.shape[0]
    cdef int nc = <int> w.shape[1]
    out = np.empty((n, nc))
    cdef double[:, ::1] f = out
    cdef Py_ssize_t i
    cdef double rho, m, mt, en, inv, u, p
    with nogil:
        for i in range(n):
            rho = w[i, 0]
            m = w[i, 1]
            mt = w[i, 2] if nc == 4 else 0.0
            en = w[i, nc - 1]
            inv = 1.0 / rho
            u = m * inv
            p = (gamma - 1.0) * (en - 0.5 * (m * u + mt * mt * inv))
            f[i, 0] = m
            f[i, 1] = m * u + p
            if nc == 4:
                f[i, 2] = mt * u
            f[i, nc - 1] = (en + p) * u
    return out


def max_speed(const double[:, ::1] w, double gamma):
    cdef Py_ssize_t n = w.shape[0]
    cdef int nc = <int> w.shape[1]
    out = np.empty(n)
    cdef double[::1] sp = out
    cdef Py_ssize_t i
    cdef double rho, m, mt, en, inv, u, p
    with nogil:
        for i in range(n):
            rho = w[i, 0]
            m = w[i, 1]
            mt = w[i, 2] if nc == 4 else 0.0
            en = w[i, nc - 1]
            inv = 1.0 / rho
            u = m * inv
            p = (gamma - 1.0) * (en - 0.5 * (m * u + mt * mt * inv))
            sp[i] = fabs(u) + sqrt(gamma * fmax(p, 0.0) * inv)
    return out


def lxf_flux(const double[:, ::1] wl, const double[:, ::1] wr, sigma, double gamma):
    cdef Py_ssize_t n = wl.shape[0]
    cdef int nc = <int> wl.shape[1]
    out = np.empty((n, nc))
    cdef double[:, ::1] f = out
    cdef double[::1] sig_arr
    cdef double sig_const = 0.0
    cdef bint scalar = np.isscalar(sigma) or np.ndim(sigma) == 0
    if scalar:
        sig_const = float(sigma)
        sig_arr = np.empty(0)
    else:
        sig_arr = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double s
    cdef double rl, ml, tl, el, il, ul, pl
    cdef double rr, mr, tr, er, ir, ur, pr
    with nogil:
        for i in range(n):
            rl = wl[i, 0]; ml = wl[i, 1]
            tl = wl[i, 2] if nc == 4 else 0.0
            el = wl[i, nc - 1]
            il = 1.0 / rl; ul = ml * il
            pl = (gamma - 1.0) * (el - 0.5 * (ml * ul + tl * tl * il))
            rr = wr[i, 0]; mr = wr[i, 1]
            tr = wr[i, 2] if nc == 4 else 0.0
            er = wr[i, nc - 1]
            ir = 1.0 / rr; ur = mr * ir
            pr = (gamma - 1.0) * (er - 0.5 * (mr * ur + tr * tr * ir))
            s = sig_const if scalar else sig_arr[i]
            f[i, 0] = 0.5 * (ml + mr - s * (rr - rl))
            f[i, 1] = 0.5 * (ml * ul + pl + mr * ur + pr - s * (mr - ml))
            if nc == 4:
                f[i, 2] = 0.5 * (tl * ul + tr * ur - s * (tr - tl))
            f[i, nc - 1] = 0.5 * ((el + pl) * ul + (er + pr) * ur - s * (er - el))
    return out


def lxf_local_flux(const double[:, ::1] wl, const double[:, ::1] wr, double gamma):
    cdef Py_ssize_t n = wl.shape[0]
    cdef int nc = <int> wl.shape[1]
    out = np.empty((n, nc))
    cdef double[:, ::1] f = out
    cdef Py_ssize_t i
    cdef double s
    cdef double rl, ml, tl, el, il, ul, pl, cl
    cdef double rr, mr, tr, er, ir, ur, pr, cr
    with nogil:
        for i in range(n):
            rl = wl[i, 0]; ml = wl[i, 1]
            tl = wl[i, 2] if nc == 4 else 0.0
            el = wl[i, nc - 1]
            il = 1.0 / rl; ul = ml * il
            pl = (gamma - 1.0) * (el - 0.5 * (ml * ul + tl * tl * il))
            cl = sqrt(gamma * fmax(pl, 0.0) * il)
            rr = wr[i, 0]; mr = wr[i, 1]
            tr = wr[i, 2] if nc == 4 else 0.0
            er = wr[i, nc - 1]
            ir = 1.0 / rr; ur = mr * ir
            pr = (gamma - 1.0) * (er - 0.5 * (mr * ur + tr * tr * ir))
            cr = sqrt(gamma * fmax(pr, 0.0) * ir)
            s = fmax(fabs(ul) + cl, fabs(ur) + cr)
            f[i, 0] = 0.5 * (ml + mr - s * (rr - rl))
            f[i, 1] = 0.5 * (ml * ul + pl + mr * ur + pr - s * (mr - ml))
            if nc == 4:
                f[i, 2] = 0.5 * (tl * ul + tr * ur - s * (tr - tl))
            f[i, nc - 1] = 0.5 * ((el + pl) * ul + (er + pr) * ur - s * (er - el))
    return out


def hll_flux(const double[:, ::1] wl, const double[:, ::1] wr,
             const double[::1] sl, const double[::1] sr, double gamma):
    return _hll_impl(wl, wr, gamma, sl, sr, False)


def hll_flux_davis(const double[:, ::1] wl, const double[:, ::1] wr, double gamma):
    return _hll_impl(wl, wr, gamma, None, None, True)


def hllc_flux(const double[:, ::1] wl, const double[:, ::1] wr,
              const double[::1] sl, const double[::1] sr, double gamma):
    return _hllc_impl(wl, wr, gamma, sl, sr, False)


def hllc_flux_davis(const double[:, ::1] wl, const double[:, ::1] wr, double gamma):
    return _hllc_impl(wl, wr, gamma, None, None, True)


def _hll_impl(const double[:, ::1] wl, const double[:, ::1] wr, double gamma,
              sl_in, sr_in, bint davis):
    cdef Py_ssize_t n = wl.shape[0]
    cdef int nc = <int> wl.shape[1]
    out = np.empty((n, nc))
    cdef double[:, ::1] f = out
    cdef double[::1] sl_v
    cdef double[::1] sr_v
    if davis:
        sl_v = np.empty(0)
        sr_v = np.empty(0)
    else:
        sl_v = sl_in
        sr_v = sr_in
    cdef Py_ssize_t i
    cdef double s_l, s_r, denom
    cdef double rl, ml, tl, el, il, ul, pl, cl
    cdef double rr, mr, tr, er, ir, ur, pr, cr
    with nogil:
        for i in range(n):
            rl = wl[i, 0]; ml = wl[i, 1]
            tl = wl[i, 2] if nc == 4 else 0.0
            el = wl[i, nc - 1]
            il = 1.0 / rl; ul = ml * il
            pl = (gamma - 1.0) * (el - 0.5 * (ml * ul + tl * tl * il))
            rr = wr[i, 0]; mr = wr[i, 1]
            tr = wr[i, 2] if nc == 4 else 0.0
            er = wr[i, nc - 1]
            ir = 1.0 / rr; ur = mr * ir
            pr = (gamma - 1.0) * (er - 0.5 * (mr * ur + tr * tr * ir))
            if davis:
                cl = sqrt(gamma * fmax(pl, 0.0) * il)
                cr = sqrt(gamma * fmax(pr, 0.0) * ir)
                s_l = fmin(ul - cl, ur - cr)
                s_r = fmax(ul + cl, ur + cr)
            else:
                s_l = sl_v[i]
                s_r = sr_v[i]
            if s_l >= 0.0:
                f[i, 0] = ml
                f[i, 1] = ml * ul + pl
                if nc == 4:
                    f[i, 2] = tl * ul
                f[i, nc - 1] = (el + pl) * ul
            elif s_r <= 0.0:
                f[i, 0] = mr
                f[i, 1] = mr * ur + pr
                if nc == 4:
                    f[i, 2] = tr * ur
                f[i, nc - 1] = (er + pr) * ur
            else:
                denom = s_r - s_l
                if denom == 0.0:
                    denom = 1.0
                f[i, 0] = (s_r * ml - s_l * mr + s_l * s_r * (rr - rl)) / denom
                f[i, 1] = (s_r * (ml * ul + pl) - s_l * (mr * ur + pr)
                           + s_l * s_r * (mr - ml)) / denom
                if nc == 4:
                    f[i, 2] = (s_r * tl * ul - s_l * tr * ur
                               + s_l * s_r * (tr - tl)) / denom
                f[i, nc - 1] = (s_r * (el + pl) * ul - s_l * (er + pr) * ur
                                + s_l * s_r * (er - el)) / denom
    return out


def _hllc_impl(const double[:, ::1] wl, const double[:, ::1] wr, double gamma,
               sl_in, sr_in, bint davis):
    cdef Py_ssize_t n = wl.shape[0]
    cdef int nc = <int> wl.shape[1]
    out = np.empty((n, nc))
    cdef double[:, ::1] f = out
    cdef double[::1] sl_v
    cdef double[::1] sr_v
    if davis:
        sl_v = np.empty(0)
        sr_v = np.empty(0)
    else:
        sl_v = sl_in
        sr_v = sr_in
    cdef Py_ssize_t i
    cdef double s_l, s_r, denom, dl, dr, s_star
    cdef double rk, mk, tk, ek, ik, uk, pk, sk, coef, estar
    cdef double rl, ml, tl, el, il, ul, pl, cl
    cdef double rr, mr, tr, er, ir, ur, pr, cr
    with nogil:
        for i in range(n):
            rl = wl[i, 0]; ml = wl[i, 1]
            tl = wl[i, 2] if nc == 4 else 0.0
            el = wl[i, nc - 1]
            il = 1.0 / rl; ul = ml * il
            pl = (gamma - 1.0) * (el - 0.5 * (ml * ul + tl * tl * il))
            rr = wr[i, 0]; mr = wr[i, 1]
            tr = wr[i, 2] if nc == 4 else 0.0
            er = wr[i, nc - 1]
            ir = 1.0 / rr; ur = mr * ir
            pr = (gamma - 1.0) * (er - 0.5 * (mr * ur + tr * tr * ir))
            if davis:
                cl = sqrt(gamma * fmax(pl, 0.0) * il)
                cr = sqrt(gamma * fmax(pr, 0.0) * ir)
                s_l = fmin(ul - cl, ur - cr)
                s_r = fmax(ul + cl, ur + cr)
            else:
                s_l = sl_v[i]
                s_r = sr_v[i]
            if s_l >= 0.0:
                f[i, 0] = ml
                f[i, 1] = ml * ul + pl
                if nc == 4:
                    f[i, 2] = tl * ul
                f[i, nc - 1] = (el + pl) * ul
                continue
            if s_r <= 0.0:
                f[i, 0] = mr
                f[i, 1] = mr * ur + pr
                if nc == 4:
                    f[i, 2] = tr * ur
                f[i, nc - 1] = (er + pr) * ur
                continue
            dl = rl * (s_l - ul)
            dr = rr * (s_r - ur)
            denom = dl - dr
            if fabs(denom) < 1e-300:
                # degenerate contact speed: fall back to the HLL average
                denom = s_r - s_l
                if denom == 0.0:
                    denom = 1.0
                f[i, 0] = (s_r * ml - s_l * mr + s_l * s_r * (rr - rl)) / denom
                f[i, 1] = (s_r * (ml * ul + pl) - s_l * (mr * ur + pr)
                           + s_l * s_r * (mr - ml)) / denom
                if nc == 4:
                    f[i, 2] = (s_r * tl * ul - s_l * tr * ur
                               + s_l * s_r * (tr - tl)) / denom
                f[i, nc - 1] = (s_r * (el + pl) * ul - s_l * (er + pr) * ur
                                + s_l * s_r * (er - el)) / denom
                continue
            s_star = (pr - pl + ul * dl - ur * dr) / denom
            if s_star >= 0.0:
                rk = rl; mk = ml; tk = tl; ek = el; ik = il; uk = ul; pk = pl
                sk = s_l
            else:
                rk = rr; mk = mr; tk = tr; ek = er; ik = ir; uk = ur; pk = pr
                sk = s_r
            # f_*K = f(w_K) + s_K (w_*K - w_K), single-star-pressure states
            coef = rk * (sk - uk) / (sk - s_star)
            estar = coef * (ek * ik + (s_star - uk) * (s_star + pk / (rk * (sk - uk))))
            f[i, 0] = mk + sk * (coef - rk)
            f[i, 1] = mk * uk + pk + sk * (coef * s_star - mk)
            if nc == 4:
                f[i, 2] = tk * uk + sk * (coef * tk * ik - tk)
            f[i, nc - 1] = (ek + pk) * uk + sk * (estar - ek)
    return out


def davis_speeds(const double[:, ::1] wl, const double[:, ::1] wr, double gamma):
    cdef Py_ssize_t n = wl.shape[0]
    cdef int nc = <int> wl.shape[1]
    sl_out = np.empty(n)
    sr_out = np.empty(n)
    cdef double[::1] sl = sl_out
    cdef double[::1] sr = sr_out
    cdef Py_ssize_t i
    cdef double rl, ml, tl, el, il, ul, pl, cl
    cdef double rr, mr, tr, er, ir, ur, pr, cr
    with nogil:
        for i in range(n):
            rl = wl[i, 0]; ml = wl[i, 1]
            tl = wl[i, 2] if nc == 4 else 0.0
            el = wl[i, nc - 1]
            il = 1.0 / rl; ul = ml * il
            pl = (gamma - 1.0) * (el - 0.5 * (ml * ul + tl * tl * il))
            cl = sqrt(gamma * fmax(pl, 0.0) * il)
            rr = wr[i, 0]; mr = wr[i, 1]
            tr = wr[i, 2] if nc == 4 else 0.0
            er = wr[i, nc - 1]
            ir = 1.0 / rr; ur = mr * ir
            pr = (gamma - 1.0) * (er - 0.5 * (mr * ur + tr * tr * ir))
            cr = sqrt(gamma * fmax(pr, 0.0) * ir)
            sl[i] = fmin(ul - cl, ur - cr)
            sr[i] = fmax(ul + cl, ur + cr)
    return sl_out, sr_out


def phys_fluxes_2d(const double[:, :, ::1] vals, double gamma):
    cdef Py_ssize_t n = vals.shape[0]
    cdef Py_ssize_t npts = vals.shape[2]
    f1_out = np.empty((n, 4, npts))
    f2_out = np.empty((n, 4, npts))
    cdef double[:, :, ::1] f1 = f1_out
    cdef double[:, :, ::1] f2 = f2_out
    cdef Py_ssize_t i, j
    cdef double rho, m, nn, en, u, v, p, inv
    with nogil:
        for i in range(n):
            for j in range(npts):
                rho = vals[i, 0, j]
                m = vals[i, 1, j]
                nn = vals[i, 2, j]
                en = vals[i, 3, j]
                inv = 1.0 / rho
                u = m * inv
                v = nn * inv
                p = (gamma - 1.0) * (en - 0.5 * (m * u + nn * v))
                f1[i, 0, j] = m
                f1[i, 1, j] = m * u + p
                f1[i, 2, j] = nn * u
                f1[i, 3, j] = (en + p) * u
                f2[i, 0, j] = nn
                f2[i, 1, j] = m * v
                f2[i, 2, j] = nn * v + p
                f2[i, 3, j] = (en + p) * v
    return f1_out, f2_out


def speed_scan(const double[:, :, ::1] vals, double gamma):
    cdef Py_ssize_t n = vals.shape[0]
    cdef int nc = <int> vals.shape[1]
    cdef Py_ssize_t npts = vals.shape[2]
    cdef Py_ssize_t i, j
    cdef double rho, mn, mt, p, c, s1, s2, kin, inv
    s1 = 0.0
    s2 = 0.0
    with nogil:
        for i in range(n):
            for j in range(npts):
                rho = vals[i, 0, j]
                mn = vals[i, 1, j]
                inv = 1.0 / rho
                if nc == 4:
                    mt = vals[i, 2, j]
                    kin = 0.5 * (mn * mn + mt * mt)
                else:
                    mt = 0.0
                    kin = 0.5 * mn * mn
                p = (gamma - 1.0) * (vals[i, nc - 1, j] - kin * inv)
                c = sqrt(gamma * fmax(p, 0.0) * inv)
                s1 = fmax(s1, fabs(mn * inv) + c)
                if nc == 4:
                    s2 = fmax(s2, fabs(mt * inv) + c)
    return s1, s2


def functional_minmax(const double[:, :, ::1] vals, double gamma, double s0):
    cdef Py_ssize_t ncells = vals.shape[0]
    cdef int nc = <int> vals.shape[1]
    cdef Py_ssize_t npts = vals.shape[2]
    rho_out = np.empty(ncells)
    p_out = np.empty(ncells)
    q_out = np.empty(ncells)
    cdef double[::1] rho_min = rho_out
    cdef double[::1] p_min = p_out
    cdef double[::1] q_max = q_out
    cdef Py_ssize_t i, j
    cdef double rho, kin, p, q, rmin, pmin, qmax
    cdef double inf = np.inf
    with nogil:
        for i in range(ncells):
            rmin = inf
            pmin = inf
            qmax = -inf
            for j in range(npts):
                rho = vals[i, 0, j]
                if rho < rmin:
                    rmin = rho
                if rho <= 0.0:
                    pmin = -inf
                    qmax = inf
                    continue
                if nc == 4:
                    kin = 0.5 * (vals[i, 1, j] * vals[i, 1, j]
                                 + vals[i, 2, j] * vals[i, 2, j])
                else:
                    kin = 0.5 * vals[i, 1, j] * vals[i, 1, j]
                p = (gamma - 1.0) * (vals[i, nc - 1, j] - kin / rho)
                if p < pmin:
                    pmin = p
                if p <= 0.0:
                    qmax = inf
                    continue
                q = (s0 - (log(p) - gamma * log(rho))) * rho
                if q > qmax:
                    qmax = q
            rho_min[i] = rmin
            p_min[i] = pmin
            q_max[i] = qmax
    return rho_out, p_out, q_out


def cell_functionals(const double[:, ::1] wbar, double gamma, double s0):
    cdef Py_ssize_t n = wbar.shape[0]
    cdef int nc = <int> wbar.shape[1]
    rho_out = np.empty(n)
    p_out = np.empty(n)
    q_out = np.empty(n)
    cdef double[::1] rho_v = rho_out
    cdef double[::1] p_v = p_out
    cdef double[::1] q_v = q_out
    cdef Py_ssize_t i
    cdef double rho, kin, p
    cdef double inf = np.inf
    with nogil:
        for i in range(n):
            rho = wbar[i, 0]
            rho_v[i] = rho
            if rho == 0.0:
                p_v[i] = -inf
                q_v[i] = inf
                continue
            if nc == 4:
                kin = 0.5 * (wbar[i, 1] * wbar[i, 1] + wbar[i, 2] * wbar[i, 2])
            else:
                kin = 0.5 * wbar[i, 1] * wbar[i, 1]
            p = (gamma - 1.0) * (wbar[i, nc - 1] - kin / rho)
            p_v[i] = p
            if rho < 0.0 or p <= 0.0:
                q_v[i] = inf
            else:
                q_v[i] = (s0 - (log(p) - gamma * log(rho))) * rho
    return rho_out, p_out, q_out


def scale_modes(double[:, :, ::1] coeffs, const double[::1] theta):
    cdef Py_ssize_t ncells = coeffs.shape[0]
    cdef Py_ssize_t nc = coeffs.shape[1]
    cdef Py_ssize_t nmodes = coeffs.shape[2]
    cdef Py_ssize_t i, c, m
    cdef double t
    with nogil:
        for i in range(ncells):
            t = theta[i]
            if t == 1.0:
                continue
            for c in range(nc):
                for m in range(1, nmodes):
                    coeffs[i, c, m] *= t
