"""Modal DG discretization, first-order FV scheme and SSP-RK3 stepping.

Cells carry orthonormal Legendre coefficients on the reference interval
[-1/2, 1/2] (tensor products on rectangles), so mode 0 of every component
is the cell average and the limiter acts by scaling modes 1 and up.  Time
stepping is the three-stage strong-stability-preserving Runge-Kutta method,
each stage a convex combination of forward-Euler updates, with the limiter
applied after every stage.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import legval

from . import _kernels as kernels
from .euler import GasModel
from .fluxes import cfl_constant, flux_interfaces
from .limiter import LimiterConfig, LimiterEvent, limit_field
from .quadrature import (
    TestSet,
    _rect_grids,
    gauss_legendre,
    gauss_lobatto,
    lobatto_count_for_degree,
    test_set_1d,
    test_set_rect,
)

__all__ = [
    "Mesh",
    "CellPolynomial",
    "DGSolution",
    "CflPolicy",
    "basis_matrix",
    "basis_deriv_matrix",
    "l2_project",
    "estimate_entropy_floor",
    "apply_bc",
    "fv_step_1d",
    "dg_residual_1d",
    "dg_residual_2d",
    "ssp_rk3_step",
    "cfl_dt",
    "triangular_cfl",
    "wave_speeds",
    "total_mass",
    "save_checkpoint",
    "load_checkpoint",
]

_BC_TAGS = ("periodic", "transmissive")


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------


def _phi_coeffs(n: int) -> list[float]:
    return [0.0] * n + [np.sqrt(2.0 * n + 1.0)]


def basis_matrix(degree: int, ref_points) -> np.ndarray:
    """Orthonormal Legendre basis values, shape (degree+1, npts)."""
    x = 2.0 * np.asarray(ref_points, dtype=float)
    return np.array([legval(x, _phi_coeffs(n)) for n in range(degree + 1)])


def basis_deriv_matrix(degree: int, ref_points) -> np.ndarray:
    """Reference-coordinate derivatives of the basis, shape (degree+1, npts)."""
    from numpy.polynomial.legendre import legder

    x = 2.0 * np.asarray(ref_points, dtype=float)
    rows = []
    for n in range(degree + 1):
        c = _phi_coeffs(n)
        rows.append(2.0 * legval(x, legder(c)) if n > 0 else np.zeros_like(x))
    return np.array(rows)


_CACHE: dict = {}


def _cached(key, builder):
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


# ---------------------------------------------------------------------------
# Mesh and solution containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mesh:
    """Uniform 1D interval mesh or 2D rectangle mesh.

    ``bc_x`` / ``bc_y`` are (low side, high side) tags out of
    {"periodic", "transmissive"}; periodic sides must be paired.
    """

    xlim: tuple[float, float]
    nx: int
    ylim: tuple[float, float] | None = None
    ny: int | None = None
    bc_x: tuple[str, str] = ("periodic", "periodic")
    bc_y: tuple[str, str] = ("periodic", "periodic")

    def __post_init__(self):
        if self.nx < 2 or (self.ny is not None and self.ny < 2):
            raise ValueError("need at least 2 cells per direction")
        if self.xlim[1] <= self.xlim[0]:
            raise ValueError("empty x extent")
        if (self.ylim is None) != (self.ny is None):
            raise ValueError("ylim and ny must be given together")
        if self.ylim is not None and self.ylim[1] <= self.ylim[0]:
            raise ValueError("empty y extent")
        for tags in (self.bc_x, self.bc_y):
            if any(t not in _BC_TAGS for t in tags):
                raise ValueError(f"boundary tags must be in {_BC_TAGS}")
            if ("periodic" in tags) and tags != ("periodic", "periodic"):
                raise ValueError("periodic boundaries must be paired")

    @property
    def dim(self) -> int:
        return 1 if self.ylim is None else 2

    @property
    def dx(self) -> float:
        return (self.xlim[1] - self.xlim[0]) / self.nx

    @property
    def dy(self) -> float:
        if self.ylim is None:
            raise AttributeError("1D mesh has no dy")
        return (self.ylim[1] - self.ylim[0]) / self.ny

    @property
    def x_centers(self) -> np.ndarray:
        return self.xlim[0] + self.dx * (np.arange(self.nx) + 0.5)

    @property
    def y_centers(self) -> np.ndarray:
        return self.ylim[0] + self.dy * (np.arange(self.ny) + 0.5)

    @property
    def cell_volume(self) -> float:
        return self.dx if self.dim == 1 else self.dx * self.dy


@dataclass
class CellPolynomial:
    """Modal polynomial of one cell.

    ``coeffs`` has shape (ncomp, k+1) in 1D and (ncomp, k+1, k+1) in 2D;
    coefficient 0 (resp. (0, 0)) of each component is the cell average.
    ``cell`` holds the physical bounds: (lo, hi) or ((xlo, xhi), (ylo, yhi)).
    """

    degree: int
    coeffs: np.ndarray
    cell: tuple
    cell_id: object = 0

    @property
    def dim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def average(self) -> np.ndarray:
        return self.coeffs[:, 0] if self.dim == 1 else self.coeffs[:, 0, 0]

    def _to_ref(self, points: np.ndarray) -> np.ndarray:
        if self.dim == 1:
            lo, hi = self.cell
            return (np.asarray(points, dtype=float) - 0.5 * (lo + hi)) / (hi - lo)
        (xlo, xhi), (ylo, yhi) = self.cell
        pts = np.asarray(points, dtype=float)
        out = np.empty_like(pts)
        out[..., 0] = (pts[..., 0] - 0.5 * (xlo + xhi)) / (xhi - xlo)
        out[..., 1] = (pts[..., 1] - 0.5 * (ylo + yhi)) / (yhi - ylo)
        return out

    def basis_matrix(self, points) -> np.ndarray:
        """Flat-mode basis values at physical points, shape (nmodes, npts)."""
        ref = self._to_ref(np.asarray(points, dtype=float))
        if self.dim == 1:
            return basis_matrix(self.degree, ref)
        bx = basis_matrix(self.degree, ref[:, 0])
        by = basis_matrix(self.degree, ref[:, 1])
        return (bx[:, None, :] * by[None, :, :]).reshape(-1, ref.shape[0])

    def evaluate(self, points) -> np.ndarray:
        """Values at physical points, shape (npts, ncomp)."""
        bm = self.basis_matrix(points)
        flat = self.coeffs.reshape(self.coeffs.shape[0], -1)
        return (flat @ bm).T

    def with_coeffs(self, coeffs: np.ndarray) -> "CellPolynomial":
        return dataclasses.replace(self, coeffs=coeffs)

    def test_set(self) -> TestSet:
        if self.dim == 1:
            return test_set_1d(self.degree, self.cell)
        return test_set_rect(self.degree, self.cell)


@dataclass
class DGSolution:
    """Mesh-wide modal DG solution of one gas model at one time.

    1D coefficients have shape (nx, 3, k+1); 2D (nx, ny, 4, k+1, k+1).
    """

    mesh: Mesh
    degree: int
    gas: GasModel
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        nc = 3 if self.mesh.dim == 1 else 4
        k1 = self.degree + 1
        want = (self.mesh.nx, nc, k1) if self.mesh.dim == 1 else (
            self.mesh.nx, self.mesh.ny, nc, k1, k1)
        if self.coeffs.shape != want:
            raise ValueError(f"coefficient array must have shape {want}, got {self.coeffs.shape}")

    @property
    def ncomp(self) -> int:
        return 3 if self.mesh.dim == 1 else 4

    @property
    def ncells(self) -> int:
        return self.mesh.nx if self.mesh.dim == 1 else self.mesh.nx * self.mesh.ny

    def copy(self) -> "DGSolution":
        return dataclasses.replace(self, coeffs=self.coeffs.copy())

    def flat_coeffs(self) -> np.ndarray:
        """(ncells, ncomp, nmodes) view of the coefficient array."""
        return self.coeffs.reshape(self.ncells, self.ncomp, -1)

    def averages(self) -> np.ndarray:
        if self.mesh.dim == 1:
            return self.coeffs[:, :, 0]
        return self.coeffs[:, :, :, 0, 0]

    def cell_index_label(self, flat_index: int):
        if self.mesh.dim == 1:
            return int(flat_index)
        return (flat_index // self.mesh.ny, flat_index % self.mesh.ny)

    def cell_poly(self, i: int, j: int | None = None) -> CellPolynomial:
        m = self.mesh
        if m.dim == 1:
            lo = m.xlim[0] + i * m.dx
            return CellPolynomial(self.degree, self.coeffs[i], (lo, lo + m.dx), i)
        xlo = m.xlim[0] + i * m.dx
        ylo = m.ylim[0] + j * m.dy
        return CellPolynomial(self.degree, self.coeffs[i, j],
                              ((xlo, xlo + m.dx), (ylo, ylo + m.dy)), (i, j))

    def ref_test_points(self) -> np.ndarray:
        """Reference coordinates of the (deduplicated) test set."""
        if self.mesh.dim == 1:
            return gauss_lobatto(lobatto_count_for_degree(self.degree)).nodes
        return _cached(("rect_ref", self.degree), lambda: _rect_grids(self.degree)[2])

    def test_value_matrix(self) -> np.ndarray:
        """Flat-mode basis at the reference test points, (nmodes, npts)."""
        k = self.degree
        if self.mesh.dim == 1:
            return _cached(("tv1", k), lambda: basis_matrix(k, self.ref_test_points()))

        def build():
            ref = self.ref_test_points()
            bx = basis_matrix(k, ref[:, 0])
            by = basis_matrix(k, ref[:, 1])
            return (bx[:, None, :] * by[None, :, :]).reshape(-1, ref.shape[0])

        return _cached(("tv2", k), build)

    def test_point_values(self) -> np.ndarray:
        """Solution values at all test points, shape (ncells, ncomp, npts)."""
        return np.ascontiguousarray(self.flat_coeffs() @ self.test_value_matrix())


# ---------------------------------------------------------------------------
# Projection and entropy floor
# ---------------------------------------------------------------------------


def l2_project(fn, mesh: Mesh, degree: int, gas: GasModel) -> DGSolution:
    """L2-project pointwise initial data onto the modal DG space.

    ``fn`` maps physical coordinates to states: in 1D ``fn(x)`` with x of
    shape (n,) returning (n, 3); in 2D ``fn(x, y)`` broadcasting to
    (..., 4).  The quadrature is exact past degree 2k, so polynomial data
    up to degree k projects exactly and cell averages equal the quadrature
    averages of the data.
    """
    k1 = degree + 1
    rule = gauss_legendre(degree + 2)
    bm = basis_matrix(degree, rule.nodes)  # (k+1, nq)
    if mesh.dim == 1:
        x = mesh.x_centers[:, None] + mesh.dx * rule.nodes[None, :]
        vals = np.asarray(fn(x.ravel()), dtype=float).reshape(mesh.nx, rule.nodes.size, 3)
        coeffs = np.einsum("xqc,q,mq->xcm", vals, rule.weights, bm)
        return DGSolution(mesh, degree, gas, np.ascontiguousarray(coeffs))
    x = mesh.x_centers[:, None] + mesh.dx * rule.nodes[None, :]  # (nx, nq)
    y = mesh.y_centers[:, None] + mesh.dy * rule.nodes[None, :]  # (ny, nq)
    vals = np.asarray(
        fn(x[:, None, :, None], y[None, :, None, :]), dtype=float
    )  # (nx, ny, nq, nq, 4)
    coeffs = np.einsum("xyabc,a,b,ma,nb->xycmn", vals, rule.weights, rule.weights, bm, bm)
    return DGSolution(mesh, degree, gas, np.ascontiguousarray(coeffs))


def estimate_entropy_floor(sol: DGSolution) -> float:
    """Min specific entropy over all test points of the (projected) field.

    Points with nonpositive density or pressure are skipped; at least one
    valid point is required.
    """
    vals = sol.test_point_values()
    rho = vals[:, 0, :]
    mn = vals[:, 1, :]
    en = vals[:, -1, :]
    kin = 0.5 * (mn**2 + vals[:, 2, :] ** 2) if sol.ncomp == 4 else 0.5 * mn**2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (sol.gas.gamma - 1.0) * (en - kin / rho)
        ok = (rho > 0.0) & (p > 0.0)
        s = np.where(ok, np.log(np.where(ok, p, 1.0)) - sol.gas.gamma * np.log(np.where(ok, rho, 1.0)), np.inf)
    smin = float(s.min())
    if not np.isfinite(smin):
        raise ValueError("no test point with positive density and pressure")
    return smin


# ---------------------------------------------------------------------------
# Traces, boundary conditions, residuals
# ---------------------------------------------------------------------------


def _edge_basis(degree: int):
    phi_l = basis_matrix(degree, np.array([-0.5]))[:, 0]
    phi_r = basis_matrix(degree, np.array([0.5]))[:, 0]
    return phi_l, phi_r


def _interface_states_1d(wl_tr, wr_tr, bc, ghost_left=None, ghost_right=None):
    """Left/right states per interface from cell edge traces.

    Transmissive sides take the supplied ghost state (the boundary cell
    mean): pairing the outgoing trace against the mean keeps upwind
    dissipation active at the boundary, which a plain trace copy would
    switch off exactly when a shock crosses.
    """
    nx = wl_tr.shape[0]
    left = np.empty((nx + 1,) + wl_tr.shape[1:])
    right = np.empty_like(left)
    left[1:] = wr_tr
    right[:-1] = wl_tr
    if bc[0] == "periodic":
        left[0] = wr_tr[-1]
    else:
        left[0] = wl_tr[0] if ghost_left is None else ghost_left
    if bc[1] == "periodic":
        right[-1] = wl_tr[0]
    else:
        right[-1] = wr_tr[-1] if ghost_right is None else ghost_right
    return left, right


def apply_bc(sol: DGSolution) -> dict:
    """Ghost states outside each boundary.

    Periodic sides wrap the opposite boundary trace; transmissive sides
    extrapolate the boundary cell mean outward.
    """
    if sol.mesh.dim == 1:
        phi_l, phi_r = _edge_basis(sol.degree)
        wl = sol.coeffs @ phi_l
        wr = sol.coeffs @ phi_r
        avg = sol.coeffs[:, :, 0]
        left, right = _interface_states_1d(wl, wr, sol.mesh.bc_x,
                                           ghost_left=avg[0], ghost_right=avg[-1])
        return {"left": left[0], "right": right[-1]}
    trl, trr, trb, trt = _traces_2d(sol)
    avg = sol.coeffs[:, :, :, 0, 0]
    bx, by = sol.mesh.bc_x, sol.mesh.bc_y
    nq = trl.shape[2]

    def span(a):
        return np.broadcast_to(a[:, None, :], (a.shape[0], nq, 4)).copy()

    return {
        "left": trr[-1] if bx[0] == "periodic" else span(avg[0]),
        "right": trl[0] if bx[1] == "periodic" else span(avg[-1]),
        "bottom": trt[:, -1] if by[0] == "periodic" else span(avg[:, 0]),
        "top": trb[:, 0] if by[1] == "periodic" else span(avg[:, -1]),
    }


def _check_volume_density(rho: np.ndarray, where: str):
    if np.any(rho == 0.0):
        idx = np.argwhere(rho == 0.0)[0]
        raise FloatingPointError(f"vacuum at {where} quadrature point {tuple(idx)}")


def dg_residual_1d(sol: DGSolution, token: str, sigma_global: float | None = None,
                   return_boundary_flux: bool = False):
    """Semi-discrete DG right-hand side d(coeffs)/dt, shape like coeffs.

    The mode-0 component of the residual is exactly the scaled interface
    flux difference, so cell averages evolve as in a finite volume scheme.
    """
    k = sol.degree
    mesh = sol.mesh
    g = sol.gas
    phi_l, phi_r = _cached(("edge1", k), lambda: _edge_basis(k))
    rule = _cached(("volr1", k), lambda: gauss_legendre(k + 1 + VOLUME_QUADRATURE_EXTRA))
    bm = _cached(("vbm1", k), lambda: basis_matrix(k, rule.nodes))
    dm = _cached(("vdm1", k), lambda: basis_deriv_matrix(k, rule.nodes))

    wl_tr = sol.coeffs @ phi_l  # (nx, 3)
    wr_tr = sol.coeffs @ phi_r
    avg = sol.coeffs[:, :, 0]
    left, right = _interface_states_1d(wl_tr, wr_tr, mesh.bc_x,
                                       ghost_left=avg[0], ghost_right=avg[-1])
    fhat = flux_interfaces(token, left, right, g, sigma_global)  # (nx+1, 3)

    vals = sol.coeffs @ bm  # (nx, 3, nq)
    _check_volume_density(vals[:, 0, :], "cell")
    fvol = kernels.phys_flux(np.moveaxis(vals, 1, 2).reshape(-1, 3), g.gamma)
    fvol = np.moveaxis(fvol.reshape(mesh.nx, -1, 3), 2, 1)  # (nx, 3, nq)
    vol = fvol @ (dm * rule.weights).T  # (nx, 3, k+1)

    edge = fhat[1:, :, None] * phi_r[None, None, :] - fhat[:-1, :, None] * phi_l[None, None, :]
    res = (vol - edge) / mesh.dx
    if return_boundary_flux:
        bflux = fhat[-1] - fhat[0] if mesh.bc_x[0] != "periodic" else np.zeros(3)
        return res, bflux
    return res


VOLUME_QUADRATURE_EXTRA = 1  # volume rule points beyond the k+1 edge rule


def _mats_2d(k: int) -> dict:
    """Precomputed flat-mode matrices for the rectangle-mesh residual.

    Flat mode index m = mx*(k+1) + my matches the C order of the trailing
    (k+1, k+1) coefficient axes, so coefficient blocks reshape into GEMM
    operands without copies.  Edge quadrature stays at the k+1 Gauss points
    of the admissibility test set; the volume rule carries extra points
    (the flux is not polynomial, and the minimal rule visibly pollutes
    coarse-mesh accuracy).
    """
    rule_e = gauss_legendre(k + 1)
    rule_v = gauss_legendre(k + 1 + VOLUME_QUADRATURE_EXTRA)
    bm = basis_matrix(k, rule_e.nodes)  # (k+1, nq)
    bmv = basis_matrix(k, rule_v.nodes)
    dmv = basis_deriv_matrix(k, rule_v.nodes)
    phi_l, phi_r = _edge_basis(k)
    w = rule_e.weights
    ww = np.outer(rule_v.weights, rule_v.weights).ravel()

    def tensor(ax, ay):  # (nm, nqx*nqy)
        return (ax[:, None, :, None] * ay[None, :, None, :]).reshape(
            ax.shape[0] * ay.shape[0], -1)

    return {
        "nq": w.size,
        "nv": rule_v.weights.size,
        "b_vol": tensor(bmv, bmv),
        "w1": (tensor(dmv, bmv) * ww).T.copy(),  # x-derivative volume weights
        "w2": (tensor(bmv, dmv) * ww).T.copy(),
        "b_left": (phi_l[:, None, None] * bm[None, :, :]).reshape(-1, w.size),
        "b_right": (phi_r[:, None, None] * bm[None, :, :]).reshape(-1, w.size),
        "b_bottom": (bm[:, None, :] * phi_l[None, :, None]).reshape(-1, w.size),
        "b_top": (bm[:, None, :] * phi_r[None, :, None]).reshape(-1, w.size),
    }


def _traces_2d(sol: DGSolution):
    """Edge traces at the edge Gauss points, each of shape (nx, ny, L, 4)."""
    k = sol.degree
    mats = _cached(("m2", k), lambda: _mats_2d(k))
    nx, ny = sol.mesh.nx, sol.mesh.ny
    cflat = sol.coeffs.reshape(nx * ny * 4, -1)

    def trace(bmat):
        return np.moveaxis((cflat @ bmat).reshape(nx, ny, 4, mats["nq"]), 2, 3)

    return (trace(mats["b_left"]), trace(mats["b_right"]),
            trace(mats["b_bottom"]), trace(mats["b_top"]))


def _swap_mom(w):
    out = w.copy()
    out[..., 1], out[..., 2] = w[..., 2].copy(), w[..., 1].copy()
    return out


def dg_residual_2d(sol: DGSolution, token: str, sigma_global: float | None = None,
                   return_boundary_flux: bool = False):
    """Semi-discrete DG right-hand side on a rectangle mesh.

    All mode contractions run as flat (ncells*4, .) GEMMs against the
    cached matrices from :func:`_mats_2d`; this path dominates the runtime
    of 2D experiments.
    """
    k = sol.degree
    mesh = sol.mesh
    g = sol.gas
    nx, ny = mesh.nx, mesh.ny
    ncells = nx * ny
    mats = _cached(("m2", k), lambda: _mats_2d(k))
    nq = mats["nq"]
    rule = _cached(("vol1", k), lambda: gauss_legendre(k + 1))
    wq = rule.weights
    cflat = sol.coeffs.reshape(ncells * 4, -1)

    trl, trr, trb, trt = _traces_2d(sol)
    avg = sol.coeffs[:, :, :, 0, 0]  # transmissive ghost states

    # x-direction interfaces: (nx+1, ny, L, 4)
    xl = np.empty((nx + 1, ny, nq, 4))
    xr = np.empty_like(xl)
    xl[1:] = trr
    xr[:-1] = trl
    xl[0] = trr[-1] if mesh.bc_x[0] == "periodic" else avg[0][:, None, :]
    xr[-1] = trl[0] if mesh.bc_x[1] == "periodic" else avg[-1][:, None, :]
    fx = flux_interfaces(token, xl.reshape(-1, 4), xr.reshape(-1, 4), g, sigma_global)
    fx = fx.reshape(nx + 1, ny, nq, 4)

    # y-direction interfaces: swap momenta so the kernel sees the normal one.
    yl = np.empty((nx, ny + 1, nq, 4))
    yr = np.empty_like(yl)
    yl[:, 1:] = trt
    yr[:, :-1] = trb
    yl[:, 0] = trt[:, -1] if mesh.bc_y[0] == "periodic" else avg[:, 0][:, None, :]
    yr[:, -1] = trb[:, 0] if mesh.bc_y[1] == "periodic" else avg[:, -1][:, None, :]
    fy = flux_interfaces(token, _swap_mom(yl).reshape(-1, 4), _swap_mom(yr).reshape(-1, 4),
                         g, sigma_global)
    fy = _swap_mom(fy.reshape(nx, ny + 1, nq, 4))

    # Volume terms at the tensor Gauss points.
    nv = mats["nv"]
    vals = (cflat @ mats["b_vol"]).reshape(ncells, 4, nv * nv)
    _check_volume_density(vals[:, 0].reshape(nx, ny, nv * nv), "cell")
    f1, f2 = kernels.phys_fluxes_2d(vals, g.gamma)
    vol1 = f1.reshape(ncells * 4, -1) @ mats["w1"]
    vol2 = f2.reshape(ncells * 4, -1) @ mats["w2"]

    # Edge contributions: weighted edge fluxes against the trace bases.
    m_xr = _cached(("mxr", k), lambda: (mats["b_right"] * wq).T.copy())
    m_xl = _cached(("mxl", k), lambda: (mats["b_left"] * wq).T.copy())
    m_yt = _cached(("myt", k), lambda: (mats["b_top"] * wq).T.copy())
    m_yb = _cached(("myb", k), lambda: (mats["b_bottom"] * wq).T.copy())
    fxr = np.moveaxis(fx[1:], 3, 2).reshape(ncells * 4, nq)
    fxl = np.moveaxis(fx[:-1], 3, 2).reshape(ncells * 4, nq)
    fyt = np.moveaxis(fy[:, 1:], 3, 2).reshape(ncells * 4, nq)
    fyb = np.moveaxis(fy[:, :-1], 3, 2).reshape(ncells * 4, nq)
    edge_x = fxr @ m_xr - fxl @ m_xl
    edge_y = fyt @ m_yt - fyb @ m_yb

    res = ((vol1 - edge_x) / mesh.dx + (vol2 - edge_y) / mesh.dy).reshape(sol.coeffs.shape)
    if return_boundary_flux:
        bflux = np.zeros(4)
        if mesh.bc_x[0] != "periodic":
            bflux += mesh.dy * np.tensordot(wq, fx[-1] - fx[0], axes=([0], [1])).sum(axis=0)
        if mesh.bc_y[0] != "periodic":
            bflux += mesh.dx * np.tensordot(wq, fy[:, -1] - fy[:, 0], axes=([0], [1])).sum(axis=0)
        return res, bflux
    return res


# ---------------------------------------------------------------------------
# First-order FV scheme (also the region-preservation test harness)
# ---------------------------------------------------------------------------


def fv_step_1d(avgs: np.ndarray, token: str, lam: float, g: GasModel,
               sigma: float | None = None, enforce_cfl: bool = True,
               bc: tuple[str, str] = ("transmissive", "transmissive")) -> np.ndarray:
    """One forward-Euler finite volume step w - lam*(f_{j+1/2} - f_{j-1/2}).

    ``lam`` is dt/dx.  Unless ``enforce_cfl`` is disabled, lam * sigma must
    not exceed the flux's region-preservation constant c0.
    """
    avgs = np.ascontiguousarray(avgs, dtype=float)
    if sigma is None:
        sigma = float(kernels.max_speed(avgs, g.gamma).max())
    if enforce_cfl and lam * sigma > cfl_constant(token) * (1.0 + 1e-12):
        raise ValueError(
            f"CFL violation: lam*sigma = {lam * sigma:.3e} > c0 = {cfl_constant(token)}")
    left, right = _interface_states_1d(avgs, avgs, bc)
    fhat = flux_interfaces(token, left, right, g,
                           sigma if token == "lxf-global" else None)
    return avgs - lam * (fhat[1:] - fhat[:-1])


# ---------------------------------------------------------------------------
# Time stepping
# ---------------------------------------------------------------------------


def wave_speeds(sol: DGSolution):
    """Global max wave speed over all test points.

    Returns a float in 1D and the directional pair (sigma_x, sigma_y) in 2D.
    """
    s1, s2 = kernels.speed_scan(sol.test_point_values(), sol.gas.gamma)
    return s1 if sol.mesh.dim == 1 else (s1, s2)


def total_mass(sol: DGSolution) -> np.ndarray:
    """Volume integral of each conserved component."""
    return sol.averages().sum(axis=tuple(range(sol.mesh.dim))) * sol.mesh.cell_volume


def _residual(sol: DGSolution, token: str, sigma_global, collect_bf: bool):
    if sol.mesh.dim == 1:
        return dg_residual_1d(sol, token, sigma_global, return_boundary_flux=collect_bf)
    return dg_residual_2d(sol, token, sigma_global, return_boundary_flux=collect_bf)


def ssp_rk3_step(sol: DGSolution, dt: float, token: str,
                 limiter_cfg: LimiterConfig | None = None, step_index: int = 0,
                 collect_boundary_flux: bool = False, max_events: int | None = None):
    """Advance ``sol`` in place by one SSP-RK3 step, limiting every stage.

    Returns the list of limiter events; with ``collect_boundary_flux`` the
    RK-weighted boundary flux integral of the step is returned as well, so
    callers can audit discrete conservation under open boundaries.
    """

    def stage_sigma(s):
        if token != "lxf-global":
            return None
        sig = wave_speeds(s)
        return sig if s.mesh.dim == 1 else max(sig)

    events: list[LimiterEvent] = []
    c0 = sol.coeffs.copy()

    def limited(stage):
        if limiter_cfg is None:
            return
        cap = None if max_events is None else max(0, max_events - len(events))
        events.extend(limit_field(sol, limiter_cfg, step_index, stage, max_events=cap))

    out0 = _residual(sol, token, stage_sigma(sol), collect_boundary_flux)
    r0, b0 = out0 if collect_boundary_flux else (out0, None)
    sol.coeffs[...] = c0 + dt * r0
    limited(0)

    out1 = _residual(sol, token, stage_sigma(sol), collect_boundary_flux)
    r1, b1 = out1 if collect_boundary_flux else (out1, None)
    sol.coeffs[...] = 0.75 * c0 + 0.25 * (sol.coeffs + dt * r1)
    limited(1)

    out2 = _residual(sol, token, stage_sigma(sol), collect_boundary_flux)
    r2, b2 = out2 if collect_boundary_flux else (out2, None)
    sol.coeffs[...] = c0 / 3.0 + 2.0 / 3.0 * (sol.coeffs + dt * r2)
    limited(2)

    sol.time += dt
    if collect_boundary_flux:
        return events, -dt * (b0 / 6.0 + b1 / 6.0 + 2.0 * b2 / 3.0)
    return events


@dataclass(frozen=True)
class CflPolicy:
    """Time-step selection.

    ``theoretical`` uses the provable region-preservation bound
    (c0/(N(N-1)) per unit wave speed in 1D, the rectangle-mesh analogue in
    2D); ``practical`` uses dx/(divisor*sigma) resp. 1/(divisor*eta) with
    divisor defaulting to 2N(N-1) (4 for P1, 12 for P2) and overridable via
    ``dt_divisor``.
    """

    mode: str = "practical"
    safety: float = 1.0
    dt_divisor: float | None = None

    def __post_init__(self):
        if self.mode not in ("theoretical", "practical"):
            raise ValueError(f"unknown CFL mode {self.mode!r}")
        if not 0.0 < self.safety <= 1.0:
            raise ValueError("safety factor must lie in (0, 1]")


def cfl_dt(sol: DGSolution, policy: CflPolicy, token: str) -> float:
    """Stable time step for the current solution state."""
    npts = lobatto_count_for_degree(sol.degree)
    c0 = cfl_constant(token)
    sig = wave_speeds(sol)
    if sol.mesh.dim == 1:
        if sig <= 0.0:
            raise ValueError("nonpositive wave speed")
        if policy.mode == "theoretical":
            return policy.safety * c0 * sol.mesh.dx / (npts * (npts - 1) * sig)
        divisor = policy.dt_divisor or 2.0 * npts * (npts - 1)
        return policy.safety * sol.mesh.dx / (divisor * sig)
    s1, s2 = sig
    if max(s1, s2) <= 0.0:
        raise ValueError("nonpositive wave speed")
    dx, dy = sol.mesh.dx, sol.mesh.dy
    w1 = 1.0 / (npts * (npts - 1))
    if policy.mode == "theoretical":
        return policy.safety * w1 * c0 * dx * dy / (4.0 * (dx + dy) * max(s1, s2))
    divisor = policy.dt_divisor or 2.0 * npts * (npts - 1)
    eta = s1 / dx + s2 / dy
    return policy.safety / (divisor * eta)


def triangular_cfl(area: float, perimeter: float, sigma: float, degree: int,
                   c0: float) -> float:
    """Max stable dt on one triangle: (2/3) w1 c0 |K| / (|dK| sigma)."""
    if min(area, perimeter, sigma) <= 0.0:
        raise ValueError("area, perimeter and sigma must be positive")
    npts = lobatto_count_for_degree(degree)
    w1 = 1.0 / (npts * (npts - 1))
    return 2.0 / 3.0 * w1 * c0 * area / (perimeter * sigma)


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------


def save_checkpoint(sol: DGSolution, path) -> None:
    """Dump modal coefficients as CSV with a one-line header.

    Header fields: dim degree nx ny gamma epsilon s0 time xlo xhi ylo yhi
    bc_x bc_y (space-separated key=value).  Rows hold one cell each: the
    cell index (i or i,j) followed by the C-order flattened coefficients,
    printed with repr for exact round-trips.
    """
    m = sol.mesh
    parts = {
        "dim": m.dim, "degree": sol.degree, "nx": m.nx, "ny": m.ny or 0,
        "gamma": repr(sol.gas.gamma), "epsilon": repr(sol.gas.epsilon),
        "s0": repr(sol.gas.s0), "time": repr(sol.time),
        "xlo": repr(m.xlim[0]), "xhi": repr(m.xlim[1]),
        "ylo": repr(m.ylim[0]) if m.dim == 2 else "0", "yhi": repr(m.ylim[1]) if m.dim == 2 else "0",
        "bc_x": ",".join(m.bc_x), "bc_y": ",".join(m.bc_y),
    }
    with open(path, "w") as fh:
        fh.write("# irpdg-checkpoint " + " ".join(f"{k}={v}" for k, v in parts.items()) + "\n")
        if m.dim == 1:
            for i in range(m.nx):
                row = sol.coeffs[i].ravel().tolist()
                fh.write(",".join([str(i)] + [repr(v) for v in row]) + "\n")
        else:
            for i in range(m.nx):
                for j in range(m.ny):
                    row = sol.coeffs[i, j].ravel().tolist()
                    fh.write(",".join([str(i), str(j)] + [repr(v) for v in row]) + "\n")


def load_checkpoint(path) -> DGSolution:
    """Rebuild a solution from :func:`save_checkpoint` output."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# irpdg-checkpoint "):
            raise ValueError("not an irpdg checkpoint file")
        kv = dict(item.split("=", 1) for item in header[len("# irpdg-checkpoint "):].split())
        dim = int(kv["dim"])
        degree = int(kv["degree"])
        nx, ny = int(kv["nx"]), int(kv["ny"])
        gas = GasModel(float(kv["gamma"]), float(kv["epsilon"]), float(kv["s0"]))
        bc_x = tuple(kv["bc_x"].split(","))
        bc_y = tuple(kv["bc_y"].split(","))
        if dim == 1:
            mesh = Mesh((float(kv["xlo"]), float(kv["xhi"])), nx, bc_x=bc_x)
            coeffs = np.empty((nx, 3, degree + 1))
        else:
            mesh = Mesh((float(kv["xlo"]), float(kv["xhi"])), nx,
                        (float(kv["ylo"]), float(kv["yhi"])), ny, bc_x=bc_x, bc_y=bc_y)
            coeffs = np.empty((nx, ny, 4, degree + 1, degree + 1))
        for line in fh:
            vals = line.strip().split(",")
            if dim == 1:
                i = int(vals[0])
                coeffs[i] = np.array([float(v) for v in vals[1:]]).reshape(3, degree + 1)
            else:
                i, j = int(vals[0]), int(vals[1])
                coeffs[i, j] = np.array([float(v) for v in vals[2:]]).reshape(4, degree + 1, degree + 1)
    return DGSolution(mesh, degree, gas, coeffs, time=float(kv["time"]))
