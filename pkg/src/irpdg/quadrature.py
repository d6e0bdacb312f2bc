"""Gauss and Gauss-Lobatto rules plus the per-cell test sets.

All reference rules live on [-1/2, 1/2] with weights summing to one, so a
weighted sum of point values is directly a cell average.  Test sets collect
the points at which admissibility of a DG polynomial must be enforced; they
also carry the positive weights that write the cell average as a convex
combination of those point values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss, legval
from scipy.special import roots_jacobi

__all__ = [
    "QuadratureRule",
    "TestSet",
    "gauss_legendre",
    "gauss_lobatto",
    "lobatto_count_for_degree",
    "test_set_1d",
    "test_set_rect",
    "test_set_triangle",
    "verify_decomposition",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on the reference interval [-1/2, 1/2]."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if abs(self.weights.sum() - 1.0) > 1e-14:
            raise ValueError("quadrature weights must sum to 1")

    def mapped(self, lo: float, hi: float) -> np.ndarray:
        """Physical node locations on the cell [lo, hi]."""
        mid = 0.5 * (lo + hi)
        return mid + (hi - lo) * self.nodes


def gauss_legendre(npts: int) -> QuadratureRule:
    """Gauss rule with ``npts`` points, exact for degree 2*npts - 1."""
    if npts < 1:
        raise ValueError(f"need at least 1 Gauss point, got {npts}")
    x, w = leggauss(npts)
    return QuadratureRule(0.5 * x, 0.5 * w)


def gauss_lobatto(npts: int) -> QuadratureRule:
    """Lobatto rule with ``npts`` points (endpoints included).

    Exact for degree 2*npts - 3; the endpoint weight is 1/(npts*(npts-1)).
    Interior nodes are the roots of P'_{npts-1}, obtained as Jacobi(1,1)
    roots rather than from tables.
    """
    if npts < 2:
        raise ValueError(f"need at least 2 Lobatto points, got {npts}")
    if npts == 2:
        interior = np.empty(0)
    else:
        interior, _ = roots_jacobi(npts - 2, 1.0, 1.0)
    x = np.concatenate(([-1.0], interior, [1.0]))
    pnm1 = legval(x, [0.0] * (npts - 1) + [1.0])
    w = 2.0 / (npts * (npts - 1) * pnm1**2)
    return QuadratureRule(0.5 * x, 0.5 * w)


def lobatto_count_for_degree(degree: int) -> int:
    """Smallest Lobatto point count N with 2N - 3 >= degree."""
    if degree < 0:
        raise ValueError("polynomial degree must be nonnegative")
    return max(2, math.ceil((degree + 3) / 2))


@dataclass(frozen=True)
class TestSet:
    """Admissibility points of one cell plus its average decomposition.

    ``points`` is the deduplicated set used for membership checks (physical
    coordinates, shape (n,) in 1D or (n, 2) in 2D) and ``interface_mask``
    flags points sitting on the cell boundary.  ``decomp_points`` /
    ``decomp_weights`` keep the full multiset realizing the cell average as
    a positive convex combination (weights sum to one).
    """

    points: np.ndarray
    interface_mask: np.ndarray
    decomp_points: np.ndarray
    decomp_weights: np.ndarray
    ref_points: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        w = np.asarray(self.decomp_weights, dtype=float)
        if np.any(w <= 0.0):
            raise ValueError("decomposition weights must be positive")
        if abs(w.sum() - 1.0) > 1e-13:
            raise ValueError("decomposition weights must sum to 1")


def test_set_1d(degree: int, cell: tuple[float, float]) -> TestSet:
    """Lobatto points of one interval cell; weights are the Lobatto weights."""
    lo, hi = cell
    if hi <= lo:
        raise ValueError("degenerate cell")
    rule = gauss_lobatto(lobatto_count_for_degree(degree))
    pts = rule.mapped(lo, hi)
    mask = np.zeros(pts.size, dtype=bool)
    mask[0] = mask[-1] = True
    return TestSet(pts, mask, pts, rule.weights.copy(), ref_points=rule.nodes.copy())


def _rect_grids(degree: int):
    """Reference-coordinate grids, weights and masks for a rectangle cell.

    Returns (decomp_ref, decomp_weights, unique_ref, interface_mask): the
    decomposition multiset is the union of a (Gauss x Lobatto) and a
    (Lobatto x Gauss) grid, each point weighted by half the product of its
    1D weights.
    """
    gauss = gauss_legendre(degree + 1)
    lob = gauss_lobatto(lobatto_count_for_degree(degree))
    gx, gw = gauss.nodes, gauss.weights
    lx, lw = lob.nodes, lob.weights

    pts = []
    wts = []
    for a, wa in zip(lx, lw):
        for b, wb in zip(gx, gw):
            pts.append((b, a))  # Gauss in x, Lobatto in y
            wts.append(0.5 * wb * wa)
            pts.append((a, b))  # Lobatto in x, Gauss in y
            wts.append(0.5 * wb * wa)
    decomp_ref = np.array(pts)
    weights = np.array(wts)

    unique_ref = np.unique(decomp_ref, axis=0)
    interface = (np.abs(np.abs(unique_ref[:, 0]) - 0.5) < 1e-14) | (
        np.abs(np.abs(unique_ref[:, 1]) - 0.5) < 1e-14
    )
    return decomp_ref, weights, unique_ref, interface


def test_set_rect(degree: int, cell) -> TestSet:
    """Tensor-union test set of a rectangle cell.

    ``cell`` is ((xlo, xhi), (ylo, yhi)).  Duplicated points (e.g. the cell
    center for odd point counts) are deduplicated in ``points`` but kept,
    with their separate weights, in the decomposition multiset.
    """
    (xlo, xhi), (ylo, yhi) = cell
    if xhi <= xlo or yhi <= ylo:
        raise ValueError("degenerate cell")
    decomp_ref, weights, unique_ref, interface = _rect_grids(degree)

    def to_phys(ref):
        out = np.empty_like(ref)
        out[:, 0] = 0.5 * (xlo + xhi) + (xhi - xlo) * ref[:, 0]
        out[:, 1] = 0.5 * (ylo + yhi) + (yhi - ylo) * ref[:, 1]
        return out

    return TestSet(
        to_phys(unique_ref),
        interface,
        to_phys(decomp_ref),
        weights,
        ref_points=unique_ref,
    )


def test_set_triangle(degree: int) -> np.ndarray:
    """Barycentric admissibility points for a triangle, shape (3*N*(k+1), 3).

    Each Lobatto/Gauss point pair generates three cyclic triples; every
    triple sums to one with nonnegative entries.  Only the point generator
    is provided (no decomposition weights, no triangular solver).
    """
    if degree < 1:
        raise ValueError("triangle test set needs degree >= 1")
    lob = gauss_lobatto(lobatto_count_for_degree(degree))
    gauss = gauss_legendre(degree + 1)
    triples = []
    for u in lob.nodes:
        for v in gauss.nodes:
            a = 0.5 + v
            b = (0.5 + u) * (0.5 - v)
            c = (0.5 - u) * (0.5 - v)
            triples.append((a, b, c))
            triples.append((c, a, b))
            triples.append((b, c, a))
    return np.array(triples)


def verify_decomposition(poly, ts: TestSet) -> float:
    """Max-abs defect of the weighted point sum against the exact average.

    ``poly`` needs ``evaluate(points)`` (returning (..., ncomp) values) and
    an ``average`` attribute; any degree-<=k cell polynomial paired with its
    own test set must come back below 1e-13 relative to its sup norm.
    """
    vals = np.asarray(poly.evaluate(ts.decomp_points))
    recon = np.tensordot(ts.decomp_weights, vals, axes=(0, 0))
    return float(np.max(np.abs(recon - np.asarray(poly.average))))
