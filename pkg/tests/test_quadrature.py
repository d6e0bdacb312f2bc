import numpy as np
import pytest

from irpdg import quadrature as quad
from irpdg.quadrature import (
    gauss_legendre,
    gauss_lobatto,
    lobatto_count_for_degree,
    verify_decomposition,
)
from irpdg.solver import CellPolynomial


def reference_monomial_integral(p):
    # int_{-1/2}^{1/2} x^p dx
    return 0.0 if p % 2 else (0.5**p) / (p + 1)


class TestLobatto:
    def test_two_points_is_trapezoid(self):
        r = gauss_lobatto(2)
        assert np.allclose(r.nodes, [-0.5, 0.5])
        assert np.allclose(r.weights, [0.5, 0.5])

    def test_three_points_is_simpson(self):
        r = gauss_lobatto(3)
        assert np.allclose(r.nodes, [-0.5, 0.0, 0.5])
        assert np.allclose(r.weights, [1 / 6, 2 / 3, 1 / 6])

    def test_four_point_endpoint_weight(self):
        assert abs(gauss_lobatto(4).weights[0] - 1 / 12) < 1e-15

    @pytest.mark.parametrize("n", range(2, 9))
    def test_endpoint_weight_law(self, n):
        w = gauss_lobatto(n).weights
        assert abs(w[0] - 1.0 / (n * (n - 1))) <= 1e-14
        assert abs(w[-1] - 1.0 / (n * (n - 1))) <= 1e-14

    @pytest.mark.parametrize("n", range(2, 9))
    def test_exactness(self, n):
        r = gauss_lobatto(n)
        for p in range(2 * n - 2):
            got = np.sum(r.weights * r.nodes**p)
            assert abs(got - reference_monomial_integral(p)) < 1e-14

    def test_rejects_single_point(self):
        with pytest.raises(ValueError):
            gauss_lobatto(1)


class TestGauss:
    def test_midpoint(self):
        r = gauss_legendre(1)
        assert np.allclose(r.nodes, [0.0]) and np.allclose(r.weights, [1.0])

    def test_two_points(self):
        r = gauss_legendre(2)
        assert np.allclose(np.abs(r.nodes), 1 / (2 * np.sqrt(3.0)))

    def test_three_point_quartic(self):
        r = gauss_legendre(3)
        got = np.sum(r.weights * r.nodes**4)
        assert abs(got - 1.0 / 80.0) < 1e-15

    @pytest.mark.parametrize("n", range(1, 8))
    def test_exactness(self, n):
        r = gauss_legendre(n)
        for p in range(2 * n):
            got = np.sum(r.weights * r.nodes**p)
            assert abs(got - reference_monomial_integral(p)) < 1e-14

    def test_rejects_zero_points(self):
        with pytest.raises(ValueError):
            gauss_legendre(0)


@pytest.mark.parametrize("k,n", [(0, 2), (1, 2), (2, 3), (3, 3), (4, 4), (5, 4)])
def test_lobatto_count_for_degree(k, n):
    assert lobatto_count_for_degree(k) == n
    assert 2 * n - 3 >= k


class Test1DSet:
    def test_k1_endpoints(self):
        ts = quad.test_set_1d(1, (0.0, 0.25))
        assert np.allclose(ts.points, [0.0, 0.25])
        assert ts.interface_mask.tolist() == [True, True]

    def test_k2_midpoint(self):
        ts = quad.test_set_1d(2, (0.0, 0.2))
        assert np.allclose(ts.points, [0.0, 0.1, 0.2])

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_decomposition_matches_exact_average(self, k):
        rng = np.random.default_rng(k)
        coeffs = rng.standard_normal((3, k + 1))
        poly = CellPolynomial(k, coeffs, (0.3, 0.8))
        ts = quad.test_set_1d(k, (0.3, 0.8))
        assert verify_decomposition(poly, ts) < 1e-13 * np.abs(coeffs).max()


class TestRectSet:
    def test_k1_point_count(self):
        ts = quad.test_set_rect(1, ((0.0, 1.0), (0.0, 1.0)))
        assert ts.points.shape == (8, 2)
        assert ts.decomp_points.shape == (8, 2)

    def test_k2_dedups_center(self):
        ts = quad.test_set_rect(2, ((0.0, 1.0), (0.0, 1.0)))
        assert ts.decomp_points.shape[0] == 18
        assert ts.points.shape[0] == 17  # the cell center appears in both grids
        center = np.array([0.5, 0.5])
        assert np.any(np.all(np.isclose(ts.points, center), axis=1))

    def test_weights_sum_to_one(self):
        for k in (1, 2, 3):
            ts = quad.test_set_rect(k, ((0.0, 2.0), (-1.0, 0.5)))
            assert abs(ts.decomp_weights.sum() - 1.0) < 1e-13
            assert np.all(ts.decomp_weights > 0)

    def test_degenerate_cell_rejected(self):
        with pytest.raises(ValueError):
            quad.test_set_rect(1, ((0.0, 0.0), (0.0, 1.0)))

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_decomposition_against_tensor_quadrature(self, k):
        # oracle: dense tensor Gauss integration of the same polynomial
        rng = np.random.default_rng(10 + k)
        cell = ((0.2, 0.9), (-0.4, 0.4))
        coeffs = rng.standard_normal((4, k + 1, k + 1))
        poly = CellPolynomial(k, coeffs, cell)
        dense = gauss_legendre(k + 3)
        x = 0.5 * (cell[0][0] + cell[0][1]) + (cell[0][1] - cell[0][0]) * dense.nodes
        y = 0.5 * (cell[1][0] + cell[1][1]) + (cell[1][1] - cell[1][0]) * dense.nodes
        pts = np.array([(a, b) for a in x for b in y])
        wts = np.array([wa * wb for wa in dense.weights for wb in dense.weights])
        oracle_avg = np.tensordot(wts, poly.evaluate(pts), axes=(0, 0))
        assert np.allclose(oracle_avg, poly.average, atol=1e-13)
        ts = quad.test_set_rect(k, cell)
        assert verify_decomposition(poly, ts) <= 1e-13 * max(1.0, np.abs(coeffs).max())

    def test_corrupted_weights_detected(self):
        # negative control: permuted weights break the decomposition
        ts = quad.test_set_rect(2, ((0.0, 1.0), (0.0, 1.0)))
        rng = np.random.default_rng(3)
        bad = quad.TestSet(ts.points, ts.interface_mask, ts.decomp_points,
                      np.roll(ts.decomp_weights, 1), ref_points=ts.ref_points)
        coeffs = rng.standard_normal((4, 3, 3))
        poly = CellPolynomial(2, coeffs, ((0.0, 1.0), (0.0, 1.0)))
        assert verify_decomposition(poly, bad) > 1e-6


class TestTriangleSet:
    def test_triples_sum_to_one(self):
        for k in (1, 2, 3):
            tri = quad.test_set_triangle(k)
            assert np.allclose(tri.sum(axis=1), 1.0, atol=1e-14)
            assert np.all(tri >= -1e-15)

    def test_k1_count(self):
        assert quad.test_set_triangle(1).shape == (12, 3)

    def test_counts_formula(self):
        for k in (1, 2, 3, 4):
            n = lobatto_count_for_degree(k)
            assert quad.test_set_triangle(k).shape[0] == 3 * n * (k + 1)

    def test_lobatto_endpoints_hit_edges(self):
        # u = +-1/2 zeroes one barycentric coordinate: the point lies on an edge
        tri = quad.test_set_triangle(1)
        on_edge = np.isclose(tri, 0.0, atol=1e-15).any(axis=1)
        assert on_edge.sum() == tri.shape[0]  # k=1 has only endpoint Lobatto nodes

    def test_requires_degree_one(self):
        with pytest.raises(ValueError):
            quad.test_set_triangle(0)
