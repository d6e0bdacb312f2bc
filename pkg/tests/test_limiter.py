import numpy as np
import pytest

from irpdg.euler import GasModel, conserved_1d, pressure, q_functional
from irpdg.limiter import (
    EVENT_CSV_HEADER,
    LimiterConfig,
    RegionViolationError,
    limit_cell,
    limit_field,
    theta_euler,
    theta_generic,
    write_events_csv,
)
from irpdg import quadrature
from irpdg.solver import CellPolynomial, DGSolution, Mesh, l2_project
from conftest import random_cell_poly, random_states_1d


class TestThetaGeneric:
    def test_table_values(self):
        # logged limiter inputs round-trip: q_bar = -2.29e-2, q_max = 4.48e-3
        th = theta_generic(-2.29e-2, 4.48e-3)
        assert th == pytest.approx(0.0229 / (0.0229 + 0.00448), rel=1e-12)
        assert th == pytest.approx(0.8360, abs=1e-3)

    def test_no_violation(self):
        assert theta_generic(-1.0, -0.5) == 1.0
        assert theta_generic(-1.0, 0.0) == 1.0

    def test_symmetric_case(self):
        assert theta_generic(-1.0, 1.0) == pytest.approx(0.5)

    def test_boundary_average_rejected(self):
        with pytest.raises(RegionViolationError):
            theta_generic(0.0, 1.0)


class TestThetaEuler:
    def test_all_admissible(self, gas):
        rng = np.random.default_rng(0)
        samples = random_states_1d(rng, 6, gas, s_range=(0.2, 1.0))
        wbar = samples.mean(axis=0)
        assert theta_euler(wbar, samples, gas) == 1.0

    def test_density_floor_boundary_counts_as_admissible(self, gas):
        wbar = conserved_1d(1.0, 0.0, np.e, gas)  # s = 1 > s0, interior
        low = conserved_1d(gas.epsilon, 0.0, np.e, gas)  # rho exactly at the floor
        assert theta_euler(wbar, np.stack([wbar, low]), gas) == 1.0

    def test_entropy_table_value(self, gas):
        # build samples realizing q_bar = -5.75e-3, q_max = 1.02e-3 through
        # the generic single-constraint ratio
        th3 = theta_generic(-5.75e-3, 1.02e-3)
        assert th3 == pytest.approx(0.8494, abs=1e-4)
        assert th3 == pytest.approx(0.8491, abs=5e-4)

    def test_rejects_inadmissible_average(self, gas):
        bad = conserved_1d(1.0, 0.0, 0.5, gas)  # p = 0.2 -> s < 0 = s0
        samples = np.stack([bad, bad])
        with pytest.raises(RegionViolationError):
            theta_euler(bad, samples, gas)


def _poly_with_entropy_violation(gas):
    """P1 cell with a small entropy margin whose right endpoint breaks it."""
    base = conserved_1d(1.0, 0.0, np.exp(0.05), gas)  # s = 0.05, just inside
    coeffs = np.zeros((3, 2))
    coeffs[:, 0] = base
    coeffs[0, 1] = 0.35 / np.sqrt(3.0)  # density +-0.35 at the endpoints
    return CellPolynomial(1, coeffs, (0.0, 1.0), cell_id=7)


class TestLimitCell:
    def test_constant_poly_identity(self, gas):
        w = conserved_1d(1.0, 0.2, 2.0, gas)
        coeffs = np.zeros((3, 2))
        coeffs[:, 0] = w
        poly = CellPolynomial(1, coeffs, (0.0, 0.5))
        out, ev = limit_cell(poly, quadrature.test_set_1d(1, (0.0, 0.5)), gas)
        assert ev is None
        assert np.array_equal(out.coeffs, coeffs)

    def test_boundary_average_flattens_to_theta_zero(self, gas):
        # average exactly on q = 0 with a genuine sample violation: the
        # only admissible convex combination is the average itself
        base = conserved_1d(1.0, 0.0, 1.0, gas)  # s = 0 = s0: on the boundary
        coeffs = np.zeros((3, 2))
        coeffs[:, 0] = base
        coeffs[0, 1] = 0.3  # density tilt pushes one endpoint outside
        poly = CellPolynomial(1, coeffs, (0.0, 1.0))
        out, ev = limit_cell(poly, quadrature.test_set_1d(1, (0.0, 1.0)), gas)
        assert ev is not None and ev.theta == 0.0
        assert np.allclose(out.coeffs[:, 1], 0.0)
        assert np.array_equal(out.average, poly.average)

    def test_average_beyond_slack_rejected(self, gas):
        # a genuinely inadmissible average (q > 0 beyond round-off) aborts
        base = conserved_1d(1.0, 0.0, np.exp(-0.05), gas)  # s = -0.05 < s0
        coeffs = np.zeros((3, 2))
        coeffs[:, 0] = base
        coeffs[0, 1] = 0.3
        poly = CellPolynomial(1, coeffs, (0.0, 1.0))
        with pytest.raises(RegionViolationError):
            limit_cell(poly, quadrature.test_set_1d(1, (0.0, 1.0)), gas)

    def test_entropy_violation_clipped(self, gas):
        poly = _poly_with_entropy_violation(gas)
        ts = quadrature.test_set_1d(1, (0.0, 1.0))
        vals = poly.evaluate(ts.points)
        assert q_functional(vals, gas).max() > 0.0  # the premise: a violation
        out, ev = limit_cell(poly, ts, gas)
        assert ev is not None and 0.0 < ev.theta < 1.0
        assert np.allclose(out.average, poly.average, rtol=1e-14)
        lim_vals = out.evaluate(ts.points)
        assert q_functional(lim_vals, gas).max() <= 1e-12
        assert lim_vals[:, 0].min() >= gas.epsilon - 1e-12
        assert pressure(lim_vals, gas).min() >= gas.epsilon - 1e-12

    def test_positivity_mode_ignores_entropy(self, gas):
        poly = _poly_with_entropy_violation(gas)
        ts = quadrature.test_set_1d(1, (0.0, 1.0))
        cfg = LimiterConfig(mode="positivity")
        out, ev = limit_cell(poly, ts, gas, cfg)
        assert ev is None  # density and pressure are fine here
        assert np.array_equal(out.coeffs, poly.coeffs)

    def test_generic_mode_with_q_functional(self, gas):
        poly = _poly_with_entropy_violation(gas)
        ts = quadrature.test_set_1d(1, (0.0, 1.0))
        cfg = LimiterConfig(mode="generic", functional=lambda w: q_functional(w, gas))
        out, ev = limit_cell(poly, ts, gas, cfg)
        assert ev is not None
        assert q_functional(out.evaluate(ts.points), gas).max() <= 1e-12


def _field(gas, n=40, k=2, seed=0, amp=0.25):
    rng = np.random.default_rng(seed)
    mesh = Mesh((0.0, 1.0), n)
    coeffs = np.zeros((n, 3, k + 1))
    base = random_states_1d(rng, n, gas, rho_range=(0.5, 2.0), s_range=(0.3, 1.2),
                            u_range=(-1.0, 1.0))
    coeffs[:, :, 0] = base
    coeffs[:, :, 1:] = amp * rng.standard_normal((n, 3, k)) * np.abs(base)[:, :, None]
    return DGSolution(mesh, k, gas, coeffs)


class TestLimitField:
    def test_admissible_field_untouched(self, gas):
        sol = _field(gas, amp=0.0)
        before = sol.coeffs.copy()
        events = limit_field(sol)
        assert events == []
        assert np.array_equal(sol.coeffs, before)

    def test_single_violating_cell(self, gas):
        sol = _field(gas, amp=0.0)
        sol.coeffs[11, 0, 1] = 0.9 * sol.coeffs[11, 0, 0]  # heavy density tilt
        events = limit_field(sol, step_index=3, stage_index=1)
        assert len(events) == 1
        ev = events[0]
        assert ev.cell_id == 11 and ev.step_index == 3 and ev.stage_index == 1

    def test_region_enforced_on_random_fields(self, gas):
        sol = _field(gas, n=200, k=2, seed=1, amp=0.6)
        cfg = LimiterConfig(epsilon=gas.epsilon)
        limit_field(sol, cfg)
        vals = sol.test_point_values()
        rho = vals[:, 0]
        p = 0.4 * (vals[:, 2] - 0.5 * vals[:, 1] ** 2 / rho)
        assert rho.min() >= gas.epsilon - 1e-12
        assert p.min() >= gas.epsilon - 1e-12
        ok = (rho > 0) & (p > 0)
        q = np.where(ok, (gas.s0 - (np.log(np.where(ok, p, 1)) - 1.4 * np.log(np.where(ok, rho, 1)))) * rho, np.inf)
        assert q.max() <= 1e-12

    def test_conservation_and_idempotence(self, gas):
        sol = _field(gas, n=300, k=2, seed=2, amp=0.8)
        before = sol.averages().copy()
        limit_field(sol)
        after = sol.averages()
        assert np.allclose(after, before, rtol=1e-14, atol=0.0)
        once = sol.coeffs.copy()
        events = limit_field(sol)
        assert events == []
        assert np.max(np.abs(sol.coeffs - once)) <= 1e-13

    def test_scaling_structure(self, gas):
        # every non-mean mode is scaled by the same theta, so any linear
        # functional vanishing on the average scales exactly by theta
        sol = _field(gas, n=50, k=2, seed=3, amp=0.9)
        before = sol.coeffs.copy()
        events = limit_field(sol)
        assert events
        for ev in events:
            i = ev.cell_id
            assert np.allclose(sol.coeffs[i, :, 1:], ev.theta * before[i, :, 1:],
                               rtol=1e-14, atol=1e-300)

    def test_fatal_diagnostic_names_cell(self, gas):
        sol = _field(gas, amp=0.0)
        sol.coeffs[17, :, 0] = conserved_1d(1.0, 0.0, 0.1, gas)  # p < 0... inadmissible avg
        sol.coeffs[17, 0, 1] = 2.0  # force a violation so the check trips
        with pytest.raises(RegionViolationError, match="17"):
            limit_field(sol)

    def test_event_cap(self, gas):
        sol = _field(gas, n=100, k=1, seed=4, amp=1.2)
        events = limit_field(sol, max_events=5)
        assert len(events) <= 5


class TestAccuracyPreservation:
    def test_limited_projection_stays_close(self, gas):
        # smooth data: the limiter's deviation is bounded by a constant
        # multiple of the projection error across refinements
        def initial(x):
            rho = 1.0 + 0.5 * np.sin(2 * np.pi * x)
            return conserved_1d(rho, np.ones_like(x), np.ones_like(x), gas)

        for k in (1, 2):
            ratios = []
            for n in (16, 32, 64):
                mesh = Mesh((0.0, 1.0), n)
                sol = l2_project(initial, mesh, k, gas)
                from irpdg.solver import estimate_entropy_floor

                sol.gas = gas.with_entropy_floor(estimate_entropy_floor(sol))
                unlimited = sol.copy()
                limit_field(sol)
                xs = np.linspace(0.0, 1.0, 2000, endpoint=False)
                cells = np.minimum((xs * n).astype(int), n - 1)
                num = np.empty((xs.size, 3))
                ref = np.empty_like(num)
                for j in np.unique(cells):
                    m = cells == j
                    num[m] = sol.cell_poly(j).evaluate(xs[m])
                    ref[m] = unlimited.cell_poly(j).evaluate(xs[m])
                exact = initial(xs)
                dev = np.abs(num - ref).max()
                err = np.abs(ref - exact).max()
                ratios.append(dev / err)
            assert max(ratios) < 1.0  # deviation stays below the projection error

    def test_event_csv_round_trip(self, gas, tmp_path):
        sol = _field(gas, n=60, k=2, seed=5, amp=0.8)
        events = limit_field(sol, step_index=2, stage_index=1)
        assert events
        path = tmp_path / "events.csv"
        write_events_csv(events, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(EVENT_CSV_HEADER)
        assert len(lines) == len(events) + 1
        first = lines[1].split(",")
        assert first[0] == "2" and first[1] == "1"
