"""Shared helpers: random admissible states and cell polynomials."""

import numpy as np
import pytest

from irpdg.euler import GasModel, conserved_1d, conserved_2d
from irpdg.solver import CellPolynomial


@pytest.fixture
def gas():
    return GasModel(1.4, s0=0.0)


def random_states_1d(rng, n, g, rho_range=(0.1, 3.0), s_range=(0.0, 1.5),
                     u_range=(-2.5, 2.5)):
    """States strictly inside the admissible region for entropy bound g.s0."""
    rho = np.exp(rng.uniform(np.log(rho_range[0]), np.log(rho_range[1]), n))
    s = g.s0 + rng.uniform(*s_range, n)
    p = np.exp(s) * rho**g.gamma
    u = rng.uniform(*u_range, n)
    return conserved_1d(rho, u, p, g)


def random_states_2d(rng, n, g, **kw):
    w = random_states_1d(rng, n, g, **kw)
    v = rng.uniform(-2.0, 2.0, n)
    rho, m, en = w[:, 0], w[:, 1], w[:, 2]
    return np.stack([rho, m, rho * v, en + 0.5 * rho * v**2], axis=-1)


def random_cell_poly(rng, degree, g, amp=0.3, cell=(0.0, 1.0)):
    """Random 1D cell polynomial whose average sits inside the region."""
    base = random_states_1d(rng, 1, g, rho_range=(0.5, 2.0), s_range=(0.3, 1.0),
                            u_range=(-1.0, 1.0))[0]
    coeffs = np.zeros((3, degree + 1))
    coeffs[:, 0] = base
    coeffs[:, 1:] = amp * rng.standard_normal((3, degree)) * np.abs(base)[:, None]
    return CellPolynomial(degree, coeffs, cell, cell_id=0)
