"""Shared fixtures: Legendre and truncated Gaussian measures at 128 nodes."""
import numpy as np
import pytest

from core.measure import WeightSpec, build_quadrature, stieltjes_recurrence
from core.transforms import CauchyRows

NODES = 128
N_MAX = 12


def rel_err(value, expected):
    """|value - expected| / |expected| for scalars or arrays (max)."""
    value = np.asarray(value, dtype=complex)
    expected = np.asarray(expected, dtype=complex)
    return float(np.max(np.abs(value - expected) / np.abs(expected)))


@pytest.fixture(scope="session")
def legendre():
    return build_quadrature(WeightSpec.create("legendre"), NODES)


@pytest.fixture(scope="session")
def legendre_table(legendre):
    return stieltjes_recurrence(legendre, N_MAX)


@pytest.fixture(scope="session")
def legendre_rows(legendre, legendre_table):
    return CauchyRows(legendre, legendre_table)


@pytest.fixture(scope="session")
def gaussian():
    return build_quadrature(WeightSpec.create("gaussian-truncated", [6.0]), NODES)


@pytest.fixture(scope="session")
def gaussian_table(gaussian):
    return stieltjes_recurrence(gaussian, N_MAX)


@pytest.fixture(scope="session")
def gaussian_rows(gaussian, gaussian_table):
    return CauchyRows(gaussian, gaussian_table)
