"""Tests for Jacobi operators, partition ladders and the entry formulas."""
import math

import numpy as np
import pytest

from core.darboux import (JacobiOperator, build_jacobi, darboux_jacobi, gamma_relation_check,
                          transformed_jacobi, verify_entry_formulas, z_ladder)
from core.errors import DegreeOutOfRange, PrecisionLoss, UnsupportedRegime
from core.measure import WeightSpec, build_quadrature, monic_roots, stieltjes_recurrence
from core.transforms import SpectralShift


@pytest.fixture(scope="module")
def linear_weight():
    # w(t) = 1 - t on [-1, 1]; its recurrence has a_n != 0
    return build_quadrature(WeightSpec.create("jacobi-like", [1.0, 0.0]), 64)


class TestJacobiOperator:

    def test_legendre_dim3(self, legendre_table):
        op = build_jacobi(legendre_table, 3)
        assert op.offdiag == pytest.approx([1 / math.sqrt(3), 2 / math.sqrt(15)], rel=1e-13)
        assert np.max(np.abs(op.diag)) < 1e-14

    def test_matrix_symmetric(self, gaussian_table):
        matrix = build_jacobi(gaussian_table, 5).matrix()
        assert matrix.shape == (5, 5)
        np.testing.assert_array_equal(matrix, matrix.T)

    @pytest.mark.parametrize("dim", [1, 3, 6])
    def test_spectrum_is_roots(self, legendre_table, dim):
        eigenvalues = build_jacobi(legendre_table, dim).eigenvalues()
        roots = monic_roots(legendre_table, dim, (-1.0, 1.0))
        assert eigenvalues == pytest.approx(roots, abs=1e-12)

    def test_dimension_out_of_range(self, legendre_table):
        with pytest.raises(DegreeOutOfRange):
            build_jacobi(legendre_table, legendre_table.n_max + 1)

    def test_rejects_non_positive_offdiag(self):
        with pytest.raises(PrecisionLoss):
            JacobiOperator(diag=[0.0, 0.0], offdiag=[0.0])

    def test_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            JacobiOperator(diag=[0.0, 0.0], offdiag=[1.0, 1.0])


class TestTransformedJacobi:

    @pytest.mark.parametrize("shift", [
        SpectralShift(mu=(2.0,)),
        SpectralShift(mu=(2.0, -3.0)),
        SpectralShift(eps=(2.0,)),
        SpectralShift(mu=(3.0,), eps=(2.0,)),
    ])
    def test_formula_matches_stieltjes(self, legendre, legendre_table, legendre_rows, shift):
        direct = transformed_jacobi(legendre, shift, 6)
        formula = darboux_jacobi(legendre, legendre_table, legendre_rows, shift, 6)
        assert formula.diag == pytest.approx(direct.diag, abs=1e-10)
        assert formula.offdiag == pytest.approx(direct.offdiag, rel=1e-10)

    def test_two_poles_unsupported(self, legendre, legendre_table, legendre_rows):
        with pytest.raises(UnsupportedRegime):
            darboux_jacobi(legendre, legendre_table, legendre_rows,
                           SpectralShift(eps=(2.0, 3.0)), 4)

    def test_single_root_shifts_mean(self, legendre):
        # (2 - t) dt on [-1, 1] has mean -1/6
        op = transformed_jacobi(legendre, SpectralShift(mu=(2.0,)), 2)
        assert op.diag[0] == pytest.approx(-1.0 / 6.0, rel=1e-13)


class TestPartitionLadder:

    def test_legendre(self, legendre_table):
        ladder = z_ladder(legendre_table, 2)
        assert len(ladder) == 3
        assert ladder[0] == 1.0
        assert ladder[1] == pytest.approx(2.0)
        assert ladder[2] == pytest.approx(8.0 / 3.0, rel=1e-13)

    def test_gaussian(self, gaussian_table):
        assert z_ladder(gaussian_table, 2)[2] == pytest.approx(math.pi, rel=1e-10)

    def test_length_out_of_range(self, legendre_table):
        with pytest.raises(DegreeOutOfRange):
            z_ladder(legendre_table, legendre_table.n_max + 2)


class TestEntryFormulas:

    @pytest.mark.parametrize("n", [0, 1, 4])
    def test_gaussian(self, gaussian, gaussian_table, n):
        report = verify_entry_formulas(gaussian, n, table=gaussian_table)
        assert report.b_alignment == "b_{n+1}"
        assert report.b_discrepancy < 1e-7
        assert report.a_discrepancy < 1e-7

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_asymmetric_weight_alignment(self, linear_weight, n):
        report = verify_entry_formulas(linear_weight, n)
        assert report.b_alignment == "b_{n+1}"
        assert report.a_alignment == "-a_{n+1}"
        assert report.a_formula == pytest.approx(report.a_next, abs=1e-7)
        assert report.b_sq_formula == pytest.approx(report.b_sq_next, rel=1e-12)

    def test_report_as_dict(self, legendre, legendre_table):
        data = verify_entry_formulas(legendre, 2, table=legendre_table).as_dict()
        assert data["n"] == 2
        assert set(data) >= {"b_sq_formula", "a_formula", "b_alignment", "a_alignment"}

    def test_needs_two_extra_degrees(self, legendre, legendre_table):
        with pytest.raises(DegreeOutOfRange):
            verify_entry_formulas(legendre, legendre_table.n_max - 1, table=legendre_table)


class TestGammaRelation:

    @pytest.mark.parametrize("eps", [2.0, 0.5 + 1.0j])
    def test_legendre(self, legendre_table, legendre_rows, eps):
        report = gamma_relation_check(legendre_table, legendre_rows, eps, 4)
        assert report["gamma_relation"] < 1e-13
        assert report["single_inverse"] < 1e-12
