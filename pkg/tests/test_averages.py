"""Tests for the closed-form averages and their cross-formula identities."""
import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import rel_err
from core import averages
from core.errors import ComplexityLimit, DegenerateShift, DegreeOutOfRange, UnsupportedRegime
from core.oracle import OracleConfig, brute_force_average
from core.transforms import SpectralShift

LN3 = math.log(3.0)
RATIO_1 = (2.0 + LN3) / 2.0


class TestProductAverage:

    def test_empty_product(self, legendre_table):
        assert averages.product_average(legendre_table, [], 3).value == 1.0

    def test_heine_single_point(self, legendre_table):
        result = averages.product_average(legendre_table, [0.7], 3)
        assert result.value == pytest.approx(legendre_table.monic(3, 0.7))

    def test_legendre_two_points(self, legendre_table):
        value = averages.product_average(legendre_table, [2.0, 3.0], 1).value
        assert value == pytest.approx(2.0 * 3.0 + 1.0 / 3.0, rel=1e-13)

    def test_gaussian_two_points(self, gaussian_table):
        value = averages.product_average(gaussian_table, [1.5, -2.0], 1).value
        assert value == pytest.approx(1.5 * -2.0 + 0.5, rel=1e-10)

    def test_gaussian_pi2(self, gaussian_table):
        result = averages.product_average(gaussian_table, [5.0], 2)
        assert result.value == pytest.approx(24.5, rel=1e-12)
        assert result.formula_id == "product"

    def test_symmetric_in_points(self, legendre_table):
        a = averages.product_average(legendre_table, [2.0, 3.0, -1.5], 2).value
        b = averages.product_average(legendre_table, [-1.5, 2.0, 3.0], 2).value
        assert a == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_large_points_approach_monomials(self, legendre_table, N):
        mu = [1e8, 3e8]
        value = averages.product_average(legendre_table, mu, N).value
        assert value.real / (mu[0] * mu[1]) ** N == pytest.approx(1.0, rel=1e-6)

    def test_repeated_points(self, legendre_table):
        with pytest.raises(DegenerateShift):
            averages.product_average(legendre_table, [2.0, 2.0], 1)

    def test_degree_out_of_range(self, legendre_table):
        with pytest.raises(DegreeOutOfRange):
            averages.product_average(legendre_table, [1.0, 2.0], legendre_table.n_max)


class TestInverseAverage:

    def test_single_pole(self, legendre_table, legendre_rows):
        result = averages.inverse_average(legendre_table, legendre_rows, [2.0], 1)
        assert result.value == pytest.approx(LN3 / 2.0, rel=1e-13)
        assert result.node_count == 128

    def test_m_exceeds_n(self, legendre_table, legendre_rows):
        with pytest.raises(UnsupportedRegime, match="M exceeds N"):
            averages.inverse_average(legendre_table, legendre_rows, [2.0, 3.0], 1)

    def test_matches_oracle(self, legendre, legendre_table, legendre_rows):
        cfg = OracleConfig(nodes_per_dim=24)
        closed = averages.inverse_average(legendre_table, legendre_rows, [2.0], 2).value
        brute = brute_force_average(legendre, [], [2.0], 2, cfg)
        assert rel_err(brute, closed) < 1e-8

    def test_as_product(self, legendre_table, legendre_rows):
        eps = [2.0, 0.5 + 1.0j]
        closed = averages.inverse_average(legendre_table, legendre_rows, eps, 3).value
        assert averages.inverse_as_product(legendre_table, legendre_rows, eps, 3) == \
            pytest.approx(closed, rel=1e-10)


class TestRatioAverage:

    def test_one_over_one(self, legendre_table, legendre_rows):
        result = averages.ratio_average(legendre_table, legendre_rows, [3.0], [2.0], 1)
        assert result.value == pytest.approx(RATIO_1, rel=1e-13)
        assert result.formula_id == "ratio"

    def test_reduces_to_product(self, legendre_table, legendre_rows):
        result = averages.ratio_average(legendre_table, legendre_rows, [3.0], [], 2)
        assert result.formula_id == "ratio"
        assert result.value == pytest.approx(legendre_table.monic(2, 3.0))

    def test_reduces_to_inverse(self, legendre_table, legendre_rows):
        value = averages.ratio_average(legendre_table, legendre_rows, [], [2.0], 1).value
        assert value == pytest.approx(LN3 / 2.0, rel=1e-13)

    def test_matches_oracle(self, legendre, legendre_table, legendre_rows):
        cfg = OracleConfig(nodes_per_dim=24)
        closed = averages.ratio_average(legendre_table, legendre_rows, [3.0, 4.0], [2.0], 2).value
        brute = brute_force_average(legendre, [3.0, 4.0], [2.0], 2, cfg)
        assert rel_err(brute, closed) < 1e-7

    def test_complex_pole_matches_oracle(self, gaussian, gaussian_table, gaussian_rows):
        cfg = OracleConfig(nodes_per_dim=24)
        closed = averages.ratio_average(gaussian_table, gaussian_rows, [5.0], [4 + 3j], 2).value
        brute = brute_force_average(gaussian, [5.0], [4 + 3j], 2, cfg)
        assert rel_err(brute, closed) < 1e-6

    def test_real_inputs_give_real_value(self, legendre_table, legendre_rows):
        value = averages.ratio_average(legendre_table, legendre_rows,
                                       [3.0, 4.0], [2.0, -2.5], 3).value
        assert abs(value.imag) < 1e-12 * abs(value)

    def test_permutation_invariance(self, legendre_table, legendre_rows):
        a = averages.ratio_average(legendre_table, legendre_rows, [3.0, 4.0], [2.0, -2.5], 2)
        b = averages.ratio_average(legendre_table, legendre_rows, [4.0, 3.0], [-2.5, 2.0], 2)
        assert b.value == pytest.approx(a.value, rel=1e-12)

    def test_m_exceeds_n(self, legendre_table, legendre_rows):
        with pytest.raises(UnsupportedRegime, match="M exceeds N"):
            averages.ratio_average(legendre_table, legendre_rows, [3.0], [2.0, 4.0, 5.0], 2)

    def test_coincident_mu_and_eps(self, legendre_table, legendre_rows):
        with pytest.raises(DegenerateShift):
            averages.ratio_average(legendre_table, legendre_rows, [2.0], [2.0], 1)


class TestMixedAverage:

    def test_one_over_one(self, legendre_table, legendre_rows):
        value = averages.mixed_average(legendre_table, legendre_rows, [3.0], [2.0], 1).value
        assert value == pytest.approx(1.0 + 2.0 / LN3, rel=1e-13)

    @pytest.mark.parametrize("k,N", [(1, 1), (1, 3), (2, 2), (2, 4)])
    def test_times_inverse_is_ratio(self, legendre_table, legendre_rows, k, N):
        mu, eps = [3.0, 4.0][:k], [2.0, -2.5][:k]
        mixed = averages.mixed_average(legendre_table, legendre_rows, mu, eps, N).value
        inverse = averages.inverse_average(legendre_table, legendre_rows, eps, N).value
        ratio = averages.ratio_average(legendre_table, legendre_rows, mu, eps, N).value
        assert mixed * inverse == pytest.approx(ratio, rel=1e-10)


class TestKernels:

    def test_w1_diagonal_is_continuous(self, legendre_table):
        x = 0.4 + 0.1j
        on = averages.kernel_W_I(legendre_table, x, x, 4).value
        near = averages.kernel_W_I(legendre_table, x, x + 1e-5, 4).value
        assert near == pytest.approx(on, rel=1e-3)

    def test_w2_normalized(self, legendre_table, legendre_rows):
        kernel = averages.kernel_W_II(legendre_table, legendre_rows, 2.0, 3.0, 2)
        assert kernel.normalized == pytest.approx(kernel.value / (2j * math.pi))

    def test_w2_rejects_equal_points(self, legendre_table, legendre_rows):
        with pytest.raises(DegenerateShift):
            averages.kernel_W_II(legendre_table, legendre_rows, 3.0, 3.0, 2)


class TestTwoPoint:

    @pytest.mark.parametrize("K,N", [(1, 1), (1, 3), (2, 0), (2, 2)])
    def test_product_matches_direct(self, legendre_table, K, N):
        lam, mu = [2.0, -3.0][:K], [2.5, 4.0][:K]
        kernel = averages.two_point_product(legendre_table, lam, mu, N).value
        direct = averages.product_average(legendre_table, lam + mu, N).value
        assert kernel == pytest.approx(direct, rel=1e-10)

    def test_product_unequal_lengths(self, legendre_table):
        with pytest.raises(UnsupportedRegime):
            averages.two_point_product(legendre_table, [2.0], [3.0, 4.0], 1)

    def test_ratio_one_over_one(self, legendre_table, legendre_rows):
        value = averages.two_point_ratio(legendre_table, legendre_rows, [2.0], [3.0], 1).value
        assert value == pytest.approx(RATIO_1, rel=1e-12)

    @pytest.mark.parametrize("K,N", [(1, 2), (2, 2), (2, 3)])
    def test_ratio_matches_direct(self, legendre_table, legendre_rows, K, N):
        eps, mu = [2.0, -2.5][:K], [3.0, 4.0][:K]
        kernel = averages.two_point_ratio(legendre_table, legendre_rows, eps, mu, N).value
        direct = averages.ratio_average(legendre_table, legendre_rows, mu, eps, N).value
        assert kernel == pytest.approx(direct, rel=1e-8)

    def test_ratio_needs_k_at_most_n(self, legendre_table, legendre_rows):
        with pytest.raises(UnsupportedRegime):
            averages.two_point_ratio(legendre_table, legendre_rows, [2.0, -2.5], [3.0, 4.0], 1)


class TestRatioViaProducts:

    def test_one_over_one(self, legendre, legendre_table):
        value = averages.ratio_via_products(legendre, legendre_table, [3.0], [2.0], 1).value
        assert value == pytest.approx(RATIO_1, rel=1e-7)

    @pytest.mark.parametrize("mu,eps,N", [([3.0], [2.0], 2), ([3.0, 4.0], [2.0], 2),
                                          ([3.0], [2.0, -2.5], 2)])
    def test_matches_ratio(self, legendre, legendre_table, legendre_rows, mu, eps, N):
        folded = averages.ratio_via_products(legendre, legendre_table, mu, eps, N).value
        direct = averages.ratio_average(legendre_table, legendre_rows, mu, eps, N).value
        assert folded == pytest.approx(direct, rel=1e-7)

    def test_no_poles(self, legendre, legendre_table):
        value = averages.ratio_via_products(legendre, legendre_table, [3.0], [], 2).value
        assert value == pytest.approx(legendre_table.monic(2, 3.0))

    def test_inner_average_uses_product_formula(self, legendre, legendre_table, monkeypatch):
        calls = []
        product = averages.product_average

        def recording(table, points, N):
            calls.append((len(points), N))
            return product(table, points, N)

        monkeypatch.setattr(averages, "product_average", recording)
        averages.ratio_via_products(legendre, legendre_table, [3.0, 4.0], [2.0], 2)
        assert len(calls) == legendre.node_count
        assert set(calls) == {(3, 1)}

    def test_scaled_product_formula_changes_result(self, legendre, legendre_table, monkeypatch):
        reference = averages.ratio_via_products(legendre, legendre_table, [3.0], [2.0], 2).value
        product = averages.product_average

        def doubled_product(table, points, N):
            inner = product(table, points, N)
            return replace(inner, value=2.0 * inner.value)

        monkeypatch.setattr(averages, "product_average", doubled_product)
        doubled = averages.ratio_via_products(legendre, legendre_table, [3.0], [2.0], 2).value
        assert doubled == pytest.approx(2.0 * reference, rel=1e-12)

    def test_mu_on_a_node(self, legendre, legendre_table, legendre_rows):
        node = float(legendre.nodes[40])
        folded = averages.ratio_via_products(legendre, legendre_table, [node], [2.0], 2).value
        direct = averages.ratio_average(legendre_table, legendre_rows, [node], [2.0], 2).value
        assert folded == pytest.approx(direct, rel=1e-7, abs=1e-12)

    def test_fold_limit(self, legendre, legendre_table):
        with pytest.raises(ComplexityLimit):
            averages.ratio_via_products(legendre, legendre_table, [3.0], [2.0, 4.0, 5.0], 3)


class TestPartitionRatio:

    @pytest.mark.parametrize("mu,eps,N", [([3.0], [2.0], 1), ([3.0], [2.0], 3),
                                          ([3.0, 4.0], [2.0], 2), ([-3.0], [2.0], 2)])
    def test_matches_ratio(self, legendre, legendre_table, legendre_rows, mu, eps, N):
        shift = SpectralShift(tuple(mu), tuple(eps))
        value = averages.partition_ratio_average(legendre, legendre_table, shift, N).value
        direct = averages.ratio_average(legendre_table, legendre_rows, mu, eps, N).value
        assert value == pytest.approx(direct, rel=1e-10)

    def test_complex_shift_rejected(self, legendre, legendre_table):
        from core.errors import InvalidWeight
        with pytest.raises(InvalidWeight):
            averages.partition_ratio_average(legendre, legendre_table,
                                             SpectralShift(eps=(1j,)), 1)


class TestCrossFormulaSquare:

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_gaussian_square(self, gaussian, gaussian_table, gaussian_rows, N):
        mu, eps = [5.0], [4.0 + 1.0j]
        ratio = averages.ratio_average(gaussian_table, gaussian_rows, mu, eps, N).value
        kernel = averages.two_point_ratio(gaussian_table, gaussian_rows, eps, mu, N).value
        mixed = averages.mixed_average(gaussian_table, gaussian_rows, mu, eps, N).value
        inverse = averages.inverse_average(gaussian_table, gaussian_rows, eps, N).value
        folded = averages.ratio_via_products(gaussian, gaussian_table, mu, eps, N).value
        for other in (kernel, mixed * inverse, folded):
            assert rel_err(other, ratio) < 1e-7
