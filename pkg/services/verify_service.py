"""
Verify Service - Runs the identity and oracle checks and reports pass/fail per check
"""
import logging
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core import averages, darboux, oracle, transforms
from core.config_manager import ConfigManager
from core.errors import EXIT_OK, EXIT_VERIFY, SpectralError, exit_code_for
from core.measure import build_quadrature, monic_roots, stieltjes_recurrence
from core.transforms import CauchyRows, SpectralShift
from interfaces.weight_interface import WeightRegistry
from services.measure_service import MeasureService

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["suite", "check", "passed", "discrepancy", "tolerance", "message"]

# Smallest table the suites need
MIN_TABLE_DEGREE = 10

# Oracle comparison ranges; Heine points are offsets from the support center
HEINE_ORDERS = (1, 2, 3, 4)
HEINE_POINTS = (2.0, 3.0, 5.0, 2.0 + 1.0j, 10.0)
PRODUCT_ORDERS = (1, 2, 3)
INVERSE_ORDERS = (2, 3)
RATIO_CASES = ((1, 1, 1), (1, 1, 2), (2, 1, 2), (2, 2, 2), (2, 2, 3))

# Monte Carlo agreement: at least MC_REQUIRED_HITS of MC_SEEDS seeds inside 3 sigma
MC_SEEDS = 10
MC_REQUIRED_HITS = 9

# (discrepancy, tolerance)
CheckFn = Callable[[], Tuple[float, float]]


def max_relative(values, references) -> float:
    """Largest |v - r| / |r| over paired values (|r| floored at 1e-300)."""
    v = np.asarray(values, dtype=complex).ravel()
    r = np.asarray(references, dtype=complex).ravel()
    return float(np.max(np.abs(v - r) / np.maximum(np.abs(r), 1e-300)))


class VerifyService:
    """
    Service that runs the verification suites against one configured weight.

    Shift points are placed relative to the support: with center c and
    half-width R, roots sit at c + 2R, c + 3R, c + 5R and poles at
    c + 1.5R, c + 2.5R (plus one complex pole c + 0.5R + iR).
    """

    def __init__(self, config: ConfigManager, measures: MeasureService = None):
        self.config = config
        self.measures = measures or MeasureService(config)

    def _setup(self, seed: Optional[int]):
        self.measure = self.measures.get_measure()
        n_max = min(max(self.config.get_n_max(), MIN_TABLE_DEGREE), self.measure.node_count - 1)
        self.table = self.measures.get_table(n_max)
        self.rows = CauchyRows(self.measure, self.table)
        cfg = self.config.get_oracle_config()
        self.oracle_cfg = replace(cfg, rng_seed=seed) if seed is not None else cfg
        self.seed = self.oracle_cfg.rng_seed

        lo, hi = self.measure.support
        c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
        self.center, self.radius = c, r
        self.mu = [c + 2.0 * r, c + 3.0 * r, c + 5.0 * r]
        self.eps = [c + 1.5 * r, c + 2.5 * r]
        self.eps_complex = complex(c + 0.5 * r, r)
        self.grid = c + r * np.linspace(-1.5, 1.5, 20) + 0.3j * r
        self._reports = None

    # Transforms suite

    def _shifted_table(self, shift: SpectralShift, n: int):
        return stieltjes_recurrence(transforms.transformed_measure(self.measure, shift), max(n, 1))

    def check_christoffel(self):
        worst = 0.0
        for ell in (1, 2):
            mu = self.mu[:ell]
            top = min(6, self.table.n_max - ell)
            shifted = self._shifted_table(SpectralShift(mu=tuple(mu)), top)
            for n in range(top + 1):
                value = transforms.christoffel_poly(self.table, mu, n, self.grid)
                worst = max(worst, max_relative(value, shifted.monic(n, self.grid)))
        return worst, 1e-8

    def check_uvarov(self):
        worst = 0.0
        for m in (1, 2):
            eps = self.eps[:m]
            shifted = self._shifted_table(SpectralShift(eps=tuple(eps)), 6)
            for n in range(m, 7):
                value = transforms.uvarov_poly(self.table, self.rows, eps, n, self.grid)
                worst = max(worst, max_relative(value, shifted.monic(n, self.grid)))
        return worst, 1e-8

    def check_combined(self):
        worst = 0.0
        for ell, m in ((1, 1), (2, 1), (2, 2)):
            mu, eps = self.mu[:ell], self.eps[:m]
            top = min(6, self.table.n_max - ell)
            shifted = self._shifted_table(SpectralShift(tuple(mu), tuple(eps)), top)
            for n in range(m, top + 1):
                value = transforms.combined_poly(self.table, self.rows, mu, eps, n, self.grid)
                worst = max(worst, max_relative(value, shifted.monic(n, self.grid)))
        return worst, 1e-8

    def check_reciprocity(self):
        worst = 0.0
        for m in (1, 2):
            eps = self.eps[:m]
            family = transforms.UvarovFamily(self.table, self.rows, eps)
            for n in range(m, min(6, self.table.n_max - m) + 1):
                value = transforms.christoffel_poly(family, eps, n, self.grid)
                worst = max(worst, max_relative(value, self.table.monic(n, self.grid)))
        return worst, 1e-8

    def check_product_identity(self):
        worst = 0.0
        for L in (2, 3):
            for n in (1, 2, 3):
                iterated = transforms.christoffel_product(self.table, self.mu[:L], n)
                closed = averages.product_average(self.table, self.mu[:L], n).value
                worst = max(worst, max_relative(iterated, closed))
        return worst, 1e-9

    def check_cauchy_product(self):
        worst = 0.0
        points = [self.eps[0], self.eps_complex]
        for n in (1, 2, 3):
            iterated = transforms.cauchy_product(self.rows, points, n)
            closed = transforms.cauchy_determinant(self.rows, points, n)
            worst = max(worst, max_relative(iterated, closed))
        return worst, 1e-9

    def check_partial_fractions(self):
        points = np.array(self.eps + [self.eps_complex])
        beta = transforms.partial_fractions(points)
        rng = np.random.default_rng(self.seed)
        t = self.center + self.radius * (rng.uniform(-1, 1, 10) + 1j * rng.uniform(0.1, 1, 10))
        expansion = np.sum(beta[None, :] / (t[:, None] - points[None, :]), axis=1)
        direct = 1.0 / np.prod(t[:, None] - points[None, :], axis=1)
        return max_relative(expansion, direct), 1e-12

    # Averages suite

    def check_heine(self):
        worst = 0.0
        points = [self.center + p for p in HEINE_POINTS]
        for N in HEINE_ORDERS:
            for mu in points:
                brute = oracle.brute_force_average(self.measure, [mu], [], N, self.oracle_cfg)
                worst = max(worst, max_relative(brute, self.table.monic(N, mu)))
        return worst, 1e-8

    def check_product_oracle(self):
        worst = 0.0
        for L in (2, 3):
            for N in PRODUCT_ORDERS:
                closed = averages.product_average(self.table, self.mu[:L], N).value
                brute = oracle.brute_force_average(self.measure, self.mu[:L], [], N,
                                                   self.oracle_cfg)
                worst = max(worst, max_relative(brute, closed))
        return worst, 1e-8

    def check_inverse_oracle(self):
        worst = 0.0
        for eps in (self.eps, [self.eps[0], self.eps_complex]):
            for M in (1, 2):
                for N in INVERSE_ORDERS:
                    closed = averages.inverse_average(self.table, self.rows, eps[:M], N).value
                    brute = oracle.brute_force_average(self.measure, [], eps[:M], N,
                                                       self.oracle_cfg)
                    worst = max(worst, max_relative(brute, closed))
        return worst, 1e-6

    def check_ratio_oracle(self):
        worst = 0.0
        for K, M, N in RATIO_CASES:
            closed = averages.ratio_average(self.table, self.rows, self.mu[:K],
                                            self.eps[:M], N).value
            brute = oracle.brute_force_average(self.measure, self.mu[:K], self.eps[:M], N,
                                               self.oracle_cfg)
            worst = max(worst, max_relative(brute, closed))
        return worst, 1e-6

    def check_two_point_product(self):
        worst = 0.0
        lam = [self.mu[0], self.center + 4.0 * self.radius]
        mu = self.mu[1:]
        for K in (1, 2):
            for N in (1, 2, 3):
                kernel = averages.two_point_product(self.table, lam[:K], mu[:K], N).value
                direct = averages.product_average(self.table, lam[:K] + mu[:K], N).value
                worst = max(worst, max_relative(kernel, direct))
        return worst, 1e-10

    def check_two_point_ratio(self):
        worst = 0.0
        for K in (1, 2):
            for N in range(K, 4):
                kernel = averages.two_point_ratio(self.table, self.rows, self.eps[:K],
                                                  self.mu[:K], N).value
                direct = averages.ratio_average(self.table, self.rows, self.mu[:K],
                                                self.eps[:K], N).value
                worst = max(worst, max_relative(kernel, direct))
        return worst, 1e-8

    def check_ratio_via_products(self):
        worst = 0.0
        for N in (1, 2):
            folded = averages.ratio_via_products(self.measure, self.table, self.mu[:1],
                                                 self.eps[:1], N).value
            direct = averages.ratio_average(self.table, self.rows, self.mu[:1],
                                            self.eps[:1], N).value
            worst = max(worst, max_relative(folded, direct))
        return worst, 1e-7

    def check_mixed_inverse(self):
        worst = 0.0
        for k in (1, 2):
            mu, eps = self.mu[:k], self.eps[:k]
            ratio = averages.ratio_average(self.table, self.rows, mu, eps, 2).value
            mixed = averages.mixed_average(self.table, self.rows, mu, eps, 2).value
            inverse = averages.inverse_average(self.table, self.rows, eps, 2).value
            worst = max(worst, max_relative(mixed * inverse, ratio))
        return worst, 1e-10

    def check_inverse_product(self):
        worst = 0.0
        for M, N in ((1, 1), (2, 2), (2, 3)):
            eps = [self.eps[0], self.eps_complex][:M]
            closed = averages.inverse_average(self.table, self.rows, eps, N).value
            worst = max(worst, max_relative(averages.inverse_as_product(self.table, self.rows,
                                                                        eps, N), closed))
        return worst, 1e-9

    def check_permutation(self):
        forward = averages.ratio_average(self.table, self.rows, self.mu[:2], self.eps, 2).value
        swapped = averages.ratio_average(self.table, self.rows, self.mu[1::-1],
                                         self.eps[::-1], 2).value
        return max_relative(swapped, forward), 1e-12

    def check_realness(self):
        value = averages.ratio_average(self.table, self.rows, self.mu[:2], self.eps, 3).value
        return abs(value.imag) / abs(value), 1e-10

    def check_andreief(self):
        small = build_quadrature(self.measure.spec, 8) if self.measure.spec else self.measure
        t = (small.nodes - self.center) / self.radius
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for draw in range(20):
            k = 1 + draw % 4
            powers = np.vander(t, 5, increasing=True).T
            f = powers[:k] + 0.1 * rng.standard_normal((k, 5)) @ powers
            g = f + 0.1 * rng.standard_normal((k, 5)) @ powers
            lhs, rhs = oracle.andreief_check(f, g, small.weights)
            worst = max(worst, max_relative(lhs, rhs))
        return worst, 1e-12

    def check_monte_carlo(self):
        # discrepancy: seeds (out of MC_SEEDS) whose estimate misses the 3 sigma band
        worst = 0.0
        cases = ((self.table.monic(2, 5.0), [5.0], []),
                 (averages.ratio_average(self.table, self.rows, [5.0], [4 + 1j], 2).value,
                  [5.0], [4 + 1j]))
        for formula, mu, eps in cases:
            misses = 0
            for offset in range(MC_SEEDS):
                cfg = replace(self.oracle_cfg, rng_seed=self.seed + offset)
                estimate, error = oracle.mc_gue_average(mu, eps, 2, cfg)
                if abs(estimate - formula) > 3.0 * error:
                    misses += 1
            worst = max(worst, float(misses))
        return worst, float(MC_SEEDS - MC_REQUIRED_HITS)

    # Darboux suite

    def check_spectral(self):
        worst = 0.0
        for dim in range(1, min(8, self.table.n_max) + 1):
            eigenvalues = darboux.build_jacobi(self.table, dim).eigenvalues()
            roots = monic_roots(self.table, dim, self.measure.support)
            scale = np.maximum(np.abs(roots), 1.0)
            worst = max(worst, float(np.max(np.abs(eigenvalues - roots) / scale)))
        return worst, 1e-8

    def _entry_reports(self):
        if self._reports is None:
            self._reports = [darboux.verify_entry_formulas(self.measure, n, table=self.table)
                             for n in range(0, min(8, self.table.n_max - 2) + 1)]
        return self._reports

    def check_entry_b(self):
        return max(abs(r.b_sq_formula - r.b_sq_next) for r in self._entry_reports()), 1e-7

    def check_entry_a(self):
        return max(abs(r.a_formula - r.a_next) for r in self._entry_reports()), 1e-6

    def check_ladder(self):
        ladder = darboux.z_ladder(self.table, 2)
        t = self.measure.nodes
        f = np.vstack([np.ones_like(t), t])
        _, rhs = oracle.andreief_check(f, f, self.measure.weights, budget=10 ** 6)
        return max_relative(ladder[2], rhs), 1e-10

    def check_gamma(self):
        report = darboux.gamma_relation_check(self.table, self.rows, self.eps[0], 3)
        return max(report.values()), 1e-10

    def check_commutation(self):
        worst = 0.0
        dim = 6
        for shift in (SpectralShift(mu=tuple(self.mu[:1])),
                      SpectralShift(mu=tuple(self.mu[:2])),
                      SpectralShift(mu=tuple(self.mu[:1]), eps=tuple(self.eps[:1]))):
            direct = darboux.transformed_jacobi(self.measure, shift, dim)
            formula = darboux.darboux_jacobi(self.measure, self.table, self.rows, shift, dim)
            scale = max(1.0, self.radius)
            worst = max(worst,
                        float(np.max(np.abs(direct.diag - formula.diag))) / scale,
                        float(np.max(np.abs(direct.offdiag - formula.offdiag))) / scale)
        return worst, 1e-7

    def check_jacobi_reciprocity(self):
        dim = 6
        eps = tuple(self.eps[:1])
        shifted = transforms.transformed_measure(self.measure, SpectralShift(eps=eps))
        back = darboux.transformed_jacobi(shifted, SpectralShift(mu=eps), dim)
        base = darboux.build_jacobi(self.table, dim)
        scale = max(1.0, self.radius)
        return max(float(np.max(np.abs(back.diag - base.diag))),
                   float(np.max(np.abs(back.offdiag - base.offdiag)))) / scale, 1e-8

    def checks(self, suite: str) -> List[Tuple[str, str, CheckFn]]:
        """Checks of a suite, in report order."""
        catalog: Dict[str, List[Tuple[str, CheckFn]]] = {
            "transforms": [
                ("christoffel_vs_stieltjes", self.check_christoffel),
                ("uvarov_vs_stieltjes", self.check_uvarov),
                ("combined_vs_stieltjes", self.check_combined),
                ("reciprocity", self.check_reciprocity),
                ("product_identity", self.check_product_identity),
                ("cauchy_product_identity", self.check_cauchy_product),
                ("partial_fractions", self.check_partial_fractions),
            ],
            "averages": [
                ("heine", self.check_heine),
                ("product_vs_oracle", self.check_product_oracle),
                ("inverse_vs_oracle", self.check_inverse_oracle),
                ("ratio_vs_oracle", self.check_ratio_oracle),
                ("two_point_product", self.check_two_point_product),
                ("two_point_ratio", self.check_two_point_ratio),
                ("ratio_via_products", self.check_ratio_via_products),
                ("mixed_times_inverse", self.check_mixed_inverse),
                ("inverse_as_product", self.check_inverse_product),
                ("permutation_invariance", self.check_permutation),
                ("realness", self.check_realness),
                ("andreief", self.check_andreief),
            ],
            "darboux": [
                ("spectral_consistency", self.check_spectral),
                ("entry_formula_b", self.check_entry_b),
                ("entry_formula_a", self.check_entry_a),
                ("z_ladder", self.check_ladder),
                ("gamma_relation", self.check_gamma),
                ("transform_commutation", self.check_commutation),
                ("jacobi_reciprocity", self.check_jacobi_reciprocity),
            ],
        }
        family = WeightRegistry.canonical(self.measure.spec.family) if self.measure.spec else None
        if family == "gaussian-truncated" and self.measure.support[1] >= 5.0:
            catalog["averages"].append(("monte_carlo_gue", self.check_monte_carlo))

        names = ["transforms", "averages", "darboux"] if suite == "all" else [suite]
        return [(s, name, fn) for s in names for name, fn in catalog.get(s, [])]

    def run(self, suite: Optional[str] = None, seed: Optional[int] = None,
            progress_callback=None) -> dict:
        """
        Run a verification suite.

        Args:
            suite: transforms, averages, darboux, all (default from config)
            seed: Overrides the oracle seed
            progress_callback: Optional callback(msg: str) per finished check

        Returns:
            Dict containing success, message, exit_code, rows, columns.
        """
        result = {"success": False, "message": "", "exit_code": EXIT_OK,
                  "rows": [], "columns": REPORT_COLUMNS}
        try:
            suite = suite or self.config.get_suite()
            if suite == "none":
                result.update(success=True, message="no suite selected")
                return result
            self._setup(seed)
            checks = self.checks(suite)
        except SpectralError as e:
            logger.error("verification setup failed: %s", e)
            result.update(message=str(e), exit_code=exit_code_for(e))
            return result

        failed = []
        for suite_name, name, fn in checks:
            row = {"suite": suite_name, "check": name, "passed": False,
                   "discrepancy": "", "tolerance": "", "message": ""}
            try:
                discrepancy, tolerance = fn()
                row.update(passed=bool(discrepancy <= tolerance),
                           discrepancy=f"{discrepancy:.3e}", tolerance=f"{tolerance:.1e}")
            except SpectralError as e:
                row["message"] = f"{type(e).__name__}: {e}"
            if not row["passed"]:
                failed.append(name)
                logger.warning("check %s/%s failed %s", suite_name, name, row["message"])
            if progress_callback:
                progress_callback(f"{suite_name}/{name}: {'ok' if row['passed'] else 'FAILED'}")
            result["rows"].append(row)

        if failed:
            result.update(exit_code=EXIT_VERIFY,
                          message=f"{len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
        else:
            result.update(success=True, message=f"all {len(checks)} checks passed")
        return result
