"""
Average Service - Dispatches a configured average to its formula and builds result records
"""
import logging
from typing import Any, Dict, Sequence

from core import averages, oracle
from core.config_manager import ConfigManager, format_complex
from core.errors import ConfigError, SpectralError, UnsupportedRegime, exit_code_for
from core.transforms import CauchyRows, SpectralShift
from interfaces.weight_interface import WeightRegistry
from services.measure_service import MeasureService

logger = logging.getLogger(__name__)

RECORD_COLUMNS = [
    "formula_id", "weight", "nodes", "N", "K", "M", "mu", "lambda", "eps",
    "value_re", "value_im", "condition", "node_count",
]

ORACLE_COLUMNS = ["method", "N", "value_re", "value_im", "std_error", "nodes_per_dim", "samples"]


def _format_points(points: Sequence[complex]) -> str:
    return " ".join(format_complex(p) for p in points)


class AverageService:
    """
    Service for evaluating averages of characteristic polynomials.
    """

    def __init__(self, config: ConfigManager, measures: MeasureService = None):
        self.config = config
        self.measures = measures or MeasureService(config)

    def required_degree(self, formula: str, N: int, K: int) -> int:
        """Highest pi_k a formula touches (at least 1)."""
        if formula == "two_point_product":
            return max(N + K, 1)
        return max(N + K - 1, N, 1)

    def evaluate(self, formula: str, mu: Sequence[complex], lam: Sequence[complex],
                 eps: Sequence[complex], N: int, refine: bool = True) -> averages.AverageResult:
        """
        Evaluate one formula; core exceptions propagate.
        """
        K = len(lam) if formula == "two_point_product" else len(mu)
        measure = self.measures.get_measure()
        table = self.measures.get_table(self.required_degree(formula, N, K))

        if formula == "product":
            return averages.product_average(table, mu, N)
        if formula == "two_point_product":
            return averages.two_point_product(table, lam, mu, N)
        if formula == "ratio_via_products":
            return averages.ratio_via_products(measure, table, mu, eps, N)
        if formula == "partition_ratio":
            return averages.partition_ratio_average(
                measure, table, SpectralShift(tuple(mu), tuple(eps)), N)

        rows = CauchyRows(measure, table, refine=refine)
        if formula == "inverse":
            return averages.inverse_average(table, rows, eps, N)
        if formula == "ratio":
            return averages.ratio_average(table, rows, mu, eps, N)
        if formula == "mixed":
            return averages.mixed_average(table, rows, mu, eps, N)
        if formula == "two_point_ratio":
            return averages.two_point_ratio(table, rows, eps, mu, N)
        raise UnsupportedRegime(f"unknown formula {formula!r}")

    def compute(self) -> dict:
        """
        Evaluate the configured average.

        Returns:
            Dict containing success, message, exit_code, records, columns.
        """
        result = {"success": False, "message": "", "exit_code": 0,
                  "records": [], "columns": RECORD_COLUMNS}
        try:
            self.config.check_counts()
            formula = self.config.get_formula()
            N = self.config.get_N()
            shift = self.config.get_shift()
            lam = self.config.get_lambda()
            spec = self.config.get_weight_spec()

            value = self.evaluate(formula, list(shift.mu), lam, list(shift.eps), N,
                                  refine=self.config.get_refine())
            record: Dict[str, Any] = {
                "formula_id": value.formula_id,
                "weight": spec.family,
                "nodes": self.config.get_node_count(),
                "N": N,
                "K": shift.ell,
                "M": shift.m,
                "mu": _format_points(shift.mu),
                "lambda": _format_points(lam),
                "eps": _format_points(shift.eps),
                "value_re": float(value.value.real),
                "value_im": float(value.value.imag),
                "condition": float(value.condition),
                "node_count": value.node_count if value.node_count is not None else "",
            }
            logger.debug("%s average = %r (condition %.3e)", formula, value.value, value.condition)
            result.update(success=True, records=[record], message=f"{formula} average computed")
        except SpectralError as e:
            logger.error("average failed: %s", e)
            result.update(message=str(e), exit_code=exit_code_for(e))
        return result

    def estimate(self, workers: int = None) -> dict:
        """
        Brute-force estimates of the configured ratio average: the tensor
        quadrature always, the GUE Monte Carlo for the Gaussian weight.

        The matrix size is oracle.N, the integration dimension of both.

        Returns:
            Dict containing success, message, exit_code, records, columns.
        """
        result = {"success": False, "message": "", "exit_code": 0,
                  "records": [], "columns": ORACLE_COLUMNS}
        try:
            cfg = self.config.get_oracle_config(workers)
            N = cfg.N
            shift = self.config.get_shift()
            if shift.m > N:
                raise ConfigError(f"M exceeds N ({shift.m} > {N})", "oracle.N")
            measure = self.measures.get_measure()

            value = oracle.brute_force_average(measure, shift.mu, shift.eps, N, cfg)
            records = [{
                "method": "tensor", "N": N,
                "value_re": float(value.real), "value_im": float(value.imag),
                "std_error": "", "nodes_per_dim": cfg.nodes_per_dim, "samples": "",
            }]
            if WeightRegistry.canonical(measure.spec.family) == "gaussian-truncated":
                estimate, error = oracle.mc_gue_average(shift.mu, shift.eps, N, cfg)
                records.append({
                    "method": "monte_carlo", "N": N,
                    "value_re": float(estimate.real), "value_im": float(estimate.imag),
                    "std_error": float(error), "nodes_per_dim": "", "samples": cfg.mc_samples,
                })
            result.update(success=True, records=records,
                          message=f"{len(records)} oracle estimates")
        except SpectralError as e:
            logger.error("oracle failed: %s", e)
            result.update(message=str(e), exit_code=exit_code_for(e))
        return result
