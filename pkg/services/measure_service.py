"""
Measure Service - Builds quadrature measures and recurrence tables from a run config
"""
import logging
from typing import Any, Dict, List, Optional

from core.config_manager import ConfigManager
from core.darboux import build_jacobi
from core.errors import SpectralError, exit_code_for
from core.measure import (QuadratureMeasure, RecurrenceTable, build_quadrature,
                          stieltjes_recurrence)

logger = logging.getLogger(__name__)


class MeasureService:
    """
    Service for measures and their recurrences.
    Caches the measure and table for the configured weight.
    """

    def __init__(self, config: ConfigManager):
        self.config = config
        self._measure: Optional[QuadratureMeasure] = None
        self._tables: Dict[int, RecurrenceTable] = {}

    def get_measure(self) -> QuadratureMeasure:
        if self._measure is None:
            spec = self.config.get_weight_spec()
            self._measure = build_quadrature(spec, self.config.get_node_count())
        return self._measure

    def get_table(self, n_max: int) -> RecurrenceTable:
        """Recurrence table to at least degree n_max."""
        for size, table in self._tables.items():
            if size >= n_max:
                return table.truncated(n_max) if size > n_max else table
        table = stieltjes_recurrence(self.get_measure(), n_max)
        self._tables[n_max] = table
        return table

    def recurrence(self) -> dict:
        """
        Recurrence coefficients of the configured weight.

        Row j carries the diagonal entry a_{j+1} = <t p_j, p_j>, b_j
        (b_0 = 0) and c_j^2, for j = 0..n_max.

        Returns:
            Dict containing success, message, exit_code, rows, columns.
        """
        result = {"success": False, "message": "", "exit_code": 0,
                  "rows": [], "columns": ["j", "a", "b", "c_sq"]}
        try:
            n_max = self.config.get_n_max()
            table = self.get_table(n_max + 1)
            rows: List[Dict[str, Any]] = []
            for j in range(n_max + 1):
                rows.append({
                    "j": j,
                    "a": float(table.a[j]),
                    "b": float(table.b[j - 1]) if j > 0 else 0.0,
                    "c_sq": float(table.c_sq[j]),
                })
            result.update(success=True, rows=rows,
                          message=f"recurrence to degree {n_max}")
        except SpectralError as e:
            logger.error("recurrence failed: %s", e)
            result.update(message=str(e), exit_code=exit_code_for(e))
        return result

    def jacobi(self, dim: Optional[int] = None) -> dict:
        """
        Jacobi operator truncation as rows (index, a, b, eigenvalue).

        Eigenvalues are listed in ascending order alongside the entries.

        Returns:
            Dict containing success, message, exit_code, rows, columns.
        """
        result = {"success": False, "message": "", "exit_code": 0,
                  "rows": [], "columns": ["index", "a", "b", "eigenvalue"]}
        try:
            dim = dim or self.config.get_n_max()
            operator = build_jacobi(self.get_table(dim), dim)
            eigenvalues = operator.eigenvalues()
            rows = []
            for i in range(operator.dim):
                rows.append({
                    "index": i + 1,
                    "a": float(operator.diag[i]),
                    "b": float(operator.offdiag[i]) if i < operator.dim - 1 else "",
                    "eigenvalue": float(eigenvalues[i]),
                })
            result.update(success=True, rows=rows,
                          message=f"Jacobi truncation of dimension {dim}")
        except SpectralError as e:
            logger.error("jacobi failed: %s", e)
            result.update(message=str(e), exit_code=exit_code_for(e))
        return result
