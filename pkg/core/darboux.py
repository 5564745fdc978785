"""
Darboux - Jacobi operators of base and transformed measures, partition ladders
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from core.averages import inverse_average
from core.errors import DegreeOutOfRange, PrecisionLoss, UnsupportedRegime
from core.measure import QuadratureMeasure, RecurrenceTable, stieltjes_recurrence
from core.transforms import (CauchyRows, SpectralShift, combined_poly,
                             transformed_measure)

logger = logging.getLogger(__name__)

DEFAULT_TILT_STEP = 1e-4

# Tolerance the Richardson-extrapolated tilt derivative must meet
TILT_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class JacobiOperator:
    """
    Symmetric tridiagonal truncation: diag a_1..a_d, offdiag b_1..b_{d-1}.
    """
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float)
        offdiag = np.array(self.offdiag, dtype=float)
        if len(offdiag) != max(len(diag) - 1, 0):
            raise ValueError("offdiag must have one entry less than diag")
        if np.any(offdiag <= 0):
            raise PrecisionLoss("Jacobi off-diagonal entries must be positive")
        diag.flags.writeable = False
        offdiag.flags.writeable = False
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def dim(self) -> int:
        return len(self.diag)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in increasing order."""
        return eigvalsh_tridiagonal(self.diag, self.offdiag)


@dataclass(frozen=True, eq=False)
class PartitionLadder:
    """Z_0 = 1, Z_1, ..., Z_n with Z_k = k! prod_{l<k} c_l^2."""
    Z: np.ndarray

    def __post_init__(self):
        values = np.array(self.Z, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "Z", values)

    def __getitem__(self, k: int) -> float:
        return float(self.Z[k])

    def __len__(self) -> int:
        return len(self.Z)


@dataclass(frozen=True)
class EntryFormulaReport:
    """
    Jacobi entries recovered from partition-function ratios.

    b_sq_formula is (n+1)/(n+2) Z_n Z_{n+2} / Z_{n+1}^2 and a_formula the
    tilt derivative d/dt log(Z_n / Z_{n+1}) at 0. Both are compared to
    two recurrence alignments; the smaller discrepancy names the matching
    one.
    """
    n: int
    b_sq_formula: float
    b_sq_next: float
    b_sq_same: float
    a_formula: float
    a_next: float
    a_same: float
    b_alignment: str
    a_alignment: str
    b_discrepancy: float
    a_discrepancy: float

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def build_jacobi(table: RecurrenceTable, dim: int) -> JacobiOperator:
    """
    Leading dim x dim block of the Jacobi operator.

    Raises:
        DegreeOutOfRange: dim > n_max
    """
    if dim < 1 or dim > table.n_max:
        raise DegreeOutOfRange(f"Jacobi dimension {dim} outside 1..{table.n_max}")
    return JacobiOperator(diag=table.a[:dim], offdiag=table.b[:dim - 1])


def transformed_jacobi(measure: QuadratureMeasure, shift: SpectralShift,
                       dim: int) -> JacobiOperator:
    """
    Jacobi operator of dalpha^[l,m] by Stieltjes on the reweighted rule.

    Raises:
        InvalidWeight: the shift factor changes sign on the support
    """
    shifted = transformed_measure(measure, shift)
    return build_jacobi(stieltjes_recurrence(shifted, dim), dim)


def darboux_jacobi(measure: QuadratureMeasure, table: RecurrenceTable,
                   cauchy_rows: CauchyRows, shift: SpectralShift,
                   dim: int) -> JacobiOperator:
    """
    Jacobi operator of dalpha^[l,m] from the determinant formulas.

    The transformed monic polynomials come from combined_poly; their norms
    and first moments are taken against the reweighted rule. Degrees below
    m have no determinant formula, so only m <= 1 is supported.

    Raises:
        UnsupportedRegime: more than one pole
    """
    if shift.m > 1:
        raise UnsupportedRegime(f"darboux_jacobi supports at most one pole, got {shift.m}")
    shifted = transformed_measure(measure, shift)
    nodes, weights = shifted.nodes, shifted.weights

    c_sq = np.empty(dim + 1)
    diag = np.empty(dim)
    for j in range(dim + 1):
        if j == 0:
            poly = np.ones_like(nodes)
        else:
            poly = np.real(combined_poly(table, cauchy_rows, shift.mu, shift.eps, j, nodes))
        c_sq[j] = np.dot(weights, poly * poly)
        if j < dim:
            diag[j] = np.dot(weights, nodes * poly * poly) / c_sq[j]
    if np.any(c_sq <= 0):
        raise PrecisionLoss("transformed norming constants lost positivity")

    offdiag = np.sqrt(c_sq[1:dim] / c_sq[:dim - 1])
    return JacobiOperator(diag=diag, offdiag=offdiag)


def z_ladder(table: RecurrenceTable, n: int) -> PartitionLadder:
    """Z_k = k! prod_{l<k} c_l^2 for k = 0..n."""
    if n < 0 or n > table.n_max + 1:
        raise DegreeOutOfRange(f"ladder length {n} outside 0..{table.n_max + 1}")
    Z = np.ones(n + 1)
    for k in range(1, n + 1):
        Z[k] = Z[k - 1] * k * table.c_sq[k - 1]
    return PartitionLadder(Z)


def _log_norm_ratio(measure: QuadratureMeasure, n: int, tilt: float) -> float:
    """log(Z_n / Z_{n+1}) of the tilted measure e^{tilt * x} dalpha."""
    tilted = measure.reweighted(np.exp(tilt * measure.nodes))
    table = stieltjes_recurrence(tilted, n + 1)
    return -math.log(n + 1) - math.log(table.c_sq[n])


def _tilt_derivative(measure: QuadratureMeasure, n: int, step: float) -> float:
    def central(h):
        return (_log_norm_ratio(measure, n, h) - _log_norm_ratio(measure, n, -h)) / (2 * h)

    coarse = central(step)
    fine = central(step / 2)
    if abs(fine - coarse) > 10 * TILT_TOLERANCE:
        raise PrecisionLoss(
            f"tilt derivative did not converge: {coarse!r} vs {fine!r} at step {step:g}"
        )
    return (4 * fine - coarse) / 3


def verify_entry_formulas(measure: QuadratureMeasure, n: int,
                          tilt_step: float = DEFAULT_TILT_STEP,
                          table: Optional[RecurrenceTable] = None) -> EntryFormulaReport:
    """
    Compare the partition-function formulas for b_n^2 and a_n with the
    recurrence.

    The b formula reduces to c_{n+1}^2 / c_n^2 and so matches b_{n+1}^2;
    the a formula as written gives -a_{n+1}. Both candidate alignments are
    reported so a mismatch stays visible.

    Raises:
        PrecisionLoss: the tilt derivative did not converge
    """
    if table is None:
        table = stieltjes_recurrence(measure, n + 2)
    if n < 0 or n + 2 > table.n_max:
        raise DegreeOutOfRange(f"entry formulas at n={n} need n_max >= {n + 2}")

    ladder = z_ladder(table, n + 2)
    b_sq_formula = (n + 1) / (n + 2) * ladder[n] * ladder[n + 2] / ladder[n + 1] ** 2
    b_sq_next = float(table.b[n] ** 2)
    b_sq_same = float(table.b[n - 1] ** 2) if n > 0 else 0.0

    a_formula = _tilt_derivative(measure, n, tilt_step)
    a_next = -float(table.a[n])
    a_same = float(table.a[n - 1]) if n > 0 else 0.0

    b_errors = {"b_{n+1}": abs(b_sq_formula - b_sq_next), "b_n": abs(b_sq_formula - b_sq_same)}
    a_errors = {"-a_{n+1}": abs(a_formula - a_next), "a_n": abs(a_formula - a_same)}
    b_alignment = min(b_errors, key=b_errors.get)
    a_alignment = min(a_errors, key=a_errors.get)

    logger.debug("entry formulas at n=%d: b via %s (%.3e), a via %s (%.3e)", n,
                 b_alignment, b_errors[b_alignment], a_alignment, a_errors[a_alignment])
    return EntryFormulaReport(
        n=n,
        b_sq_formula=float(b_sq_formula),
        b_sq_next=b_sq_next,
        b_sq_same=b_sq_same,
        a_formula=float(a_formula),
        a_next=a_next,
        a_same=a_same,
        b_alignment=b_alignment,
        a_alignment=a_alignment,
        b_discrepancy=b_errors[b_alignment],
        a_discrepancy=a_errors[a_alignment],
    )


def gamma_relation_check(table: RecurrenceTable, cauchy_rows: CauchyRows,
                         eps: complex, N: int) -> Dict[str, float]:
    """
    Check gamma_{n-1} = -2 pi i n Z_{n-1} / Z_n for n = 1..N, and
    < 1 / D_N[eps] > = gamma_{N-1} h_{N-1}(eps).

    Returns:
        {"gamma_relation": max relative error, "single_inverse": relative error}
    """
    ladder = z_ladder(table, N)
    worst = 0.0
    for n in range(1, N + 1):
        # the common factor -2 pi i cancels
        lhs = 1.0 / table.c_sq[n - 1]
        rhs = n * ladder[n - 1] / ladder[n]
        worst = max(worst, abs(lhs - rhs) / abs(lhs))

    average = inverse_average(table, cauchy_rows, [eps], N).value
    direct = -cauchy_rows.scaled(N - 1, eps) / table.c_sq[N - 1]
    return {
        "gamma_relation": worst,
        "single_inverse": abs(average - direct) / abs(direct),
    }
