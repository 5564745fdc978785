"""
Linalg - Small dense determinants with a pivot-ratio condition estimate
"""
import logging
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import lu_factor

from core.errors import DegenerateShift, SingularDenominator

logger = logging.getLogger(__name__)

# Pivot ratio above which a denominator is treated as singular
SINGULAR_PIVOT_RATIO = 1e14

# Relative gap below which two shift points count as clustered
MIN_RELATIVE_GAP = 1e-6


def det_with_condition(matrix) -> Tuple[complex, float]:
    """
    Determinant by LU with partial pivoting.

    Args:
        matrix: Square (possibly complex) array

    Returns:
        (determinant, condition) where condition is the ratio of the
        largest to the smallest pivot magnitude (inf when a pivot is 0).
    """
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n == 0:
        return 1.0 + 0.0j, 1.0

    lu, piv = lu_factor(a, check_finite=True)
    pivots = np.diag(lu)
    swaps = np.count_nonzero(piv != np.arange(n))
    det = complex(np.prod(pivots)) * (-1.0) ** swaps

    magnitudes = np.abs(pivots)
    smallest = magnitudes.min()
    condition = float(magnitudes.max() / smallest) if smallest > 0 else float("inf")
    return det, condition


def det_ratio(numerator, denominator) -> Tuple[complex, float]:
    """
    Ratio of two determinants, guarding the denominator.

    Returns:
        (ratio, condition) with condition the larger of both pivot ratios.

    Raises:
        SingularDenominator: the denominator has a zero pivot or a pivot
            ratio beyond SINGULAR_PIVOT_RATIO.
    """
    den, den_cond = det_with_condition(denominator)
    if den == 0 or den_cond > SINGULAR_PIVOT_RATIO:
        raise SingularDenominator(
            f"denominator determinant is numerically singular (pivot ratio {den_cond:.3e})"
        )
    num, num_cond = det_with_condition(numerator)
    return num / den, max(num_cond, den_cond)


def vandermonde(points: Sequence[complex]) -> complex:
    """Delta(x) = prod_{i>j} (x_i - x_j), in input order."""
    x = np.asarray(points, dtype=complex)
    n = len(x)
    if n < 2:
        return 1.0 + 0.0j
    diff = np.subtract.outer(x, x)
    return complex(np.prod(diff[np.tril_indices(n, -1)]))


def check_distinct(points: Sequence[complex], what: str = "points") -> None:
    """
    Reject coincident or clustered points.

    Two points clash when |x_i - x_j| < MIN_RELATIVE_GAP * max(1, |x_i|, |x_j|).

    Raises:
        DegenerateShift
    """
    x = np.asarray(points, dtype=complex)
    for i in range(len(x)):
        for j in range(i):
            scale = max(1.0, abs(x[i]), abs(x[j]))
            if abs(x[i] - x[j]) < MIN_RELATIVE_GAP * scale:
                raise DegenerateShift(
                    f"{what} {j} and {i} coincide or are clustered: {x[j]} vs {x[i]}"
                )
