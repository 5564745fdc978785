"""
Family Interface - Abstract base for families of monic orthogonal polynomials
"""
from abc import ABC, abstractmethod

import numpy as np


class MonicFamily(ABC):
    """
    Anything that evaluates the monic orthogonal polynomials pi_n of some
    measure.

    The base measure's RecurrenceTable is one; the Uvarov-transformed
    family (evaluated through determinant ratios) is another. Christoffel
    formulas only need this interface, so they can be stacked.
    """

    @property
    @abstractmethod
    def n_max(self) -> int:
        """Largest degree the family can evaluate."""
        pass

    @abstractmethod
    def monic(self, n: int, x):
        """
        Evaluate pi_n at x.

        Args:
            n: Degree, 0 <= n <= n_max
            x: Complex scalar or array

        Returns:
            Complex scalar (scalar x) or complex array (array x).
        """
        pass

    def monic_row(self, degrees, x: complex) -> np.ndarray:
        """
        Values (pi_k(x) for k in degrees) as a complex row.
        """
        return np.array([self.monic(k, x) for k in degrees], dtype=complex)
