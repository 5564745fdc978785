"""
Weights - Built-in weight families and the rules that discretize them
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_jacobi, roots_legendre

from core.errors import InvalidWeight, PrecisionLoss
from interfaces.weight_interface import IWeightFamily, WeightRegistry

logger = logging.getLogger(__name__)

# Extra fine-grid nodes used when a rule is built by discretized Stieltjes
FINE_GRID_PADDING = 128

DEFAULT_TRUNCATION = 6.0


def discretized_stieltjes(nodes: np.ndarray, weights: np.ndarray,
                          n: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Orthonormal Stieltjes procedure on a discrete measure.

    Generates p_0..p_n from
        t p_j = b_j p_{j-1} + a_{j+1} p_j + b_{j+1} p_{j+1},  b_0 = 0

    Args:
        nodes: Real nodes of the discrete measure
        weights: Positive weights
        n: Number of (a, b) pairs to produce

    Returns:
        (a, b, mass) with a[j] = a_{j+1} and b[j] = b_{j+1} for j < n.

    Raises:
        PrecisionLoss: a b_j came out non-positive or non-finite, which
            means the discrete measure cannot support degree n.
    """
    t = np.asarray(nodes, dtype=float)
    w = np.asarray(weights, dtype=float)
    if n >= len(t):
        raise PrecisionLoss(
            f"degree {n} needs more than {len(t)} nodes"
        )

    mass = float(np.sum(w))
    a = np.empty(n)
    b = np.empty(n)

    p_prev = np.zeros_like(t)
    p = np.full_like(t, 1.0 / math.sqrt(mass))
    b_prev = 0.0
    for j in range(n):
        tp = t * p
        a[j] = np.dot(w, tp * p)
        r = tp - a[j] * p - b_prev * p_prev
        # one reorthogonalization pass against the two previous vectors
        r -= np.dot(w, r * p) * p
        if j > 0:
            r -= np.dot(w, r * p_prev) * p_prev
        norm_sq = np.dot(w, r * r)
        if not np.isfinite(norm_sq) or norm_sq <= 0.0:
            raise PrecisionLoss(
                f"recurrence coefficient b_{j + 1} lost positivity ({norm_sq!r})"
            )
        b[j] = math.sqrt(norm_sq)
        p_prev, p = p, r / b[j]
        b_prev = b[j]

    return a, b, mass


def golub_welsch(a: np.ndarray, b: np.ndarray,
                 mass: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss rule from the Jacobi matrix.

    Args:
        a: Diagonal a_1..a_n
        b: Off-diagonal b_1..b_{n-1}
        mass: Total mass c_0^2

    Returns:
        (nodes, weights) with nodes increasing.
    """
    nodes, vectors = eigh_tridiagonal(a, b)
    weights = mass * vectors[0, :] ** 2
    return nodes, weights


def _affine_legendre(node_count: int, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(node_count)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


class LegendreWeight(IWeightFamily):
    """Constant weight w(t) = 1 on [lo, hi]."""

    family = "legendre"

    def density(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def rule(self, node_count):
        lo, hi = self.support
        nodes, weights = _affine_legendre(node_count, lo, hi)
        return nodes, weights, 2 * node_count - 1

    @classmethod
    def default_support(cls, params):
        return (-1.0, 1.0)


class JacobiWeight(IWeightFamily):
    """
    Jacobi-like weight w(t) = (hi - t)^alpha (t - lo)^beta on [lo, hi].

    Params:
        [alpha, beta], both > -1. Missing values default to 0.
    """

    family = "jacobi-like"
    aliases = ("jacobi",)

    @property
    def exponents(self) -> Tuple[float, float]:
        alpha = self.params[0] if len(self.params) > 0 else 0.0
        beta = self.params[1] if len(self.params) > 1 else 0.0
        return float(alpha), float(beta)

    def validate(self) -> List[str]:
        problems = []
        if len(self.params) > 2:
            problems.append(f"jacobi-like takes at most 2 params, got {len(self.params)}")
        alpha, beta = self.exponents
        if alpha <= -1.0 or beta <= -1.0:
            problems.append(f"exponents must be > -1, got ({alpha}, {beta})")
        return problems

    def density(self, t):
        lo, hi = self.support
        alpha, beta = self.exponents
        t = np.asarray(t, dtype=float)
        return (hi - t) ** alpha * (t - lo) ** beta

    def rule(self, node_count):
        lo, hi = self.support
        alpha, beta = self.exponents
        x, w = roots_jacobi(node_count, alpha, beta)
        half = 0.5 * (hi - lo)
        nodes = lo + half * (x + 1.0)
        weights = w * half ** (alpha + beta + 1.0)
        return nodes, weights, 2 * node_count - 1

    @classmethod
    def default_support(cls, params):
        return (-1.0, 1.0)


class TruncatedGaussianWeight(IWeightFamily):
    """
    w(t) = exp(-t^2) restricted to [-Q, Q].

    The Gauss rule is obtained by running Stieltjes on a fine Legendre
    grid and diagonalizing the resulting Jacobi matrix.

    Params:
        [Q], the truncation half-width (default 6).
    """

    family = "gaussian-truncated"
    aliases = ("gaussian",)

    def validate(self) -> List[str]:
        problems = []
        if len(self.params) > 1:
            problems.append(f"gaussian-truncated takes at most 1 param, got {len(self.params)}")
        if self.params and not self.params[0] > 0:
            problems.append(f"truncation Q must be positive, got {self.params[0]}")
        return problems

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-t * t)

    def rule(self, node_count):
        lo, hi = self.support
        fine_nodes, fine_weights = _affine_legendre(
            2 * node_count + FINE_GRID_PADDING, lo, hi
        )
        fine_weights = fine_weights * self.density(fine_nodes)
        a, b, mass = discretized_stieltjes(fine_nodes, fine_weights, node_count)
        nodes, weights = golub_welsch(a, b[:-1], mass)
        logger.debug("gaussian rule: %d nodes from %d fine nodes",
                     node_count, len(fine_nodes))
        return nodes, weights, 2 * node_count - 1

    @classmethod
    def default_support(cls, params):
        q = float(params[0]) if params else DEFAULT_TRUNCATION
        return (-q, q)


class TabulatedWeight(IWeightFamily):
    """
    Weight given by samples at equispaced points of [lo, hi].

    The samples are interpolated with a monotone cubic (PCHIP), which stays
    positive between positive samples, and integrated panel by panel with
    Gauss-Legendre. The degree bound is only nominal: it reflects the
    exactness of each panel rule against cubic pieces.

    Params:
        Samples w_0..w_P, P >= 1; endpoints may be 0, interior samples
        must be positive.
    """

    family = "tabulated"

    def validate(self) -> List[str]:
        problems = []
        samples = np.asarray(self.params, dtype=float)
        if len(samples) < 2:
            problems.append("tabulated weight needs at least 2 samples")
            return problems
        if np.any(samples < 0) or np.any(samples[1:-1] <= 0):
            problems.append("tabulated samples must be positive inside the support")
        if not np.any(samples > 0):
            problems.append("tabulated weight has zero mass")
        return problems

    def _interpolant(self) -> PchipInterpolator:
        lo, hi = self.support
        samples = np.asarray(self.params, dtype=float)
        return PchipInterpolator(np.linspace(lo, hi, len(samples)), samples)

    def density(self, t):
        return self._interpolant()(np.asarray(t, dtype=float))

    def rule(self, node_count):
        lo, hi = self.support
        panels = len(self.params) - 1
        per_panel = max(4, math.ceil(node_count / panels))
        edges = np.linspace(lo, hi, panels + 1)

        x, w = roots_legendre(per_panel)
        half = 0.5 * np.diff(edges)
        nodes = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        weights = weights * self.density(nodes)

        keep = weights > 0
        if not np.all(keep):
            raise InvalidWeight("tabulated weight vanishes at a quadrature node")
        return nodes, weights, 2 * per_panel - 4


def _register_builtin() -> None:
    for family_class in (LegendreWeight, JacobiWeight,
                         TruncatedGaussianWeight, TabulatedWeight):
        if not WeightRegistry.is_registered(family_class.family):
            WeightRegistry.register(family_class)


def resolve_support(family: str, params: Tuple[float, ...],
                    support: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
    """Explicit support if given, else the one the family implies."""
    if support is not None:
        return (float(support[0]), float(support[1]))
    family_class = WeightRegistry.get_class(family)
    return family_class.default_support(tuple(params)) if family_class else None


_register_builtin()
