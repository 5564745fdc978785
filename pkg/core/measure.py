"""
Measure - Quadrature measures, moments and three-term recurrences
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from core.errors import (DegreeBoundExceeded, DegreeOutOfRange, InvalidWeight,
                         PrecisionLoss)
from core.weights import discretized_stieltjes, resolve_support
from interfaces.family_interface import MonicFamily
from interfaces.weight_interface import WeightRegistry

logger = logging.getLogger(__name__)

# Relative tolerance on the reproduced mass of a freshly built rule
MASS_TOLERANCE = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class WeightSpec:
    """
    Description of a weight measure dalpha.

    Attributes:
        family: Registered family name or alias
        params: Family parameters
        support: Closed interval (lo, hi)
    """
    family: str
    params: Tuple[float, ...] = ()
    support: Tuple[float, float] = (-1.0, 1.0)

    @classmethod
    def create(cls, family: str, params=(), support=None) -> "WeightSpec":
        """Build a spec, filling the support from the family when omitted."""
        params = tuple(float(p) for p in params)
        resolved = resolve_support(family, params, support)
        if resolved is None:
            raise InvalidWeight(f"weight family '{family}' needs an explicit support")
        return cls(family=family, params=params, support=resolved)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WeightSpec":
        """
        Parse the `weight` section of a run configuration.

        Args:
            data: Dict with keys family, params (optional), support (optional)
        """
        if "family" not in data:
            raise InvalidWeight("weight needs a 'family'")
        return cls.create(data["family"], data.get("params", ()), data.get("support"))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "params": list(self.params),
            "support": list(self.support),
        }

    def validate(self) -> List[str]:
        """
        Check family, support and params.

        Returns:
            List of problems (empty when valid).
        """
        problems = []
        if not WeightRegistry.is_registered(self.family):
            problems.append(
                f"unknown weight family '{self.family}' "
                f"(available: {', '.join(WeightRegistry.get_available())})"
            )
            return problems
        lo, hi = self.support
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            problems.append(f"support must satisfy lo < hi, got [{lo}, {hi}]")
        if not all(np.isfinite(p) for p in self.params):
            problems.append("weight params must be finite")
        if not problems:
            problems.extend(self.family_instance().validate())
        return problems

    def family_instance(self):
        return WeightRegistry.get(self.family, self.params, self.support)


@dataclass(frozen=True, eq=False)
class QuadratureMeasure:
    """
    Discrete stand-in for dalpha: sum_i weights[i] * f(nodes[i]).

    Attributes:
        nodes: Strictly increasing nodes inside the support
        weights: Positive weights
        support: (lo, hi)
        degree_bound: Polynomials up to this degree are integrated exactly
        spec: Originating WeightSpec (None for reweighted measures)
    """
    nodes: np.ndarray
    weights: np.ndarray
    support: Tuple[float, float]
    degree_bound: int
    spec: Optional[WeightSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values) -> complex:
        """Quadrature sum of values sampled at the nodes."""
        total = np.dot(self.weights, np.asarray(values))
        return complex(total) if np.iscomplexobj(total) else float(total)

    def reweighted(self, factor, degree_loss: int = 0) -> "QuadratureMeasure":
        """
        Measure with weights multiplied by factor(nodes).

        Args:
            factor: Values of the multiplier at the nodes (real, positive)
            degree_loss: How much the exactness bound drops (degree of a
                polynomial multiplier)

        Raises:
            InvalidWeight: the multiplier is complex or non-positive at a node
        """
        factor = np.asarray(factor)
        if np.iscomplexobj(factor):
            if np.any(np.abs(factor.imag) > 1e-12 * np.abs(factor)):
                raise InvalidWeight("transformed weight is not real on the support")
            factor = factor.real
        weights = self.weights * factor
        if not np.all(weights > 0):
            bad = int(np.argmin(weights))
            raise InvalidWeight(
                f"transformed weight is non-positive at t={self.nodes[bad]:.6g}"
            )
        return QuadratureMeasure(
            nodes=self.nodes,
            weights=weights,
            support=self.support,
            degree_bound=max(0, self.degree_bound - degree_loss),
            spec=None,
        )


@dataclass(frozen=True, eq=False)
class RecurrenceTable(MonicFamily):
    """
    Three-term recurrence of a measure.

    Orthonormal form, j >= 0, b_0 = 0:
        t p_j = b_j p_{j-1} + a_{j+1} p_j + b_{j+1} p_{j+1}
    Monic form:
        pi_{j+1} = (t - a_{j+1}) pi_j - b_j^2 pi_{j-1}

    Attributes:
        a: a_1..a_{n_max} (a[j-1] = a_j)
        b: b_1..b_{n_max} (b[j-1] = b_j); b_{n_max} only enters c_sq
        c_sq: c_0^2..c_{n_max}^2 with c_j^2 = integral of pi_j^2
    """
    a: np.ndarray
    b: np.ndarray
    c_sq: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(self.a))
        object.__setattr__(self, "b", _frozen(self.b))
        object.__setattr__(self, "c_sq", _frozen(self.c_sq))

    @property
    def n_max(self) -> int:
        return len(self.a)

    def _check_degree(self, n: int) -> None:
        if n < 0 or n > self.n_max:
            raise DegreeOutOfRange(
                f"degree {n} outside 0..{self.n_max} supported by the recurrence table"
            )

    def monic_all(self, n: int, x) -> np.ndarray:
        """
        pi_0..pi_n at x.

        Returns:
            Complex array of shape x.shape + (n + 1,).
        """
        self._check_degree(n)
        x = np.asarray(x, dtype=complex)
        out = np.empty(x.shape + (n + 1,), dtype=complex)
        out[..., 0] = 1.0
        if n >= 1:
            out[..., 1] = x - self.a[0]
        for j in range(1, n):
            out[..., j + 1] = (x - self.a[j]) * out[..., j] - self.b[j - 1] ** 2 * out[..., j - 1]
        return out

    def monic(self, n: int, x):
        self._check_degree(n)
        x = np.asarray(x, dtype=complex)
        prev = np.zeros_like(x)
        cur = np.ones_like(x)
        for j in range(n):
            shift = self.b[j - 1] ** 2 * prev if j > 0 else 0.0
            prev, cur = cur, (x - self.a[j]) * cur - shift
        return complex(cur) if cur.ndim == 0 else cur

    def orthonormal(self, n: int, x):
        """p_n(x) = pi_n(x) / c_n."""
        return self.monic(n, x) / np.sqrt(self.c_sq[n])

    def truncated(self, n_max: int) -> "RecurrenceTable":
        self._check_degree(n_max)
        return RecurrenceTable(a=self.a[:n_max], b=self.b[:n_max], c_sq=self.c_sq[:n_max + 1])


def build_quadrature(spec: WeightSpec, node_count: int) -> QuadratureMeasure:
    """
    Discretize a weight spec.

    Args:
        spec: Weight description
        node_count: Number of nodes (>= 2)

    Returns:
        QuadratureMeasure whose degree_bound is 2*node_count - 1 for Gauss
        families and the panel bound for tabulated weights.

    Raises:
        InvalidWeight: invalid spec, or a non-positive weight at some node
    """
    if node_count < 2:
        raise InvalidWeight(f"node_count must be >= 2, got {node_count}")
    problems = spec.validate()
    if problems:
        raise InvalidWeight("; ".join(problems))

    family = spec.family_instance()
    nodes, weights, degree_bound = family.rule(node_count)
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)

    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    if not np.all(np.isfinite(weights)) or not np.all(weights > 0):
        raise InvalidWeight(f"{spec.family}: non-positive weight at a quadrature node")
    if np.any(np.diff(nodes) <= 0):
        raise PrecisionLoss(f"{spec.family}: quadrature nodes are not distinct")
    lo, hi = spec.support
    if nodes[0] < lo or nodes[-1] > hi:
        raise PrecisionLoss(f"{spec.family}: quadrature nodes escape the support")

    logger.debug("built %s rule: %d nodes, degree bound %d, mass %.17g",
                 spec.family, len(nodes), degree_bound, weights.sum())
    return QuadratureMeasure(nodes=nodes, weights=weights, support=spec.support,
                             degree_bound=degree_bound, spec=spec)


def moment(measure: QuadratureMeasure, k: int) -> float:
    """
    k-th moment sum_i w_i t_i^k.

    Warns:
        DegreeBoundExceeded: k is beyond the rule's exactness bound
    """
    if k < 0:
        raise ValueError(f"moment order must be non-negative, got {k}")
    if k > measure.degree_bound:
        message = f"moment {k} exceeds the rule's degree bound {measure.degree_bound}"
        logger.warning(message)
        warnings.warn(message, DegreeBoundExceeded, stacklevel=2)
    return float(np.dot(measure.weights, measure.nodes ** k))


def stieltjes_recurrence(measure: QuadratureMeasure, n_max: int) -> RecurrenceTable:
    """
    Recurrence coefficients of a measure by discretized Stieltjes.

    Args:
        measure: Quadrature measure
        n_max: Highest polynomial degree to support

    Returns:
        RecurrenceTable with a_1..a_{n_max}, b_1..b_{n_max}, c_0^2..c_{n_max}^2

    Raises:
        PrecisionLoss: a b_j^2 lost positivity or n_max needs more nodes
    """
    if n_max < 1:
        raise DegreeOutOfRange(f"n_max must be >= 1, got {n_max}")
    if n_max > measure.node_count - 1:
        raise PrecisionLoss(
            f"n_max={n_max} needs at least {n_max + 1} nodes, rule has {measure.node_count}"
        )
    if 2 * n_max > measure.degree_bound:
        message = (f"recurrence to degree {n_max} integrates degree {2 * n_max} "
                   f"beyond the rule's bound {measure.degree_bound}")
        logger.warning(message)
        warnings.warn(message, DegreeBoundExceeded, stacklevel=2)

    a, b, mass = discretized_stieltjes(measure.nodes, measure.weights, n_max)
    c_sq = mass * np.concatenate(([1.0], np.cumprod(b ** 2)))
    if not np.all(c_sq > 0) or not np.all(np.isfinite(c_sq)):
        raise PrecisionLoss("norming constants lost positivity")

    logger.debug("stieltjes recurrence to degree %d on %d nodes", n_max, measure.node_count)
    return RecurrenceTable(a=a, b=b, c_sq=c_sq)


def eval_monic(table: RecurrenceTable, n: int, x):
    """pi_n(x); raises DegreeOutOfRange for n > n_max."""
    return table.monic(n, x)


def eval_orthonormal(table: RecurrenceTable, n: int, x):
    return table.orthonormal(n, x)


def monic_roots(table: RecurrenceTable, n: int,
                support: Tuple[float, float]) -> np.ndarray:
    """
    Real roots of pi_n, located by bracketing and Brent's method.

    Independent of the Jacobi matrix, so it can cross-check its spectrum.

    Raises:
        PrecisionLoss: fewer than n sign changes were found
    """
    if n == 0:
        return np.empty(0)
    lo, hi = support
    grid = np.linspace(lo, hi, 40 * n + 400)
    values = table.monic(n, grid).real

    def f(x):
        return table.monic(n, x).real

    roots = []
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            roots.append(grid[i])
        elif values[i] * values[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if values[-1] == 0.0:
        roots.append(grid[-1])

    if len(roots) != n:
        raise PrecisionLoss(f"found {len(roots)} real roots of pi_{n}, expected {n}")
    return np.array(roots)
