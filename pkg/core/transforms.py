"""
Transforms - Cauchy transforms and Christoffel/Uvarov determinant formulas

Every polynomial of a transformed measure dalpha^[l,m], with weight
prod(mu_i - t) / prod(eps_j - t), is computed here as a ratio of small
determinants built from the base family. Cauchy transforms are kept in
scaled form H_k(eps) = sum_i w_i pi_k(t_i) / (t_i - eps); the 1/(2 pi i)
of h_k is applied only on request (CauchyValue.normalized).
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import (DegreeOutOfRange, PoleOnSupport,
                         RefinementFailure, UnsupportedRegime)
from core.linalg import check_distinct, det_ratio, det_with_condition, vandermonde
from core.measure import (QuadratureMeasure, RecurrenceTable, build_quadrature,
                          stieltjes_recurrence)
from interfaces.family_interface import MonicFamily

logger = logging.getLogger(__name__)

TWO_PI_I = 2j * np.pi

DEFAULT_REFINE_TOL = 1e-8

# Rounding allowance per node of the doubled rule, in units of machine epsilon
ROUNDOFF_UNITS = 4


def _as_points(values) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=complex))


def check_pole(eps: complex, support: Tuple[float, float]) -> complex:
    """
    Reject a pole lying on the real support.

    Raises:
        PoleOnSupport
    """
    eps = complex(eps)
    if not np.isfinite(eps):
        raise PoleOnSupport(f"pole {eps} is not finite")
    lo, hi = support
    if eps.imag == 0.0 and lo <= eps.real <= hi:
        raise PoleOnSupport(f"pole {eps.real} lies on the support [{lo}, {hi}]")
    return eps


@dataclass(frozen=True)
class SpectralShift:
    """
    Inserted roots mu (l of them) and poles eps (m of them) of dalpha^[l,m].
    """
    mu: Tuple[complex, ...] = ()
    eps: Tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(complex(x) for x in self.mu))
        object.__setattr__(self, "eps", tuple(complex(x) for x in self.eps))

    @property
    def ell(self) -> int:
        return len(self.mu)

    @property
    def m(self) -> int:
        return len(self.eps)

    def validate(self, support: Tuple[float, float]) -> None:
        """
        Raises:
            DegenerateShift: two points coincide or cluster
            PoleOnSupport: a real pole inside the support
        """
        check_distinct(self.mu + self.eps, "shift points")
        for eps in self.eps:
            check_pole(eps, support)

    def weight_factor(self, t: np.ndarray) -> np.ndarray:
        """prod(mu_i - t) / prod(eps_j - t) at t."""
        t = np.asarray(t, dtype=complex)
        factor = np.ones_like(t)
        for mu in self.mu:
            factor = factor * (mu - t)
        for eps in self.eps:
            factor = factor / (eps - t)
        return factor


@dataclass(frozen=True)
class CauchyValue:
    """Scaled Cauchy transform H_k(eps); normalized is h_k = H_k / (2 pi i)."""
    scaled: complex

    @property
    def normalized(self) -> complex:
        return self.scaled / TWO_PI_I


def cauchy_transform(measure: QuadratureMeasure, table: RecurrenceTable,
                     k: int, eps: complex) -> CauchyValue:
    """
    H_k(eps) by direct quadrature.

    Raises:
        PoleOnSupport: eps real inside the support
        DegreeOutOfRange: k > n_max
    """
    eps = check_pole(eps, measure.support)
    values = table.monic(k, measure.nodes)
    return CauchyValue(complex(np.dot(measure.weights, values / (measure.nodes - eps))))


class CauchyRows:
    """
    Cache of H_0..H_{n_max}(eps) per pole.

    Each row is recomputed on a rule with twice the nodes (rebuilt from
    measure.spec) and rejected when the two disagree by more than refine_tol,
    after discounting the rounding floor of both sums. Cancellation in the
    monic sums for far poles shows up in that floor, not as a disagreement.

    Args:
        measure: Quadrature measure the table was computed on
        table: Its recurrence table
        refine: Enable the doubling check
        refine_tol: Relative tolerance of the doubling check
    """

    def __init__(self, measure: QuadratureMeasure, table: RecurrenceTable,
                 refine: bool = True, refine_tol: float = DEFAULT_REFINE_TOL):
        self.measure = measure
        self.table = table
        self.refine = refine
        self.refine_tol = refine_tol
        self._basis = table.monic_all(table.n_max, measure.nodes)
        self._abs_basis = np.abs(self._basis)
        self._rows: Dict[complex, np.ndarray] = {}
        self._fine: Optional[Tuple[QuadratureMeasure, np.ndarray]] = None
        self._fine_abs: Optional[np.ndarray] = None

    @property
    def n_max(self) -> int:
        return self.table.n_max

    def _fine_basis(self) -> Optional[Tuple[QuadratureMeasure, np.ndarray]]:
        if self._fine is None:
            spec = self.measure.spec
            if spec is None:
                logger.debug("refinement skipped: measure has no originating spec")
                return None
            fine = build_quadrature(spec, 2 * self.measure.node_count)
            fine_table = stieltjes_recurrence(fine, self.n_max)
            self._fine = (fine, fine_table.monic_all(self.n_max, fine.nodes))
            self._fine_abs = np.abs(self._fine[1])
        return self._fine

    def row(self, eps: complex) -> np.ndarray:
        """Scaled transforms H_0..H_{n_max} at eps."""
        eps = check_pole(eps, self.measure.support)
        cached = self._rows.get(eps)
        if cached is not None:
            return cached

        kernel = self.measure.weights / (self.measure.nodes - eps)
        row = kernel @ self._basis

        if self.refine:
            fine = self._fine_basis()
            if fine is not None:
                fine_measure, fine_basis = fine
                fine_kernel = fine_measure.weights / (fine_measure.nodes - eps)
                fine_row = fine_kernel @ fine_basis
                floor = ROUNDOFF_UNITS * fine_measure.node_count * np.finfo(float).eps * (
                    np.abs(kernel) @ self._abs_basis + np.abs(fine_kernel) @ self._fine_abs)
                excess = np.maximum(np.abs(fine_row - row) - floor, 0.0)
                scale = np.maximum(np.abs(fine_row), np.finfo(float).tiny)
                rel = np.max(excess / scale)
                logger.debug("refinement at eps=%s: max relative change %.3e", eps, rel)
                if rel > self.refine_tol:
                    raise RefinementFailure(
                        f"Cauchy transforms at eps={eps} changed by {rel:.3e} "
                        f"when doubling to {fine_measure.node_count} nodes "
                        f"(tolerance {self.refine_tol:g})"
                    )

        row.flags.writeable = False
        self._rows[eps] = row
        return row

    def scaled(self, k: int, eps: complex) -> complex:
        if k < 0 or k > self.n_max:
            raise DegreeOutOfRange(f"Cauchy transform degree {k} outside 0..{self.n_max}")
        return complex(self.row(eps)[k])

    def value(self, k: int, eps: complex) -> CauchyValue:
        return CauchyValue(self.scaled(k, eps))

    def matrix(self, eps: Sequence[complex], degrees: Sequence[int]) -> np.ndarray:
        """H_{degrees[j]}(eps[i]) as a len(eps) x len(degrees) matrix."""
        degrees = list(degrees)
        if degrees and (min(degrees) < 0 or max(degrees) > self.n_max):
            raise DegreeOutOfRange(
                f"Cauchy transform degrees {degrees[0]}..{degrees[-1]} outside 0..{self.n_max}"
            )
        rows = [self.row(e)[degrees] for e in _as_points(eps)]
        return np.array(rows, dtype=complex).reshape(len(rows), len(degrees))


def partial_fractions(points: Sequence[complex]) -> np.ndarray:
    """
    Coefficients beta_j = prod_{k != j} 1 / (eps_j - eps_k), so that
    1 / prod(t - eps_j) = sum_j beta_j / (t - eps_j).

    Raises:
        DegenerateShift: repeated points
    """
    x = _as_points(points)
    check_distinct(x, "partial-fraction points")
    diff = np.subtract.outer(x, x)
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def expansion_coefficients(fixed_rows: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Expand det([fixed_rows; v]) / det(fixed_rows[:, :-1]) along the free row v.

    Args:
        fixed_rows: r x (r+1) matrix

    Returns:
        (coeffs, condition) with det ratio = coeffs @ v and coeffs[-1] = 1.

    Raises:
        SingularDenominator
    """
    fixed = np.asarray(fixed_rows, dtype=complex)
    r = fixed.shape[0]
    coeffs = np.ones(r + 1, dtype=complex)
    condition = 1.0
    denominator = fixed[:, :r]
    for k in range(r):
        minor = np.delete(fixed, k, axis=1)
        ratio, cond = det_ratio(minor, denominator)
        coeffs[k] = (-1) ** (r + k) * ratio
        condition = max(condition, cond)
    return coeffs, condition


def _combine(family: MonicFamily, first: int, coeffs: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=complex)
    total = np.zeros_like(t)
    for k, coeff in enumerate(coeffs):
        total = total + coeff * family.monic(first + k, t)
    return total


def _divide_by_roots(numerator: Callable[[np.ndarray], np.ndarray], mu: np.ndarray,
                     t, degree: int):
    """
    numerator(t) / prod(t - mu_j) for a numerator divisible by that product.

    Near a root the quotient is taken as the mean over a circle around t,
    which is exact for a polynomial of the given degree.
    """
    t_arr = np.asarray(t, dtype=complex)
    flat = t_arr.ravel()
    if len(mu) == 0:
        out = numerator(flat)
        return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    scale = max(1.0, float(np.max(np.abs(mu))))
    if len(mu) > 1:
        gaps = np.abs(np.subtract.outer(mu, mu))
        scale = min(scale, float(gaps[np.triu_indices(len(mu), 1)].min()))
    radius = 0.5 * scale

    distance = np.abs(flat[:, None] - mu[None, :]).min(axis=1)
    near = distance < 0.5 * radius
    out = np.empty_like(flat)

    far = ~near
    if np.any(far):
        out[far] = numerator(flat[far]) / np.prod(flat[far, None] - mu[None, :], axis=1)

    count = degree + 2
    circle = radius * np.exp(TWO_PI_I * np.arange(count) / count)
    for i in np.flatnonzero(near):
        z = flat[i] + circle
        out[i] = np.mean(numerator(z) / np.prod(z[:, None] - mu[None, :], axis=1))

    return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def _check_degrees(n_max: int, top: int) -> None:
    if top > n_max:
        raise DegreeOutOfRange(f"formula needs degree {top}, family supports {n_max}")


def christoffel_poly(family: MonicFamily, mu: Sequence[complex], n: int, t):
    """
    pi_n^[l,0](t) for the measure prod(mu_i - t) dalpha.

    Ratio of the (l+1)-row determinant with columns pi_n..pi_{n+l} (rows
    mu_1..mu_l, then t) over its l x l leading block, divided by
    prod(t - mu_j). Works on any MonicFamily, including UvarovFamily.

    Raises:
        DegenerateShift, DegreeOutOfRange, SingularDenominator
    """
    mu = _as_points(mu) if len(mu) else np.empty(0, dtype=complex)
    check_distinct(mu, "mu")
    ell = len(mu)
    _check_degrees(family.n_max, n + ell)
    if ell == 0:
        return family.monic(n, t)

    fixed = np.array([family.monic_row(range(n, n + ell + 1), m) for m in mu])
    coeffs, _ = expansion_coefficients(fixed)
    return _divide_by_roots(lambda x: _combine(family, n, coeffs, x), mu, t, n)


def uvarov_poly(table: MonicFamily, cauchy_rows: CauchyRows, eps: Sequence[complex],
                n: int, t):
    """
    pi_n^[0,m](t) for the measure dalpha / prod(eps_j - t), 0 <= m <= n.

    Raises:
        UnsupportedRegime: m > n
        DegenerateShift, PoleOnSupport, SingularDenominator
    """
    eps = _as_points(eps) if len(eps) else np.empty(0, dtype=complex)
    m = len(eps)
    if m > n:
        raise UnsupportedRegime(f"Uvarov formula needs m <= n, got m={m}, n={n}")
    check_distinct(eps, "eps")
    _check_degrees(table.n_max, n)
    if m == 0:
        return table.monic(n, t)

    fixed = cauchy_rows.matrix(eps, range(n - m, n + 1))
    coeffs, _ = expansion_coefficients(fixed)
    result = _combine(table, n - m, coeffs, t)
    return complex(result) if np.ndim(result) == 0 else result


def uvarov_cauchy(cauchy_rows: CauchyRows, eps: Sequence[complex], n: int,
                  eval_at: complex) -> CauchyValue:
    """
    Cauchy transform of pi_n^[0,m] against dalpha^[0,m], evaluated at eval_at.

    (-1)^m / prod(eval_at - eps_j) times the (m+1)-row determinant of
    H_{n-m}..H_n (rows eps_1..eps_m, eval_at) over its m x m leading block.

    Raises:
        DegenerateShift: eval_at coincides with a pole
        UnsupportedRegime: m > n
    """
    eps = _as_points(eps) if len(eps) else np.empty(0, dtype=complex)
    m = len(eps)
    if m > n:
        raise UnsupportedRegime(f"Uvarov formula needs m <= n, got m={m}, n={n}")
    z = complex(eval_at)
    check_distinct(np.append(eps, z), "eps/eval_at")
    degrees = range(n - m, n + 1)
    free_row = cauchy_rows.matrix([z], degrees)[0]
    if m == 0:
        return CauchyValue(complex(free_row[0]))

    coeffs, _ = expansion_coefficients(cauchy_rows.matrix(eps, degrees))
    prefactor = (-1) ** m / np.prod(z - eps)
    return CauchyValue(complex(prefactor * np.dot(coeffs, free_row)))


def combined_poly(table: RecurrenceTable, cauchy_rows: CauchyRows, mu: Sequence[complex],
                  eps: Sequence[complex], n: int, t):
    """
    pi_n^[l,m](t) for the measure prod(mu_i - t) / prod(eps_j - t) dalpha.

    Rows: H at eps_1..eps_m, pi at mu_1..mu_l, then pi at t; columns
    n-m..n+l. The determinant ratio is divided by prod(t - mu_j).
    """
    mu = _as_points(mu) if len(mu) else np.empty(0, dtype=complex)
    eps = _as_points(eps) if len(eps) else np.empty(0, dtype=complex)
    ell, m = len(mu), len(eps)
    if m > n:
        raise UnsupportedRegime(f"Uvarov formula needs m <= n, got m={m}, n={n}")
    check_distinct(np.concatenate([mu, eps]), "shift points")
    _check_degrees(table.n_max, n + ell)
    if m == 0:
        return christoffel_poly(table, mu, n, t)
    if ell == 0:
        return uvarov_poly(table, cauchy_rows, eps, n, t)

    degrees = range(n - m, n + ell + 1)
    fixed = np.vstack([
        cauchy_rows.matrix(eps, degrees),
        np.array([table.monic_row(degrees, x) for x in mu]),
    ])
    coeffs, _ = expansion_coefficients(fixed)
    return _divide_by_roots(lambda x: _combine(table, n - m, coeffs, x), mu, t, n)


class UvarovFamily(MonicFamily):
    """
    Monic family of dalpha^[0,m], evaluated through uvarov_poly.

    Degrees below m are outside the determinant formula and raise
    UnsupportedRegime.
    """

    def __init__(self, table: RecurrenceTable, cauchy_rows: CauchyRows,
                 eps: Sequence[complex]):
        self.table = table
        self.cauchy_rows = cauchy_rows
        self.eps = _as_points(eps)
        check_distinct(self.eps, "eps")
        self._coeffs: Dict[int, np.ndarray] = {}

    @property
    def n_max(self) -> int:
        return self.table.n_max

    def monic(self, n: int, x):
        m = len(self.eps)
        if n < m:
            raise UnsupportedRegime(f"degree {n} below the number of poles {m}")
        _check_degrees(self.n_max, n)
        coeffs = self._coeffs.get(n)
        if coeffs is None:
            fixed = self.cauchy_rows.matrix(self.eps, range(n - m, n + 1))
            coeffs, _ = expansion_coefficients(fixed)
            self._coeffs[n] = coeffs
        result = _combine(self.table, n - m, coeffs, x)
        return complex(result) if np.ndim(result) == 0 else result


def christoffel_product(family: MonicFamily, mu: Sequence[complex], n: int) -> complex:
    """
    prod_{j=0}^{L-1} pi_n^[j,0](mu_{j+1}), each factor taken against the
    measure carrying the previous j inserted roots.
    """
    mu = _as_points(mu)
    total = 1.0 + 0.0j
    for j in range(len(mu)):
        total *= complex(christoffel_poly(family, mu[:j], n, mu[j]))
    return total


def cauchy_product(cauchy_rows: CauchyRows, eps: Sequence[complex], n: int) -> complex:
    """
    prod_{j=0}^{m} H_{n-m+j}^[0,j](eps_{j+1}) (scaled), with m + 1 = len(eps).
    """
    eps = _as_points(eps)
    m = len(eps) - 1
    if m > n:
        raise UnsupportedRegime(f"Cauchy product needs len(eps) - 1 <= n, got {m} > {n}")
    total = 1.0 + 0.0j
    for j in range(m + 1):
        total *= uvarov_cauchy(cauchy_rows, eps[:j], n - m + j, eps[j]).scaled
    return total


def cauchy_determinant(cauchy_rows: CauchyRows, eps: Sequence[complex], n: int) -> complex:
    """
    (-1)^{m(m+1)/2} / Delta(eps) * det(H_{n-m..n}(eps_i)), the closed form of
    cauchy_product.
    """
    eps = _as_points(eps)
    m = len(eps) - 1
    check_distinct(eps, "eps")
    matrix = cauchy_rows.matrix(eps, range(n - m, n + 1))
    sign = (-1) ** (m * (m + 1) // 2)
    det, _ = det_with_condition(matrix)
    return complex(sign * det / vandermonde(eps))


def transformed_measure(measure: QuadratureMeasure, shift: SpectralShift) -> QuadratureMeasure:
    """
    The rule of dalpha^[l,m]: weights times prod(mu_i - t) / prod(eps_j - t).

    A factor that is negative on the whole support is flipped, which leaves
    the orthogonal polynomials unchanged.

    Raises:
        InvalidWeight: the factor is complex or changes sign on the support
    """
    shift.validate(measure.support)
    factor = shift.weight_factor(measure.nodes)
    if np.all(factor.real < 0):
        factor = -factor
    return measure.reweighted(factor, degree_loss=shift.ell)
