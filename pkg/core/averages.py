"""
Averages - Closed-form averages of characteristic polynomials

All averages are expectations over the N-point ensemble with density
proportional to Delta(x)^2 prod dalpha(x_i):

    < prod_i D_N[mu_i] / prod_j D_N[eps_j] >,   D_N[z] = prod_k (z - x_k)

Cauchy transforms enter in scaled form H_k; with gamma_n = -2 pi i / c_n^2
and h_k = H_k / (2 pi i) every product gamma_n h_k equals -H_k / c_n^2, so
no factor of 2 pi i appears below.
"""
import itertools
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from core.errors import ComplexityLimit, DegenerateShift, DegreeOutOfRange, UnsupportedRegime
from core.linalg import (MIN_RELATIVE_GAP, check_distinct, det_ratio,
                         det_with_condition, vandermonde)
from core.measure import QuadratureMeasure, RecurrenceTable, stieltjes_recurrence
from core.transforms import (TWO_PI_I, CauchyRows, SpectralShift, check_pole,
                             transformed_measure, uvarov_cauchy)

logger = logging.getLogger(__name__)

FORMULA_IDS = (
    "product", "inverse", "ratio", "mixed", "two_point_product",
    "two_point_ratio", "ratio_via_products", "partition_ratio",
)

# Pole count above which ratio_via_products refuses the tensor integral
DEFAULT_MAX_FOLD = 2


@dataclass(frozen=True)
class AverageResult:
    """
    Attributes:
        value: The average
        condition: Largest pivot ratio over the determinants involved
        formula_id: Which formula produced the value
        node_count: Quadrature size behind any Cauchy transforms used
    """
    value: complex
    condition: float
    formula_id: str
    node_count: Optional[int] = None


@dataclass(frozen=True)
class KernelValue:
    """
    Attributes:
        value: Kernel value; for W_II it is built from scaled transforms
        kind: "W_I" or "W_II"
        degree: Kernel degree (N + K for W_I, N for W_II)
    """
    value: complex
    kind: str
    degree: int

    @property
    def normalized(self) -> complex:
        """W_II with h_k in place of H_k; W_I is returned unchanged."""
        return self.value / TWO_PI_I if self.kind == "W_II" else self.value


def _points(values) -> np.ndarray:
    return np.asarray(list(values), dtype=complex).reshape(-1)


def _require_degree(table: RecurrenceTable, top: int) -> None:
    if top > table.n_max:
        raise DegreeOutOfRange(
            f"formula needs pi_{top}, recurrence table stops at {table.n_max}"
        )


def _monic_block(table: RecurrenceTable, points: np.ndarray, first: int, count: int) -> np.ndarray:
    """pi_{first..first+count-1} at each point, one row per point."""
    if count == 0:
        return np.empty((len(points), 0), dtype=complex)
    return table.monic_all(first + count - 1, points)[:, first:first + count]


def _inverse_sign(m: int) -> int:
    return (-1) ** (m * (m - 1) // 2 + m)


def product_average(table: RecurrenceTable, mu: Sequence[complex], N: int) -> AverageResult:
    """
    < prod_i D_N[mu_i] > = det(pi_{N+j-1}(mu_i)) / Delta(mu).

    Raises:
        DegenerateShift: repeated mu
        DegreeOutOfRange: N + L - 1 > n_max
    """
    mu = _points(mu)
    L = len(mu)
    if L == 0:
        return AverageResult(1.0 + 0.0j, 1.0, "product")
    check_distinct(mu, "mu")
    _require_degree(table, N + L - 1)

    det, condition = det_with_condition(_monic_block(table, mu, N, L))
    return AverageResult(det / vandermonde(mu), condition, "product")


def inverse_average(table: RecurrenceTable, cauchy_rows: CauchyRows,
                    eps: Sequence[complex], N: int) -> AverageResult:
    """
    < prod_j 1 / D_N[eps_j] >, 1 <= M <= N.

    (-1)^{M(M-1)/2} prod gamma_j / Delta(eps) * det(h_{N-M+j-1}(eps_i)),
    product over j = N-M..N-1.

    Raises:
        UnsupportedRegime: M > N
        PoleOnSupport, DegenerateShift
    """
    eps = _points(eps)
    M = len(eps)
    node_count = cauchy_rows.measure.node_count
    if M == 0:
        return AverageResult(1.0 + 0.0j, 1.0, "inverse", node_count)
    if M > N:
        raise UnsupportedRegime(f"M exceeds N ({M} > {N})")
    check_distinct(eps, "eps")

    det, condition = det_with_condition(cauchy_rows.matrix(eps, range(N - M, N)))
    norm = np.prod(table.c_sq[N - M:N])
    value = _inverse_sign(M) * det / (norm * vandermonde(eps))
    return AverageResult(complex(value), condition, "inverse", node_count)


def ratio_average(table: RecurrenceTable, cauchy_rows: CauchyRows,
                  mu: Sequence[complex], eps: Sequence[complex], N: int) -> AverageResult:
    """
    < prod_i D_N[mu_i] / prod_j D_N[eps_j] >, 0 <= M <= N.

    Determinant of the (M+K)-square matrix with H rows at eps and pi rows
    at mu over degrees N-M..N+K-1, times (-1)^{M(M-1)/2} prod gamma_j
    / (Delta(mu) Delta(eps)). M = 0 and K = 0 delegate to product_average
    and inverse_average.
    """
    mu, eps = _points(mu), _points(eps)
    K, M = len(mu), len(eps)
    if M > N:
        raise UnsupportedRegime(f"M exceeds N ({M} > {N})")
    if M == 0:
        return replace(product_average(table, mu, N), formula_id="ratio")
    if K == 0:
        return replace(inverse_average(table, cauchy_rows, eps, N), formula_id="ratio")
    check_distinct(np.concatenate([mu, eps]), "shift points")
    _require_degree(table, N + K - 1)

    degrees = range(N - M, N + K)
    matrix = np.vstack([
        cauchy_rows.matrix(eps, degrees),
        _monic_block(table, mu, N - M, M + K),
    ])
    det, condition = det_with_condition(matrix)
    norm = np.prod(table.c_sq[N - M:N])
    value = _inverse_sign(M) * det / (norm * vandermonde(mu) * vandermonde(eps))
    return AverageResult(complex(value), condition, "ratio", cauchy_rows.measure.node_count)


def mixed_average(table: RecurrenceTable, cauchy_rows: CauchyRows,
                  mu: Sequence[complex], eps: Sequence[complex], N: int) -> AverageResult:
    """
    < prod_i D_N[mu_i] > over the ensemble of dalpha^[0,M].

    The (M+K)-row determinant of ratio_average divided by the M x M block
    det(H_{N-M..N-1}(eps_i)) and by Delta(mu).
    """
    mu, eps = _points(mu), _points(eps)
    K, M = len(mu), len(eps)
    if M > N:
        raise UnsupportedRegime(f"M exceeds N ({M} > {N})")
    if M == 0:
        return replace(product_average(table, mu, N), formula_id="mixed")
    node_count = cauchy_rows.measure.node_count
    if K == 0:
        return AverageResult(1.0 + 0.0j, 1.0, "mixed", node_count)
    check_distinct(np.concatenate([mu, eps]), "shift points")
    _require_degree(table, N + K - 1)

    degrees = range(N - M, N + K)
    numerator = np.vstack([
        cauchy_rows.matrix(eps, degrees),
        _monic_block(table, mu, N - M, M + K),
    ])
    denominator = cauchy_rows.matrix(eps, range(N - M, N))
    ratio, condition = det_ratio(numerator, denominator)
    return AverageResult(complex(ratio / vandermonde(mu)), condition, "mixed", node_count)


def kernel_W_I(table: RecurrenceTable, x: complex, y: complex, deg: int) -> KernelValue:
    """
    (pi_deg(x) pi_{deg-1}(y) - pi_deg(y) pi_{deg-1}(x)) / (x - y).

    On the diagonal the Christoffel-Darboux sum c_{deg-1}^2 sum_{i<deg}
    p_i(x) p_i(y) is used instead.
    """
    if deg < 1:
        raise DegreeOutOfRange(f"kernel degree must be >= 1, got {deg}")
    _require_degree(table, deg)
    x, y = complex(x), complex(y)
    px = table.monic_all(deg, x)
    py = table.monic_all(deg, y)

    scale = max(1.0, abs(x), abs(y))
    if abs(x - y) < MIN_RELATIVE_GAP * scale:
        norms = table.c_sq[:deg]
        value = table.c_sq[deg - 1] * np.sum(px[:deg] * py[:deg] / norms)
    else:
        value = (px[deg] * py[deg - 1] - py[deg] * px[deg - 1]) / (x - y)
    return KernelValue(complex(value), "W_I", deg)


def kernel_W_II(table: RecurrenceTable, cauchy_rows: CauchyRows,
                eps: complex, mu: complex, N: int) -> KernelValue:
    """
    (H_N(eps) pi_{N-1}(mu) - H_{N-1}(eps) pi_N(mu)) / (eps - mu), scaled form.

    Raises:
        DegenerateShift: eps == mu
        PoleOnSupport
    """
    if N < 1:
        raise DegreeOutOfRange(f"kernel degree must be >= 1, got {N}")
    _require_degree(table, N)
    eps, mu = complex(eps), complex(mu)
    check_distinct([eps, mu], "eps/mu")
    h_prev, h_n = cauchy_rows.matrix([eps], [N - 1, N])[0]
    p = table.monic_all(N, mu)
    value = (h_n * p[N - 1] - h_prev * p[N]) / (eps - mu)
    return KernelValue(complex(value), "W_II", N)


def two_point_product(table: RecurrenceTable, lam: Sequence[complex],
                      mu: Sequence[complex], N: int) -> AverageResult:
    """
    < prod_i D_N[lam_i] D_N[mu_i] > through the kernel W_{I,N+K}:

        C_{N,K} / (Delta(lam) Delta(mu)) * det(W_I(lam_i, mu_j)),
        C_{N,K} = prod_{l=N}^{N+K-1} c_l^2 / c_{N+K-1}^{2K}
    """
    lam, mu = _points(lam), _points(mu)
    K = len(lam)
    if len(mu) != K:
        raise UnsupportedRegime(f"lambda and mu must have equal length, got {K} and {len(mu)}")
    if K == 0:
        return AverageResult(1.0 + 0.0j, 1.0, "two_point_product")
    check_distinct(np.concatenate([lam, mu]), "lambda/mu")
    _require_degree(table, N + K)

    kernel = np.array([[kernel_W_I(table, li, mj, N + K).value for mj in mu] for li in lam])
    det, condition = det_with_condition(kernel)
    c_top = table.c_sq[N + K - 1]
    constant = np.prod(table.c_sq[N:N + K] / c_top)
    value = constant * det / (vandermonde(lam) * vandermonde(mu))
    return AverageResult(complex(value), condition, "two_point_product")


def two_point_ratio(table: RecurrenceTable, cauchy_rows: CauchyRows,
                    eps: Sequence[complex], mu: Sequence[complex], N: int) -> AverageResult:
    """
    < prod_i D_N[mu_i] / D_N[eps_i] > through the kernel W_{II,N}, 1 <= K <= N.

    Delta(eps, mu) is the Vandermonde of the concatenation (eps, mu), so
    Delta(eps, mu) / (Delta(eps)^2 Delta(mu)^2) reduces to
    prod_{i,j} (mu_j - eps_i) / (Delta(eps) Delta(mu)).
    """
    eps, mu = _points(eps), _points(mu)
    K = len(eps)
    if len(mu) != K:
        raise UnsupportedRegime(f"eps and mu must have equal length, got {K} and {len(mu)}")
    if K == 0:
        return AverageResult(1.0 + 0.0j, 1.0, "two_point_ratio", cauchy_rows.measure.node_count)
    if K > N:
        raise UnsupportedRegime(f"two-point ratio needs K <= N, got {K} > {N}")
    check_distinct(np.concatenate([eps, mu]), "eps/mu")
    _require_degree(table, N)

    kernel = np.array([[kernel_W_II(table, cauchy_rows, ei, mj, N).value for mj in mu]
                       for ei in eps])
    det, condition = det_with_condition(kernel)
    cross = np.prod(np.subtract.outer(mu, eps))
    sign = (-1) ** (K * (K - 1) // 2 + K)
    value = sign * det * cross / (table.c_sq[N - 1] ** K * vandermonde(eps) * vandermonde(mu))
    return AverageResult(complex(value), condition, "two_point_ratio",
                         cauchy_rows.measure.node_count)


def ratio_via_products(measure: QuadratureMeasure, table: RecurrenceTable,
                       mu: Sequence[complex], eps: Sequence[complex], N: int,
                       max_fold: int = DEFAULT_MAX_FOLD) -> AverageResult:
    """
    Ratio average rewritten as an M-fold integral of product averages.

        (-1)^{M(M-1)/2} prod gamma_j / (Delta(mu) Delta(eps))
          * int prod dalpha(lam_j) / prod (lam_j - eps_j)
                * Delta(lam, mu) < prod D_{N-M}[lam_j] prod D_{N-M}[mu_i] >

    The inner average comes from product_average at the points (lam, mu).
    Grid tuples with a repeated lam contribute nothing and are skipped. A
    lam within the clustering gap of a mu point makes the product form 0/0;
    that tuple falls back to det(pi_{N-M+k}(x_i)), its limit.

    Raises:
        ComplexityLimit: M > max_fold
    """
    mu, eps = _points(mu), _points(eps)
    K, M = len(mu), len(eps)
    if M == 0:
        return replace(product_average(table, mu, N), formula_id="ratio_via_products")
    if M > N:
        raise UnsupportedRegime(f"M exceeds N ({M} > {N})")
    if M > max_fold:
        raise ComplexityLimit(
            f"{M}-fold tensor integral exceeds the limit of {max_fold} poles"
        )
    check_distinct(np.concatenate([mu, eps]), "shift points")
    for e in eps:
        check_pole(e, measure.support)
    _require_degree(table, N + K - 1)

    nodes = measure.nodes.astype(complex)
    pole_factor = measure.weights[:, None] / (measure.nodes[:, None] - eps[None, :])
    base = N - M

    total = 0.0 + 0.0j
    condition = 1.0
    fallbacks = 0
    for lam_index in itertools.product(range(len(nodes)), repeat=M):
        if len(set(lam_index)) < M:
            continue
        factor = np.prod([pole_factor[i, j] for j, i in enumerate(lam_index)])
        points = np.concatenate([nodes[list(lam_index)], mu])
        try:
            inner = product_average(table, points, base)
        except DegenerateShift:
            fallbacks += 1
            total += factor * det_with_condition(_monic_block(table, points, base, M + K))[0]
            continue
        total += factor * vandermonde(points) * inner.value
        condition = max(condition, inner.condition)

    norm = np.prod(table.c_sq[N - M:N])
    value = _inverse_sign(M) * total / (norm * vandermonde(mu) * vandermonde(eps))
    logger.debug("ratio_via_products: %d-fold sum over %d nodes, %d determinant fallbacks",
                 M, len(nodes), fallbacks)
    return AverageResult(complex(value), condition, "ratio_via_products", measure.node_count)


def inverse_as_product(table: RecurrenceTable, cauchy_rows: CauchyRows,
                       eps: Sequence[complex], N: int) -> complex:
    """
    prod_{j=1}^{M} gamma_{N-j} h_{N-j}^[0,M-j](eps_{M-j+1}).

    Same value as inverse_average, assembled from single-pole averages over
    successively transformed measures.
    """
    eps = _points(eps)
    M = len(eps)
    if M > N:
        raise UnsupportedRegime(f"M exceeds N ({M} > {N})")
    total = 1.0 + 0.0j
    for j in range(1, M + 1):
        transform = uvarov_cauchy(cauchy_rows, eps[:M - j], N - j, eps[M - j])
        total *= -transform.scaled / table.c_sq[N - j]
    return total


def partition_ratio_average(measure: QuadratureMeasure, table: RecurrenceTable,
                            shift: SpectralShift, N: int) -> AverageResult:
    """
    The ratio average as Z_N^[K,M] / Z_N = prod_{j<N} c_j^2[K,M] / c_j^2.

    The transformed norming constants come from Stieltjes on the reweighted
    rule, so the shift factor prod(mu - t) / prod(eps - t) must be real and
    of one sign on the support.

    Raises:
        InvalidWeight: the factor changes sign or is complex on the support
    """
    transformed = transformed_measure(measure, shift)
    flipped = np.all(shift.weight_factor(measure.nodes).real < 0)
    sign = (-1.0) ** N if flipped else 1.0
    if N == 0:
        return AverageResult(1.0 + 0.0j, 1.0, "partition_ratio", measure.node_count)
    shifted = stieltjes_recurrence(transformed, max(N - 1, 1))
    ratio = np.prod(shifted.c_sq[:N] / table.c_sq[:N])
    return AverageResult(complex(sign * ratio), 1.0, "partition_ratio", measure.node_count)
