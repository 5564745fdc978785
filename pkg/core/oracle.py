"""
Oracle - Brute-force evaluators used to check the closed-form averages

Nothing here touches recurrences, Cauchy transforms or the average
formulas: the tensor sum integrates the ensemble density literally, the
Andreief check expands determinants by permutations, and the Monte Carlo
estimator diagonalizes sampled Hermitian matrices.
"""
import itertools
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import (ComplexityLimit, InsufficientSamples, PoleOnSupport,
                         PrecisionLoss, RefinementFailure)
from core.measure import QuadratureMeasure, build_quadrature
from core.transforms import SpectralShift
from core.workers import run_partitioned

logger = logging.getLogger(__name__)

# Matrices drawn per Monte Carlo chunk; fixed so the stream is independent
# of the worker count
MC_CHUNK = 2000

MAX_ANDREIEF_ORDER = 5


@dataclass(frozen=True)
class OracleConfig:
    """
    Attributes:
        nodes_per_dim: Rule size per integration dimension
        N: Matrix size (integration dimension)
        mc_samples: Monte Carlo draws
        rng_seed: Seed of the Monte Carlo stream
        budget: Largest tensor grid allowed
        refine: Repeat pole-carrying sums with doubled nodes
        refine_tol: Relative tolerance of that repeat
        mc_tolerance: Relative standard error above which a warning is raised
        workers: Thread count for partitions (None = default)
    """
    nodes_per_dim: int = 24
    N: int = 2
    mc_samples: int = 100000
    rng_seed: int = 0
    budget: int = 10 ** 7
    refine: bool = True
    refine_tol: float = 1e-8
    mc_tolerance: Optional[float] = None
    workers: Optional[int] = None


def _grid_for(measure: QuadratureMeasure, node_count: int) -> QuadratureMeasure:
    if measure.spec is None:
        return measure
    return build_quadrature(measure.spec, node_count)


def _tensor_sums(nodes: np.ndarray, weights: np.ndarray, factor: np.ndarray,
                 N: int, workers: Optional[int]) -> Tuple[complex, float]:
    """
    (sum prod G(x_i) Delta^2(x), sum prod w(x_i) Delta^2(x)) over the N-fold
    grid, with G = w * factor.
    """
    n = len(nodes)
    g = weights * factor

    def partition(first: int) -> Tuple[complex, float]:
        top = 0.0 + 0.0j
        bottom = 0.0
        for middle in itertools.product(range(n), repeat=max(N - 2, 0)):
            outer = (first,) + middle
            x = nodes[list(outer)]
            delta_sq = 1.0
            for i in range(len(x)):
                for j in range(i):
                    delta_sq *= (x[i] - x[j]) ** 2
            w_outer = np.prod(weights[list(outer)]) * delta_sq
            g_outer = np.prod(g[list(outer)]) * delta_sq
            # last index vectorized
            last = np.prod((nodes[:, None] - x[None, :]) ** 2, axis=1)
            top += g_outer * np.sum(g * last)
            bottom += w_outer * np.sum(weights * last)
        return top, bottom

    if N == 1:
        return complex(np.sum(g)), float(np.sum(weights))
    results = run_partitioned(partition, range(n), workers)
    top = sum(r[0] for r in results)
    bottom = sum(r[1] for r in results)
    return complex(top), float(bottom)


def _brute_force_once(measure: QuadratureMeasure, shift: SpectralShift, N: int,
                      node_count: int, cfg: OracleConfig) -> complex:
    if node_count ** N > cfg.budget:
        raise ComplexityLimit(
            f"tensor grid of {node_count}^{N} points exceeds the budget of {cfg.budget}"
        )
    grid = _grid_for(measure, node_count)
    factor = shift.weight_factor(grid.nodes)
    top, bottom = _tensor_sums(grid.nodes, grid.weights, factor, N, cfg.workers)
    if bottom == 0.0 or not np.isfinite(bottom):
        raise PrecisionLoss(f"partition sum vanished on a {grid.node_count}-node grid")
    return top / bottom


def brute_force_average(measure: QuadratureMeasure, mu: Sequence[complex],
                        eps: Sequence[complex], N: int, cfg: OracleConfig) -> complex:
    """
    Self-normalized N-fold tensor quadrature of
    < prod D_N[mu_i] / prod D_N[eps_j] >.

    The grid is rebuilt from measure.spec with cfg.nodes_per_dim nodes.
    With poles present the sum is repeated on a doubled grid and the two
    must agree within cfg.refine_tol.

    Raises:
        ComplexityLimit: grid larger than cfg.budget
        RefinementFailure: doubled grid disagrees
        PrecisionLoss: the normalizing sum vanished
    """
    shift = SpectralShift(mu=tuple(mu), eps=tuple(eps))
    shift.validate(measure.support)
    if N == 0:
        return 1.0 + 0.0j

    value = _brute_force_once(measure, shift, N, cfg.nodes_per_dim, cfg)
    if shift.m == 0 or not cfg.refine or measure.spec is None:
        return value

    doubled = 2 * cfg.nodes_per_dim
    if doubled ** N > cfg.budget:
        logger.warning("refinement skipped: %d^%d points exceed the budget", doubled, N)
        return value
    fine = _brute_force_once(measure, shift, N, doubled, cfg)
    change = abs(fine - value) / max(abs(fine), np.finfo(float).tiny)
    logger.debug("oracle refinement: %d -> %d nodes, relative change %.3e",
                 cfg.nodes_per_dim, doubled, change)
    if change > cfg.refine_tol:
        raise RefinementFailure(
            f"oracle value changed by {change:.3e} when doubling to {doubled} nodes"
        )
    return fine


def _permutation_sign(perm: Tuple[int, ...]) -> int:
    inversions = sum(1 for i in range(len(perm)) for j in range(i) if perm[j] > perm[i])
    return -1 if inversions % 2 else 1


def _leibniz(values: np.ndarray, index: np.ndarray) -> np.ndarray:
    """det(values[i, index[:, j]]) for every grid row, by permutation sum."""
    k = values.shape[0]
    total = np.zeros(len(index), dtype=values.dtype)
    for perm in itertools.permutations(range(k)):
        term = np.ones(len(index), dtype=values.dtype)
        for j in range(k):
            term = term * values[perm[j], index[:, j]]
        total += _permutation_sign(perm) * term
    return total


def andreief_check(f_evals, g_evals, weights, budget: int = 10 ** 7):
    """
    Both sides of the integral Cauchy-Binet identity on a discrete measure.

        lhs = sum over x in grid^k of det(f_i(x_j)) det(g_i(x_j)) prod w(x_j)
        rhs = k! det(sum_x f_i(x) g_j(x) w(x))

    Args:
        f_evals: k x n values f_i at the n nodes
        g_evals: k x n values g_i at the n nodes
        weights: n node weights

    Returns:
        (lhs, rhs)

    Raises:
        ComplexityLimit: k > 5 or n^k beyond budget
    """
    f = np.asarray(f_evals)
    g = np.asarray(g_evals)
    w = np.asarray(weights)
    k, n = f.shape
    if g.shape != f.shape or w.shape != (n,):
        raise ValueError("f_evals, g_evals must be k x n and weights length n")
    if k > MAX_ANDREIEF_ORDER:
        raise ComplexityLimit(f"permutation expansion of order {k} exceeds {MAX_ANDREIEF_ORDER}")
    if n ** k > budget:
        raise ComplexityLimit(f"grid of {n}^{k} points exceeds the budget of {budget}")

    index = np.array(list(itertools.product(range(n), repeat=k)), dtype=int).reshape(-1, k)
    lhs = np.sum(_leibniz(f, index) * _leibniz(g, index) * np.prod(w[index], axis=1))

    gram = (f * w[None, :]) @ g.T
    rhs = math.factorial(k) * np.linalg.det(gram)
    if np.iscomplexobj(lhs) or np.iscomplexobj(rhs):
        return complex(lhs), complex(rhs)
    return float(lhs), float(rhs)


def sample_gue_eigenvalues(N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """
    Eigenvalues of count Hermitian N x N matrices with density ~ exp(-tr H^2).

    Diagonal entries have variance 1/2, off-diagonal real and imaginary
    parts variance 1/4.

    Returns:
        Array of shape (count, N).
    """
    a = rng.standard_normal((count, N, N)) + 1j * rng.standard_normal((count, N, N))
    h = (a + np.conj(np.swapaxes(a, 1, 2))) / (2.0 * math.sqrt(2.0))
    return np.linalg.eigvalsh(h)


def mc_gue_average(mu: Sequence[complex], eps: Sequence[complex], N: int,
                   cfg: OracleConfig) -> Tuple[complex, float]:
    """
    Monte Carlo estimate of the ratio average over the GUE (weight e^{-x^2}).

    Draws are split into fixed chunks of MC_CHUNK matrices, each seeded from
    SeedSequence(cfg.rng_seed).spawn, so the stream does not depend on the
    worker count.

    Returns:
        (estimate, standard error)

    Raises:
        PoleOnSupport: a real pole falls inside the sampled spectrum

    Warns:
        InsufficientSamples: relative standard error above cfg.mc_tolerance
    """
    mu = np.asarray(list(mu), dtype=complex)
    eps = np.asarray(list(eps), dtype=complex)
    if len(mu) == 0 and len(eps) == 0:
        return 1.0 + 0.0j, 0.0

    samples = cfg.mc_samples
    chunks = [(seed, min(MC_CHUNK, samples - i * MC_CHUNK))
              for i, seed in enumerate(
                  np.random.SeedSequence(cfg.rng_seed).spawn(math.ceil(samples / MC_CHUNK)))]

    def draw(chunk) -> Tuple[np.ndarray, float, float]:
        seed, count = chunk
        x = sample_gue_eigenvalues(N, count, np.random.default_rng(seed))
        stat = np.ones(count, dtype=complex)
        for m in mu:
            stat *= np.prod(m - x, axis=1)
        for e in eps:
            stat /= np.prod(e - x, axis=1)
        return stat, float(x.min()), float(x.max())

    results = run_partitioned(draw, chunks, cfg.workers)
    lo = min(r[1] for r in results)
    hi = max(r[2] for r in results)
    for e in eps:
        if e.imag == 0.0 and lo <= e.real <= hi:
            raise PoleOnSupport(
                f"pole {e.real} lies inside the sampled spectrum [{lo:.3f}, {hi:.3f}]"
            )

    values = np.concatenate([r[0] for r in results])
    estimate = complex(np.mean(values))
    std_error = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else float("inf")

    if cfg.mc_tolerance is not None and std_error > cfg.mc_tolerance * abs(estimate):
        message = (f"relative standard error {std_error / abs(estimate):.3e} above "
                   f"{cfg.mc_tolerance:g} with {len(values)} samples")
        logger.warning(message)
        warnings.warn(message, InsufficientSamples, stacklevel=2)
    return estimate, std_error
