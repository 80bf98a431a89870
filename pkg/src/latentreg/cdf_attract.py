"""Quantile attraction of empirical distributions.

The core algorithm: compute the n squared radii and n' = n(n-1)/2 half
squared pairwise distances of a point cloud, sort both, pair rank i with the
chi-squared quantile at probability (i - 0.5)/count, and gradient-descend the
l1 (or l2) mismatch. Also the coordinate-wise variant that snaps each
coordinate's order statistics onto a 1-D target (Gaussian, uniform on [0,1],
a quantized staircase attracting mass to codeword centers, or the uniform
torus with wrapped moves).

Sorting uses stable tie-breaking by element index so gradients are
deterministic across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sampling import PointCloud
from .specfun import ChiSquare, chi2_inv_cdf, normal_inv_cdf

__all__ = [
    "TargetQuantiles",
    "SortedStat",
    "CoordinateTarget",
    "build_target_quantiles",
    "chi2_quantile_table",
    "radii_and_distances",
    "cdf_objective",
    "cdf_objective_terms",
    "cdf_gradient",
    "attraction_step",
    "coordinate_targets",
    "coordinate_step",
    "GRADIENT_MODES",
    "NORMS",
]

GRADIENT_MODES = ("exact_subgradient", "paper_verbatim")
NORMS = ("l1", "l2")


@dataclass(frozen=True)
class TargetQuantiles:
    """Inverse-CDF tables: radii[i] at probability (i+0.5)/n for i = 0..n-1,
    distances[k] at (k+0.5)/n' for k = 0..n'-1 with n' = n(n-1)/2."""

    radii: np.ndarray
    distances: np.ndarray

    def __post_init__(self) -> None:
        radii = np.asarray(self.radii, dtype=np.float64)
        distances = np.asarray(self.distances, dtype=np.float64)
        n = radii.shape[0]
        if distances.shape[0] != n * (n - 1) // 2:
            raise ValueError("distance table length must be n(n-1)/2")
        for name, table in (("radii", radii), ("distances", distances)):
            if np.any(np.diff(table) <= 0.0):
                raise ValueError(f"{name} table must be strictly increasing")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "distances", distances)

    @property
    def n(self) -> int:
        return self.radii.shape[0]

    @classmethod
    def from_empirical(cls, radii_sample: np.ndarray, distance_sample: np.ndarray,
                       n: int) -> "TargetQuantiles":
        """Tables estimated from reference samples of the two statistics, for
        targets without a closed-form CDF. Samples must be rich enough that
        the midpoint quantiles come out strictly increasing."""
        n_pairs = n * (n - 1) // 2
        radii = np.quantile(np.asarray(radii_sample, dtype=np.float64),
                            (np.arange(n) + 0.5) / n)
        distances = np.quantile(np.asarray(distance_sample, dtype=np.float64),
                                (np.arange(n_pairs) + 0.5) / n_pairs)
        return cls(radii, distances)


@lru_cache(maxsize=128)
def _chi2_quantile_table(count: int, dim: int) -> np.ndarray:
    dist = ChiSquare(dim)
    table = np.array([chi2_inv_cdf(dist, (k + 0.5) / count) for k in range(count)])
    table.setflags(write=False)
    return table


def chi2_quantile_table(count: int, dim: int) -> np.ndarray:
    """Cached chi-squared(dim) quantiles at probabilities (k + 0.5)/count."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return _chi2_quantile_table(count, dim)


def build_target_quantiles(n: int, dim: int) -> TargetQuantiles:
    """Chi-squared(dim) quantile tables for n radii and n(n-1)/2 distances."""
    if n < 2:
        raise ValueError("need n >= 2 for a nonempty distance table")
    return TargetQuantiles(chi2_quantile_table(n, dim),
                           chi2_quantile_table(n * (n - 1) // 2, dim))


@dataclass
class SortedStat:
    """Statistic values with their stable sort bookkeeping.

    order maps rank -> element index, inverse_order maps element -> rank;
    values[order] is nondecreasing and the two permutations compose to the
    identity."""

    values: np.ndarray
    order: np.ndarray
    inverse_order: np.ndarray

    @classmethod
    def from_values(cls, values: np.ndarray) -> "SortedStat":
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(values, kind="stable")
        inverse = np.empty_like(order)
        inverse[order] = np.arange(order.shape[0])
        return cls(values, order, inverse)

    @property
    def sorted_values(self) -> np.ndarray:
        return self.values[self.order]


@lru_cache(maxsize=32)
def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def radii_and_distances(x: PointCloud) -> tuple[SortedStat, SortedStat]:
    """(|x_i|^2)_i and (|x_i - x_j|^2 / 2)_{i<j}, each with sort bookkeeping.

    Pairs are enumerated row-wise: (0,1), (0,2), ..., (n-2,n-1)."""
    if x.n < 2:
        raise ValueError("need n >= 2 for pairwise distances")
    radii = (x.data * x.data).sum(1)
    iu, ju = _pair_indices(x.n)
    gram = x.data @ x.data.T
    half_sq = np.maximum(0.5 * (radii[iu] + radii[ju]) - gram[iu, ju], 0.0)
    return SortedStat.from_values(radii), SortedStat.from_values(half_sq)


def residual_bundle(x: PointCloud, targets: TargetQuantiles):
    """(res_r, res_d): per-element residual of each statistic against the
    quantile assigned to its rank. One sort pass, shared by objective and
    gradient."""
    if targets.n != x.n:
        raise ValueError(f"target tables are for n={targets.n}, cloud has n={x.n}")
    radii, dists = radii_and_distances(x)
    res_r = radii.values - targets.radii[radii.inverse_order]
    res_d = dists.values - targets.distances[dists.inverse_order]
    return res_r, res_d


def objective_terms_from_residuals(residuals, norm: str = "l1") -> tuple[float, float]:
    _check_norm(norm)
    res_r, res_d = residuals
    if norm == "l1":
        return float(np.mean(np.abs(res_r))), float(np.mean(np.abs(res_d)))
    # l2 uses half squared residuals so its gradient is the l1 gradient with
    # each sign replaced by the residual itself
    return 0.5 * float(np.mean(res_r ** 2)), 0.5 * float(np.mean(res_d ** 2))


def gradient_from_residuals(x: PointCloud, residuals, mode: str, norm: str,
                            radii_weight: float, distance_weight: float) -> np.ndarray:
    _check_mode(mode)
    _check_norm(norm)
    res_r, res_d = residuals
    n = x.n
    n_pairs = res_d.shape[0]
    factor_r = np.sign(res_r) if norm == "l1" else res_r
    factor_d = np.sign(res_d) if norm == "l1" else res_d

    grad = (2.0 * radii_weight / n) * factor_r[:, None] * x.data

    dist_coef = distance_weight / n_pairs
    if mode == "paper_verbatim":
        dist_coef *= 2.0
    iu, ju = _pair_indices(n)
    w = np.zeros((n, n))
    w[iu, ju] = dist_coef * factor_d
    w[ju, iu] = w[iu, ju]
    grad += w.sum(1)[:, None] * x.data - w @ x.data
    return grad


def cdf_objective_terms(x: PointCloud, targets: TargetQuantiles,
                        norm: str = "l1") -> tuple[float, float]:
    """(radii term, distance term) of the quantile mismatch, unweighted."""
    return objective_terms_from_residuals(residual_bundle(x, targets), norm)


def cdf_objective(x: PointCloud, targets: TargetQuantiles, norm: str = "l1",
                  radii_weight: float = 1.0, distance_weight: float = 1.0) -> float:
    """Weighted quantile mismatch; zero iff sorted stats equal the tables (l1)."""
    term_r, term_d = cdf_objective_terms(x, targets, norm)
    return radii_weight * term_r + distance_weight * term_d


def cdf_gradient(x: PointCloud, targets: TargetQuantiles,
                 mode: str = "exact_subgradient", norm: str = "l1",
                 radii_weight: float = 1.0, distance_weight: float = 1.0) -> np.ndarray:
    """Gradient (l2) or subgradient (l1, with sgn(0) = 0) of cdf_objective.

    exact_subgradient uses the true distance-term coefficient 1/n';
    paper_verbatim doubles it to 2/n', which only reweights that term.
    """
    return gradient_from_residuals(x, residual_bundle(x, targets), mode, norm,
                                   radii_weight, distance_weight)


def attraction_step(x: PointCloud, targets: TargetQuantiles, alpha: float,
                    mode: str = "exact_subgradient", norm: str = "l1",
                    radii_weight: float = 1.0,
                    distance_weight: float = 1.0) -> tuple[PointCloud, float]:
    """One descent step x - alpha * g; returns (next cloud, pre-step objective)."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    objective = cdf_objective(x, targets, norm, radii_weight, distance_weight)
    grad = cdf_gradient(x, targets, mode, norm, radii_weight, distance_weight)
    return PointCloud(x.data - alpha * grad), objective


_COORD_KINDS = ("gaussian", "uniform01", "quantized_uniform", "torus_uniform01")


@dataclass(frozen=True)
class CoordinateTarget:
    """1-D target distribution applied independently per coordinate."""

    kind: str
    bits: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _COORD_KINDS:
            raise ValueError(f"unknown coordinate target {self.kind!r}")
        if self.kind == "quantized_uniform":
            if self.bits is None or self.bits < 1:
                raise ValueError("quantized_uniform needs bits >= 1")
        elif self.bits is not None:
            raise ValueError("bits only applies to quantized_uniform")

    @property
    def wraps(self) -> bool:
        return self.kind == "torus_uniform01"

    def rank_positions(self, ranks: np.ndarray, n: int) -> np.ndarray:
        """Ideal coordinate values for 0-based ranks 0..n-1."""
        if self.kind == "quantized_uniform":
            scale = float(2 ** self.bits)
            return (np.floor(scale * ranks / n) + 0.5) / scale
        probs = (ranks + 0.5) / n
        if self.kind == "gaussian":
            return np.array([normal_inv_cdf(p) for p in probs])
        return probs  # uniform01 and torus_uniform01


def coordinate_targets(x: PointCloud, target: CoordinateTarget) -> PointCloud:
    """Per coordinate, map each point's stable rank to the target quantile."""
    n = x.n
    ideal = np.empty_like(x.data)
    for j in range(x.dim):
        order = np.argsort(x.data[:, j], kind="stable")
        ranks = np.empty(n, dtype=np.int64)
        ranks[order] = np.arange(n)
        ideal[:, j] = target.rank_positions(ranks, n)
    return PointCloud(ideal)


def coordinate_step(x: PointCloud, target: CoordinateTarget,
                    alpha: float) -> PointCloud:
    """Convex move x + alpha (ideal - x); the torus target moves along the
    shorter wrapped displacement and reduces the result modulo 1."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    delta = coordinate_targets(x, target).data - x.data
    if target.wraps:
        delta = np.mod(delta + 0.5, 1.0) - 0.5
        return PointCloud(np.mod(x.data + alpha * delta, 1.0))
    return PointCloud(x.data + alpha * delta)


def _check_mode(mode: str) -> None:
    if mode not in GRADIENT_MODES:
        raise ValueError(f"unknown gradient mode {mode!r}; expected one of {GRADIENT_MODES}")


def _check_norm(norm: str) -> None:
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")
