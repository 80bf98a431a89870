"""Closed-form L2 geometry of Gaussian-smoothened samples.

Product integrals of Gaussian densities, squared-L2 distances between
kernel-smoothened point clouds (general per-point covariances, the isotropic
shortcut, and the distance to the N(0, I) prior), plus the mean-field rule
for choosing a radius-dependent smoothing width.

Determinants and quadratic forms go through Cholesky factors and
log-determinants; every product is assembled in log space and exponentiated
last, since the (2pi)^D factors underflow quickly as D grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampling import PointCloud

__all__ = [
    "GaussianComponent",
    "SmoothedSample",
    "gaussian_product_integral",
    "spherical_product_integral",
    "gaussian_power_identity",
    "l2_distance_samples",
    "l2_distance_samples_isotropic",
    "l2_distance_to_standard_gaussian",
    "mean_field_objective",
    "mean_field_sigma",
]

_LOG_2PI = math.log(2.0 * math.pi)
_LOG_4PI = math.log(4.0 * math.pi)


def _check_covariance(m: np.ndarray, what: str = "covariance") -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
        raise ValueError(f"{what} must be symmetric within 1e-12")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise ValueError(f"{what} is not positive-definite") from None
    return m


@dataclass(frozen=True)
class GaussianComponent:
    """A single Gaussian density N(center, covariance)."""

    center: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        center = np.asarray(self.center, dtype=np.float64).reshape(-1)
        cov = _check_covariance(self.covariance)
        if cov.shape[0] != center.shape[0]:
            raise ValueError("center and covariance dimensions differ")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def log_density(self, x: np.ndarray) -> float:
        diff = np.asarray(x, dtype=np.float64).reshape(-1) - self.center
        logdet, quad = _chol_logdet_quad(self.covariance, diff)
        return -0.5 * (quad + self.dim * _LOG_2PI + logdet)

    def density(self, x: np.ndarray) -> float:
        return math.exp(self.log_density(x))


def _chol_logdet_quad(s: np.ndarray, mu: np.ndarray) -> tuple[float, float]:
    """(log det S, mu^T S^-1 mu) via one Cholesky factorization."""
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        raise ValueError("matrix is not positive-definite") from None
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    y = np.linalg.solve(chol, mu)
    return logdet, float(y @ y)


def log_gaussian_product_integral(mu: np.ndarray, sigma: np.ndarray,
                                  gamma: np.ndarray) -> float:
    """log of the integral of N(mu, sigma) * N(0, gamma) over R^D.

    The determinant product |sigma| |gamma| |sigma^-1 + gamma^-1| collapses to
    |sigma + gamma| and the exponent's matrix sandwich to (sigma + gamma)^-1,
    so a single factorization of sigma + gamma suffices.
    """
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    sigma = _check_covariance(sigma, "sigma")
    gamma = _check_covariance(gamma, "gamma")
    if sigma.shape[0] != gamma.shape[0] or sigma.shape[0] != mu.shape[0]:
        raise ValueError("mu, sigma, gamma dimensions differ")
    logdet, quad = _chol_logdet_quad(sigma + gamma, mu)
    return -0.5 * (quad + mu.shape[0] * _LOG_2PI + logdet)


def gaussian_product_integral(mu: np.ndarray, sigma: np.ndarray,
                              gamma: np.ndarray) -> float:
    """Integral of the product of two Gaussian densities shifted by mu."""
    return math.exp(log_gaussian_product_integral(mu, sigma, gamma))


def _log_spherical_product_integral(sq_dist: float, sigma2: float, gamma2: float,
                                    dim: int) -> float:
    total = sigma2 + gamma2
    return -0.5 * (sq_dist / total + dim * (_LOG_2PI + math.log(total)))


def spherical_product_integral(l: float, sigma2: float, gamma2: float,
                               dim: int) -> float:
    """Product integral for spherical covariances sigma2*I and gamma2*I at
    center separation l: exp(-l^2 / (2 (s2+g2))) / sqrt(2 pi (s2+g2))^D."""
    if sigma2 <= 0.0 or gamma2 <= 0.0:
        raise ValueError("variances must be positive")
    if l < 0.0:
        raise ValueError("separation must be nonnegative")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return math.exp(_log_spherical_product_integral(l * l, sigma2, gamma2, dim))


def gaussian_power_identity(mu: np.ndarray, sigma: np.ndarray,
                            p: float) -> tuple[float, GaussianComponent]:
    """Rewrite a Gaussian density power as scale * Gaussian:
    rho_{mu,S}^p = |2 pi S|^{(1-p)/2} p^{-D/2} * rho_{mu, S/p}."""
    if p <= 0.0:
        raise ValueError("power must be positive")
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    sigma = _check_covariance(sigma, "sigma")
    dim = mu.shape[0]
    logdet = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(sigma)))))
    log_scale = 0.5 * (1.0 - p) * (dim * _LOG_2PI + logdet) - 0.5 * dim * math.log(p)
    return math.exp(log_scale), GaussianComponent(mu, sigma / p)


@dataclass
class SmoothedSample:
    """A point cloud smoothened into a Gaussian mixture.

    bandwidths is either a length-n array of scalars sigma_i (spherical
    covariance sigma_i^2 I) or a length-n sequence of full DxD covariance
    matrices. weights defaults to uniform 1/n.
    """

    points: PointCloud
    bandwidths: np.ndarray | Sequence[np.ndarray]
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.points.n
        if self.weights is None:
            self.weights = np.full(n, 1.0 / n)
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != (n,):
                raise ValueError("weights length must equal point count")
            if np.any(self.weights <= 0.0):
                raise ValueError("weights must be positive")
            if abs(float(self.weights.sum()) - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 within 1e-12")
        if self.spherical:
            bw = np.asarray(self.bandwidths, dtype=np.float64).reshape(-1)
            if bw.shape != (n,):
                raise ValueError("bandwidth count must equal point count")
            if np.any(bw <= 0.0):
                raise ValueError("spherical bandwidths must be positive")
            self.bandwidths = bw
        else:
            if len(self.bandwidths) != n:
                raise ValueError("bandwidth count must equal point count")
            self.bandwidths = [_check_covariance(b) for b in self.bandwidths]

    @property
    def spherical(self) -> bool:
        arr = np.asarray(self.bandwidths, dtype=object)
        return np.ndim(self.bandwidths) == 1 and np.ndim(arr[0]) == 0

    def covariance(self, i: int) -> np.ndarray:
        if self.spherical:
            return float(self.bandwidths[i]) ** 2 * np.eye(self.points.dim)
        return self.bandwidths[i]


def _log_pair_integral(diff: np.ndarray, cov_a: np.ndarray,
                       cov_b: np.ndarray) -> float:
    logdet, quad = _chol_logdet_quad(cov_a + cov_b, diff)
    return -0.5 * (quad + diff.shape[0] * _LOG_2PI + logdet)


def _self_energy(sample: SmoothedSample) -> list[float]:
    pts, w = sample.points.data, sample.weights
    n = sample.points.n
    terms = []
    for i in range(n):
        cov_i = sample.covariance(i)
        terms.append(w[i] * w[i] * math.exp(_log_pair_integral(
            np.zeros(sample.points.dim), cov_i, cov_i)))
        for j in range(i + 1, n):
            val = math.exp(_log_pair_integral(pts[i] - pts[j], cov_i,
                                              sample.covariance(j)))
            terms.append(2.0 * w[i] * w[j] * val)
    return terms


def l2_distance_samples(a: SmoothedSample, b: SmoothedSample) -> float:
    """Squared L2 distance between two Gaussian-mixture-smoothened samples."""
    if a.points.dim != b.points.dim:
        raise ValueError("samples must share one dimension")
    cross = []
    for i in range(a.points.n):
        cov_i = a.covariance(i)
        for j in range(b.points.n):
            val = math.exp(_log_pair_integral(a.points.data[i] - b.points.data[j],
                                              cov_i, b.covariance(j)))
            cross.append(a.weights[i] * b.weights[j] * val)
    total = math.fsum(_self_energy(a)) + math.fsum(_self_energy(b)) \
        - 2.0 * math.fsum(cross)
    return max(total, 0.0)


def _mean_exp_kernel(x: np.ndarray, y: np.ndarray, four_sigma2: float) -> float:
    sq = np.maximum(
        (x * x).sum(1)[:, None] + (y * y).sum(1)[None, :] - 2.0 * x @ y.T, 0.0)
    return float(np.mean(np.exp(-sq / four_sigma2)))


def l2_distance_samples_isotropic(x: PointCloud, y: PointCloud,
                                  sigma: float) -> float:
    """Equal-bandwidth squared L2 distance with the sqrt(4 pi sigma^2)^D
    normalization dropped (it is a fixed factor that blows up with D):

        (1/n^2) sum exp(-|xi-xi'|^2/4s^2) + (1/m^2) sum exp(-|yj-yj'|^2/4s^2)
        - (2/nm) sum exp(-|xi-yj|^2/4s^2)
    """
    if x.dim != y.dim:
        raise ValueError("clouds must share one dimension")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    four_sigma2 = 4.0 * sigma * sigma
    total = _mean_exp_kernel(x.data, x.data, four_sigma2) \
        + _mean_exp_kernel(y.data, y.data, four_sigma2) \
        - 2.0 * _mean_exp_kernel(x.data, y.data, four_sigma2)
    return max(total, 0.0)


def l2_distance_to_standard_gaussian(x: PointCloud, bandwidths,
                                     scaled: bool = False) -> float:
    """Squared L2 distance between the smoothened cloud and N(0, I):

        (1/n^2) sum_{i,i'} d(x_i - x_i', S_i, S_i') + (4 pi)^{-D/2)
        - (2/n) sum_i d(x_i, S_i, I)

    With scaled=True every term is multiplied by sqrt(4 pi)^D, which keeps the
    result O(1) in high dimension (sensible for spherical bandwidths).
    """
    sample = SmoothedSample(x, bandwidths)
    n, dim = x.n, x.dim
    shift = 0.5 * dim * _LOG_4PI if scaled else 0.0

    if sample.spherical:
        sig2 = np.asarray(sample.bandwidths, dtype=np.float64) ** 2
        pts = x.data
        sq = np.maximum(
            (pts * pts).sum(1)[:, None] + (pts * pts).sum(1)[None, :]
            - 2.0 * pts @ pts.T, 0.0)
        tot2 = sig2[:, None] + sig2[None, :]
        log_self = -0.5 * (sq / tot2 + dim * (_LOG_2PI + np.log(tot2)))
        self_term = float(np.exp(log_self + shift).sum()) / (n * n)
        r = (pts * pts).sum(1)
        log_cross = -0.5 * (r / (1.0 + sig2) + dim * (_LOG_2PI + np.log(1.0 + sig2)))
        cross_term = float(np.exp(log_cross + shift).sum()) * 2.0 / n
    else:
        self_terms = []
        cross_terms = []
        for i in range(n):
            cov_i = sample.covariance(i)
            self_terms.append(math.exp(
                _log_pair_integral(np.zeros(dim), cov_i, cov_i) + shift))
            for j in range(i + 1, n):
                self_terms.append(2.0 * math.exp(_log_pair_integral(
                    x.data[i] - x.data[j], cov_i, sample.covariance(j)) + shift))
            cross_terms.append(math.exp(_log_pair_integral(
                x.data[i], cov_i, np.eye(dim)) + shift))
        self_term = math.fsum(self_terms) / (n * n)
        cross_term = 2.0 * math.fsum(cross_terms) / n
    prior_term = math.exp(-0.5 * dim * _LOG_4PI + shift)
    return self_term + prior_term - cross_term


def mean_field_objective(r: float, sigma: float, dim: int) -> float:
    """Squared L2 mismatch of one sigma-smoothened point at radius r against
    N(0, I) when all other points are assumed to already follow the prior:

        (4 pi s^2)^{-D/2} + (4 pi)^{-D/2} - 2 e^{-r^2/(2(1+s^2))} / sqrt(2 pi (1+s^2))^D
    """
    s2 = sigma * sigma
    t1 = math.exp(-0.5 * dim * (_LOG_4PI + math.log(s2)))
    t2 = math.exp(-0.5 * dim * _LOG_4PI)
    t3 = 2.0 * math.exp(-0.5 * r * r / (1.0 + s2)
                        - 0.5 * dim * (_LOG_2PI + math.log(1.0 + s2)))
    return t1 + t2 - t3


def _scaled_mean_field(r: float, sigma: float, dim: int) -> float:
    # mean_field_objective * (4 pi)^{D/2}; same minimizer, no underflow
    s2 = sigma * sigma
    return math.exp(-dim * math.log(sigma)) + 1.0 - 2.0 * math.exp(
        -0.5 * r * r / (1.0 + s2) + 0.5 * dim * (math.log(2.0) - math.log(1.0 + s2)))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def mean_field_sigma(r: float, dim: int, lo: float = 0.25, hi: float = 8.0,
                     tol: float = 1e-8) -> float:
    """Smoothing width minimizing the mean-field mismatch at radius r.

    Golden-section search; the objective is smooth and unimodal on the
    bracket. mean_field_sigma(0, dim) == 1 up to the search tolerance.
    """
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = _scaled_mean_field(r, c, dim)
    fd = _scaled_mean_field(r, d, dim)
    while b - a > tol:
        # ties (numerically flat stretches at high dim) shrink leftward,
        # toward the side the minimum lies on
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = _scaled_mean_field(r, c, dim)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = _scaled_mean_field(r, d, dim)
    return 0.5 * (a + b)
