"""Reference latent-space regularizers and moment statistics.

The WAE-MMD regularizer (inverse-multiquadric or exponential kernel, compared
against a fresh prior sample), the analytic CWAE regularizer, their exact
gradients, and the Mardia-style moment statistics used to sanity-check
multivariate normality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import PointCloud

__all__ = [
    "KernelSpec",
    "CwaeParams",
    "kernel_matrix",
    "wae_mmd",
    "wae_mmd_gradient",
    "cwae",
    "cwae_gradient",
    "mardia_stats",
]

_KINDS = ("inverse_multiquadric", "exponential")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice for the MMD regularizer.

    inverse_multiquadric: k(x, y) = 2D / (2D + |x-y|^2), D = dim.
    exponential:          k(x, y) = exp(-|x-y|^2).
    """

    kind: str
    dim: int

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {_KINDS}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @classmethod
    def imq(cls, dim: int) -> "KernelSpec":
        return cls("inverse_multiquadric", dim)

    @classmethod
    def exponential(cls, dim: int) -> "KernelSpec":
        return cls("exponential", dim)


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum((a * a).sum(1)[:, None] + (b * b).sum(1)[None, :]
                      - 2.0 * a @ b.T, 0.0)


def kernel_matrix(kernel: KernelSpec, a: PointCloud, b: PointCloud) -> np.ndarray:
    """Matrix of k(a_i, b_j)."""
    if a.dim != b.dim:
        raise ValueError("clouds must share one dimension")
    sq = _sq_dists(a.data, b.data)
    if kernel.kind == "inverse_multiquadric":
        c = 2.0 * kernel.dim
        return c / (c + sq)
    return np.exp(-sq)


def wae_mmd(z: PointCloud, z_tilde: PointCloud, kernel: KernelSpec) -> float:
    """MMD-style regularizer against a prior sample z_tilde:

        (1/(n(n-1))) sum_{i != j} k(z_i, z_j) - (2/n^2) sum_{i,j} k(z_i, zt_j)
    """
    n = z.n
    if n < 2:
        raise ValueError("need at least 2 points in z")
    k_zz = kernel_matrix(kernel, z, z)
    k_zt = kernel_matrix(kernel, z, z_tilde)
    self_term = (float(k_zz.sum()) - float(np.trace(k_zz))) / (n * (n - 1))
    return self_term - 2.0 * float(k_zt.sum()) / (n * n)


def _kernel_grad_weights(kernel: KernelSpec, sq: np.ndarray) -> np.ndarray:
    # w(s) with d k / d z_i = w(|z_i - y|^2) * (z_i - y)
    if kernel.kind == "inverse_multiquadric":
        c = 2.0 * kernel.dim
        return -2.0 * c / (c + sq) ** 2
    return -2.0 * np.exp(-sq)


def wae_mmd_gradient(z: PointCloud, z_tilde: PointCloud,
                     kernel: KernelSpec) -> np.ndarray:
    """Exact gradient of wae_mmd with respect to the rows of z."""
    n = z.n
    if n < 2:
        raise ValueError("need at least 2 points in z")
    if z.dim != z_tilde.dim:
        raise ValueError("clouds must share one dimension")
    zz = _sq_dists(z.data, z.data)
    zt = _sq_dists(z.data, z_tilde.data)
    w_self = _kernel_grad_weights(kernel, zz)
    np.fill_diagonal(w_self, 0.0)
    w_cross = _kernel_grad_weights(kernel, zt)
    # sum_j w_ij (z_i - z_j) = rowsum(w)_i z_i - (w @ z)_i
    g_self = w_self.sum(1)[:, None] * z.data - w_self @ z.data
    g_cross = w_cross.sum(1)[:, None] * z.data - w_cross @ z_tilde.data
    return (2.0 / (n * (n - 1))) * g_self - (2.0 / (n * n)) * g_cross


@dataclass(frozen=True)
class CwaeParams:
    """Sample size, dimension and the bandwidth constant gamma_n = (4/(3n))^{2/5}."""

    n: int
    dim: int
    gamma_n: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.dim < 2:
            raise ValueError("dim must be >= 2 (the 2D-3 scale must be positive)")
        expected = (4.0 / (3.0 * self.n)) ** 0.4
        if abs(self.gamma_n - expected) > 1e-12 * expected:
            raise ValueError(f"gamma_n={self.gamma_n} does not match (4/(3n))^0.4={expected}")

    @classmethod
    def for_cloud(cls, n: int, dim: int) -> "CwaeParams":
        return cls(n, dim, (4.0 / (3.0 * n)) ** 0.4)


def cwae(z: PointCloud, params: CwaeParams) -> float:
    """Analytic projected-smoothing regularizer:

        (1/n^2) sum_{i,j} (g + |z_i-z_j|^2/(2D-3))^{-1/2}
        - (2/n) sum_i (g + 1/2 + |z_i|^2/(2D-3))^{-1/2}

    with g = gamma_n. The i = j diagonal is included, as printed.
    """
    if z.dim < 2:
        raise ValueError("dim must be >= 2")
    if params.n != z.n:
        raise ValueError(f"params.n={params.n} does not match cloud n={z.n}")
    m = 2.0 * z.dim - 3.0
    sq = _sq_dists(z.data, z.data)
    r = (z.data * z.data).sum(1)
    pair_term = float(np.sum((params.gamma_n + sq / m) ** -0.5)) / (z.n * z.n)
    point_term = float(np.sum((params.gamma_n + 0.5 + r / m) ** -0.5)) * 2.0 / z.n
    return pair_term - point_term


def cwae_gradient(z: PointCloud, params: CwaeParams) -> np.ndarray:
    """Exact gradient of cwae with respect to the rows of z."""
    if z.dim < 2:
        raise ValueError("dim must be >= 2")
    if params.n != z.n:
        raise ValueError(f"params.n={params.n} does not match cloud n={z.n}")
    n = z.n
    m = 2.0 * z.dim - 3.0
    sq = _sq_dists(z.data, z.data)
    r = (z.data * z.data).sum(1)
    w = (params.gamma_n + sq / m) ** -1.5
    np.fill_diagonal(w, 0.0)
    g_pair = -(2.0 / (m * n * n)) * (w.sum(1)[:, None] * z.data - w @ z.data)
    u = (params.gamma_n + 0.5 + r / m) ** -1.5
    g_point = (2.0 / (m * n)) * u[:, None] * z.data
    return g_pair + g_point


def mardia_stats(z: PointCloud) -> tuple[float, float, float]:
    """(skewness_stat, kurtosis_stat, second_moment) =
    ((1/n^2) sum (z_i . z_j)^3, (1/n) sum |z_i|^4, (1/n) sum |z_i|^2).

    For an exact N(0, I) sample these approach (0, D(D+2), D)."""
    gram = z.data @ z.data.T
    n = z.n
    skewness = float(np.sum(gram ** 3)) / (n * n)
    radii = np.diag(gram)
    kurtosis = float(np.sum(radii ** 2)) / n
    second = float(np.sum(radii)) / n
    return skewness, kurtosis, second
