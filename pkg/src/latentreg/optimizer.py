"""Plain gradient descent over a point cloud for the three regularizers.

Deterministic objectives (CWAE, quantile attraction) get backtracking: a step
that would increase the objective halves alpha up to 20 times before being
accepted, so the accepted objective sequence is monotone nonincreasing. The
stochastic MMD objective (fresh prior sample per step) takes plain steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import baselines, cdf_attract
from .sampling import PointCloud, Rng, sample_standard_normal, sample_uniform_cube

__all__ = [
    "RunConfig",
    "TraceRow",
    "OptimizationError",
    "WaeMmdObjective",
    "CwaeObjective",
    "CdfAttractionObjective",
    "run",
    "trace_to_csv",
]

_MAX_HALVINGS = 20


class OptimizationError(RuntimeError):
    """Non-finite objective or gradient encountered during a run."""

    def __init__(self, step: int, message: str) -> None:
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass
class RunConfig:
    n: int
    dim: int
    seed: int
    max_steps: int = 2000
    alpha0: float = 1.0
    schedule: str = "constant"  # or "proportional_to_objective"
    stop_tolerance: float | None = None
    init: str = "uniform_cube"  # or "gaussian"
    init_lo: float = -1.0
    init_hi: float = 1.0

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.alpha0 <= 0.0:
            raise ValueError("alpha0 must be positive")
        if self.schedule not in ("constant", "proportional_to_objective"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.init not in ("uniform_cube", "gaussian"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class TraceRow:
    step: int
    objective: float
    alpha: float
    wall_ms: float
    extras: dict[str, float] = field(default_factory=dict)


class WaeMmdObjective:
    """MMD against a fresh prior sample drawn at the start of every step."""

    deterministic = False

    def __init__(self, kernel: baselines.KernelSpec, prior_rng: Rng) -> None:
        self.kernel = kernel
        self.prior_rng = prior_rng
        self._z_tilde: PointCloud | None = None

    def begin_step(self, step: int, x: PointCloud) -> None:
        self._z_tilde = sample_standard_normal(self.prior_rng, x.n, x.dim)

    def value(self, x: PointCloud) -> float:
        return baselines.wae_mmd(x, self._z_tilde, self.kernel)

    def gradient(self, x: PointCloud) -> np.ndarray:
        return baselines.wae_mmd_gradient(x, self._z_tilde, self.kernel)

    def trace_extras(self) -> dict[str, float]:
        return {}


class CwaeObjective:
    deterministic = True

    def __init__(self, params: baselines.CwaeParams) -> None:
        self.params = params

    def begin_step(self, step: int, x: PointCloud) -> None:
        pass

    def value(self, x: PointCloud) -> float:
        return baselines.cwae(x, self.params)

    def gradient(self, x: PointCloud) -> np.ndarray:
        return baselines.cwae_gradient(x, self.params)

    def trace_extras(self) -> dict[str, float]:
        return {}


class CdfAttractionObjective:
    """Quantile mismatch of radii and pairwise distances.

    The value computation caches its sort/residual work per cloud object, so
    the gradient call that follows it inside one optimizer step is cheap."""

    deterministic = True

    def __init__(self, targets: cdf_attract.TargetQuantiles,
                 mode: str = "exact_subgradient", norm: str = "l1",
                 radii_weight: float = 1.0, distance_weight: float = 1.0) -> None:
        self.targets = targets
        self.mode = mode
        self.norm = norm
        self.radii_weight = radii_weight
        self.distance_weight = distance_weight
        self._last_terms: tuple[float, float] = (float("nan"), float("nan"))
        self._cached_cloud: PointCloud | None = None
        self._cached_residuals = None

    def begin_step(self, step: int, x: PointCloud) -> None:
        pass

    def _residuals(self, x: PointCloud):
        if self._cached_cloud is not x:
            self._cached_residuals = cdf_attract.residual_bundle(x, self.targets)
            self._cached_cloud = x
        return self._cached_residuals

    def value(self, x: PointCloud) -> float:
        term_r, term_d = cdf_attract.objective_terms_from_residuals(
            self._residuals(x), self.norm)
        self._last_terms = (term_r, term_d)
        return self.radii_weight * term_r + self.distance_weight * term_d

    def gradient(self, x: PointCloud) -> np.ndarray:
        return cdf_attract.gradient_from_residuals(
            x, self._residuals(x), self.mode, self.norm,
            self.radii_weight, self.distance_weight)

    def trace_extras(self) -> dict[str, float]:
        return {"radii_term": self._last_terms[0],
                "distance_term": self._last_terms[1]}


def _initial_cloud(config: RunConfig) -> PointCloud:
    rng = Rng(config.seed)
    if config.init == "uniform_cube":
        return sample_uniform_cube(rng, config.n, config.dim,
                                   config.init_lo, config.init_hi)
    return sample_standard_normal(rng, config.n, config.dim)


def run(config: RunConfig, objective) -> tuple[PointCloud, list[TraceRow]]:
    """Gradient descent; returns the final cloud and one trace row per step.

    Each row records the pre-step objective and the alpha actually applied.
    Stops early once a deterministic objective falls to stop_tolerance."""
    def checked_value(cloud: PointCloud, step: int) -> float:
        value = objective.value(cloud)
        if not np.isfinite(value):
            raise OptimizationError(step, f"objective is not finite ({value})")
        return value

    x = _initial_cloud(config)
    trace: list[TraceRow] = []
    for step in range(config.max_steps):
        t0 = time.perf_counter()
        objective.begin_step(step, x)
        value = checked_value(x, step)
        extras = objective.trace_extras()
        if objective.deterministic and config.stop_tolerance is not None \
                and value < config.stop_tolerance:
            break
        grad = objective.gradient(x)
        if not np.all(np.isfinite(grad)):
            raise OptimizationError(step, "gradient is not finite")
        if config.schedule == "proportional_to_objective":
            alpha = config.alpha0 * value
        else:
            alpha = config.alpha0
        candidate = PointCloud(x.data - alpha * grad)
        if objective.deterministic:
            accepted = checked_value(candidate, step) <= value
            halvings = 0
            while not accepted and halvings < _MAX_HALVINGS:
                alpha *= 0.5
                halvings += 1
                candidate = PointCloud(x.data - alpha * grad)
                accepted = checked_value(candidate, step) <= value
            if not accepted:
                # no improving step along -grad within the halving budget
                trace.append(TraceRow(step, value, 0.0,
                                      (time.perf_counter() - t0) * 1e3, extras))
                break
        x = candidate
        trace.append(TraceRow(step, value, alpha,
                              (time.perf_counter() - t0) * 1e3, extras))
    return x, trace


def trace_to_csv(trace: Iterable[TraceRow], path, include_wall_ms: bool = False) -> None:
    """Write a trace as CSV. Wall time is off by default so reruns of the
    same configuration produce byte-identical files."""
    trace = list(trace)
    extra_keys = sorted({k for row in trace for k in row.extras})
    header = ["step", "objective", "alpha"] + extra_keys
    if include_wall_ms:
        header.append("wall_ms")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in trace:
            fields = [str(row.step), "%.17g" % row.objective, "%.17g" % row.alpha]
            fields += ["%.17g" % row.extras[k] for k in extra_keys]
            if include_wall_ms:
                fields.append("%.3f" % row.wall_ms)
            fh.write(",".join(fields) + "\n")
