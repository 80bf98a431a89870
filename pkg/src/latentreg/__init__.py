"""Latent-space regularizers and their evaluation battery.

Closed-form L2 distances between Gaussian-smoothened samples, the MMD and
CWAE reference regularizers, quantile attraction of empirical radii/distance
distributions toward chi-squared targets (plus coordinate-wise, quantized and
torus variants), a statistical test battery, and an experiment CLI.
"""

from .baselines import CwaeParams, KernelSpec, cwae, cwae_gradient, mardia_stats, wae_mmd, wae_mmd_gradient
from .cdf_attract import (
    CoordinateTarget,
    SortedStat,
    TargetQuantiles,
    attraction_step,
    build_target_quantiles,
    cdf_gradient,
    cdf_objective,
    coordinate_step,
    coordinate_targets,
    radii_and_distances,
)
from .gaussian_l2 import (
    GaussianComponent,
    SmoothedSample,
    gaussian_power_identity,
    gaussian_product_integral,
    l2_distance_samples,
    l2_distance_samples_isotropic,
    l2_distance_to_standard_gaussian,
    mean_field_sigma,
    spherical_product_integral,
)
from .optimizer import CdfAttractionObjective, CwaeObjective, RunConfig, WaeMmdObjective, run
from .sampling import PointCloud, Rng, sample_standard_normal, sample_uniform_cube, sample_unit_directions
from .specfun import ChiSquare, chi2_cdf, chi2_inv_cdf, normal_cdf, normal_inv_cdf, reg_lower_gamma
from .stat_tests import (
    EdfCurve,
    TestReport,
    angle_test,
    distance_test,
    edf_vs_cdf,
    projection_test,
    radii_test,
    scalar_product_test,
)

__version__ = "0.1.0"
