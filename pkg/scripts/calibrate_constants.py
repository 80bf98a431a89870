#!/usr/bin/env python3
"""Regenerate src/latentreg/calibration.py from Monte Carlo runs.

Statistics whose null distributions have no usable closed form here (the
pairwise-distance KS, pooled projections, two-sample product/angle tests, and
the quantile-mismatch objective of true prior samples) get their reference
medians and 95th percentiles estimated from seeded prior draws at the
standard experiment scale n=200, D=20. Run from the repository root:

    python scripts/calibrate_constants.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from latentreg.cdf_attract import build_target_quantiles, cdf_objective  # noqa: E402
from latentreg.sampling import Rng, sample_standard_normal  # noqa: E402
from latentreg.stat_tests import (  # noqa: E402
    angle_test,
    distance_test,
    projection_test,
    radii_test,
    scalar_product_test,
)

N = 200
DIM = 20
TRIALS = 1000
BASE_SEED = 202_400_000
NUM_DIRS = 10

OUT = Path(__file__).resolve().parents[1] / "src" / "latentreg" / "calibration.py"

TEMPLATE = '''"""Monte Carlo reference constants for the statistical battery.

Null distributions of the dependent statistics (pairwise distances, pooled
projections, two-sample product/angle comparisons) and of the quantile
mismatch of true prior samples, estimated once from {trials} seeded N(0, I)
clouds at n={n}, D={dim}. Regenerate with scripts/calibrate_constants.py.
"""

N = {n}
DIM = {dim}
TRIALS = {trials}
BASE_SEED = {base_seed}
NUM_DIRS = {num_dirs}

# median quantile-mismatch objective (l1) of true prior samples, and the
# default stopping threshold for attraction runs (2x that sampling floor)
DBAR_MEDIAN = {dbar_median!r}
ATTRACT_STOP_TOLERANCE = {stop_tol!r}

# default step-size constant for the proportional-to-objective schedule,
# fixed by the sweep in scripts/sweep_alpha0.py
ATTRACT_ALPHA0 = 0.2

# one-sample KS against chi-squared(DIM)
RADII_KS_MEDIAN = {radii_med!r}
RADII_KS_Q95 = {radii_q95!r}
DISTANCE_KS_MEDIAN = {dist_med!r}
DISTANCE_KS_Q95 = {dist_q95!r}

# pooled projections onto NUM_DIRS random directions vs the normal CDF
PROJECTION_KS_Q95 = {proj_q95!r}

# two-sample KS between independent prior clouds
SCALAR_KS2_Q95 = {scal_q95!r}
ANGLE_KS2_Q95 = {angle_q95!r}
'''


def main() -> None:
    targets = build_target_quantiles(N, DIM)
    dbar, radii_ks, dist_ks, proj_ks, scal_ks, angle_ks = [], [], [], [], [], []
    for trial in range(TRIALS):
        rng = Rng(BASE_SEED + trial)
        cloud = sample_standard_normal(rng, N, DIM)
        other = sample_standard_normal(rng.derive(2), N, DIM)
        dbar.append(cdf_objective(cloud, targets))
        radii_ks.append(radii_test(cloud).ks_linf)
        dist_ks.append(distance_test(cloud).ks_linf)
        proj_ks.append(projection_test(cloud, rng.derive(3), NUM_DIRS).ks_linf)
        scal_ks.append(scalar_product_test(cloud, other).ks_linf)
        angle_ks.append(angle_test(cloud, other).ks_linf)
        if (trial + 1) % 50 == 0:
            print(f"{trial + 1}/{TRIALS} trials done", flush=True)

    def med(v):
        return float(np.median(v))

    def q95(v):
        return float(np.quantile(v, 0.95))

    dbar_median = med(dbar)
    text = TEMPLATE.format(
        n=N, dim=DIM, trials=TRIALS, base_seed=BASE_SEED, num_dirs=NUM_DIRS,
        dbar_median=dbar_median, stop_tol=2.0 * dbar_median,
        radii_med=med(radii_ks), radii_q95=q95(radii_ks),
        dist_med=med(dist_ks), dist_q95=q95(dist_ks),
        proj_q95=q95(proj_ks), scal_q95=q95(scal_ks), angle_q95=q95(angle_ks),
    )
    OUT.write_text(text)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
