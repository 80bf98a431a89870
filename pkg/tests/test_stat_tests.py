import math

import numpy as np
import pytest

from latentreg import calibration
from latentreg.cdf_attract import chi2_quantile_table
from latentreg.sampling import PointCloud, Rng, sample_standard_normal
from latentreg.specfun import ChiSquare, chi2_cdf, chi2_inv_cdf
from latentreg.stat_tests import (
    EdfCurve,
    angle_test,
    distance_test,
    edf_vs_cdf,
    ks_statistic,
    ks_statistic_two_sample,
    pairwise_angles,
    projection_test,
    radii_test,
    scalar_product_test,
)


def test_edf_vs_cdf_exact_quantiles():
    dist = ChiSquare(5)
    for n in (4, 50):
        table = chi2_quantile_table(n, 5)
        report = edf_vs_cdf(table, lambda t: chi2_cdf(dist, t),
                            lambda p: chi2_inv_cdf(dist, p))
        assert report.ks_linf == pytest.approx(0.5 / n, abs=1e-12)
        assert report.l1_area == pytest.approx(0.0, abs=1e-12)


def test_edf_vs_cdf_single_median_point():
    dist = ChiSquare(7)
    median = chi2_inv_cdf(dist, 0.5)
    report = edf_vs_cdf(np.array([median]), lambda t: chi2_cdf(dist, t))
    assert report.ks_linf == pytest.approx(0.5, abs=1e-10)
    assert report.l1_area is None
    assert report.sample_size == 1


def test_edf_vs_cdf_rejects_empty():
    with pytest.raises(ValueError):
        edf_vs_cdf(np.array([]), lambda t: t)


def test_ks_seeded_chi2_samples_within_critical_value():
    # i.i.d. radii: asymptotic 5% critical value 1.358/sqrt(n)
    n, dim = 200, 20
    dist = ChiSquare(dim)
    passes = 0
    for trial in range(100):
        cloud = sample_standard_normal(Rng(830_000 + trial), n, dim)
        ks = ks_statistic((cloud.data ** 2).sum(1), lambda t: chi2_cdf(dist, t))
        passes += ks < 1.358 / math.sqrt(n)
    assert passes >= 90


def test_radii_and_distance_tests_on_prior_samples():
    # distances are dependent, so their threshold is the Monte Carlo band
    radii_pass = dist_pass = 0
    for trial in range(60):
        cloud = sample_standard_normal(Rng(840_000 + trial), 200, 20)
        radii_pass += radii_test(cloud).ks_linf < 1.358 / math.sqrt(200)
        dist_pass += distance_test(cloud).ks_linf < calibration.DISTANCE_KS_Q95
    assert radii_pass >= 54
    assert dist_pass >= 54


def test_radii_test_detects_shrunk_cloud():
    cloud = sample_standard_normal(Rng(7), 200, 20)
    report = radii_test(PointCloud(0.5 * cloud.data))
    assert report.ks_linf >= 0.4


def test_radii_test_single_point_at_median():
    x = np.zeros((1, 20))
    x[0, 0] = math.sqrt(chi2_inv_cdf(ChiSquare(20), 0.5))
    assert radii_test(PointCloud(x)).ks_linf == pytest.approx(0.5, abs=1e-9)


def test_distance_test_needs_two_points():
    with pytest.raises(ValueError):
        distance_test(PointCloud(np.zeros((1, 3))))


def test_projection_test_all_points_at_origin():
    report = projection_test(PointCloud(np.zeros((50, 4))), Rng(3), 10)
    assert report.ks_linf == pytest.approx(0.5, abs=1e-12)


def test_projection_test_prior_cloud_within_band():
    cloud = sample_standard_normal(Rng(55), 200, 20)
    report = projection_test(cloud, Rng(55).derive(3), 10)
    assert report.ks_linf <= calibration.PROJECTION_KS_Q95


def test_projection_rotation_invariance_in_law():
    cloud = sample_standard_normal(Rng(17), 100, 5)
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(5, 5)))
    rotated = PointCloud(cloud.data @ q.T)
    stats_base, stats_rot = [], []
    for s in range(100):
        stats_base.append(projection_test(cloud, Rng(10_000 + s), 10).ks_linf)
        stats_rot.append(projection_test(rotated, Rng(10_000 + s), 10).ks_linf)
    lo_b, hi_b = np.quantile(stats_base, [0.25, 0.75])
    lo_r, hi_r = np.quantile(stats_rot, [0.25, 0.75])
    assert max(lo_b, lo_r) <= min(hi_b, hi_r)  # overlapping IQRs


def test_two_sample_ks_basic():
    a = np.array([1.0, 2.0, 3.0])
    assert ks_statistic_two_sample(a, a) == 0.0
    assert ks_statistic_two_sample(np.array([0.0, 1.0]), np.array([5.0, 6.0])) == 1.0


def test_scalar_product_test_identity_and_scale():
    ref = sample_standard_normal(Rng(66), 200, 20)
    assert scalar_product_test(ref, ref).ks_linf == 0.0
    # doubling the cloud scales products 4x; measured statistic ~0.29 across
    # seeds, an order of magnitude beyond the null band
    doubled = PointCloud(2.0 * ref.data)
    stat = scalar_product_test(doubled, ref).ks_linf
    assert stat > 0.25
    assert stat > 10 * calibration.SCALAR_KS2_Q95


def test_scalar_product_test_independent_priors_within_band():
    passes = 0
    for trial in range(20):
        rng = Rng(850_000 + trial)
        a = sample_standard_normal(rng, 200, 20)
        b = sample_standard_normal(rng.derive(2), 200, 20)
        passes += scalar_product_test(a, b).ks_linf <= calibration.SCALAR_KS2_Q95
    assert passes >= 17


def test_angle_test_identity_and_degenerate_ray():
    ref = sample_standard_normal(Rng(77), 100, 20)
    assert angle_test(ref, ref).ks_linf == 0.0
    ray = PointCloud(np.outer(np.linspace(1, 2, 50), np.ones(20)))
    assert angle_test(ray, ref).ks_linf > 0.9


def test_angle_test_cross_in_2d_is_near_uniform():
    cross = PointCloud(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]))
    ref = sample_standard_normal(Rng(88), 4, 2)
    stat = angle_test(cross, ref).ks_linf
    # Monte Carlo null band for 4-point clouds in D=2
    null = []
    for trial in range(300):
        rng = Rng(860_000 + trial)
        a = sample_standard_normal(rng, 4, 2)
        b = sample_standard_normal(rng.derive(2), 4, 2)
        null.append(ks_statistic_two_sample(pairwise_angles(a), pairwise_angles(b)))
    assert stat <= np.quantile(null, 0.95)


def test_angle_test_skips_zero_vectors_with_warning():
    data = np.vstack([np.zeros((1, 3)), np.random.default_rng(5).normal(size=(5, 3))])
    with pytest.warns(UserWarning, match="zero vector"):
        angles = pairwise_angles(PointCloud(data))
    assert angles.shape[0] == 5 * 4 // 2


def test_angle_test_all_zero_cloud_errors():
    ref = sample_standard_normal(Rng(9), 5, 3)
    with pytest.raises(ValueError), pytest.warns(UserWarning):
        angle_test(PointCloud(np.zeros((4, 3))), ref)


def test_edf_invariant_under_monotone_reparameterization():
    dist = ChiSquare(6)
    values = sample_standard_normal(Rng(31), 120, 6)
    radii = (values.data ** 2).sum(1)
    base = ks_statistic(radii, lambda t: chi2_cdf(dist, t))
    cubed = ks_statistic(radii ** 3, lambda t: chi2_cdf(dist, np.cbrt(t)))
    assert cubed == pytest.approx(base, abs=1e-13)


def test_reports_are_deterministic():
    cloud = sample_standard_normal(Rng(41), 80, 10)
    a = projection_test(cloud, Rng(42), 7)
    b = projection_test(cloud, Rng(42), 7)
    assert (a.ks_linf, a.l1_area) == (b.ks_linf, b.l1_area)


def test_edf_curve_csv(tmp_path):
    curve = EdfCurve.from_values(np.array([2.0, 1.0, 3.0]), lambda p: 4.0 * p)
    path = tmp_path / "curve.csv"
    curve.to_csv(path)
    text = path.read_text().splitlines()
    assert text[0] == "value,target_arg,prob"
    assert len(text) == 4
    first = text[1].split(",")
    assert float(first[0]) == 1.0
    assert float(first[2]) == pytest.approx(0.5 / 3)
