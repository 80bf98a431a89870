"""Experiment command line: EDF-grid and test-battery reproductions at desk
scale, single-cloud evaluation, and attraction demos.

    latentreg fig1    --n 200 --dim 20 --trials 10 --seed 1 --out DIR
    latentreg fig2    --n 200 --dim 20 --trials 10 --seed 1 --out DIR
    latentreg eval    --cloud FILE --which mardia --out DIR
    latentreg attract --target quantized --bits 1 --n 64 --dim 2 --out DIR

All outputs (CSV and SVG) are deterministic for a fixed spec: rerunning a
command writes byte-identical files. Flags override an optional key=value
--config file; every resolved value is echoed to OUT/config_resolved.txt.
Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import calibration
from .baselines import CwaeParams, KernelSpec, cwae, mardia_stats, wae_mmd
from .cdf_attract import (
    CoordinateTarget,
    build_target_quantiles,
    cdf_objective,
    chi2_quantile_table,
    coordinate_step,
)
from .optimizer import (
    CdfAttractionObjective,
    CwaeObjective,
    RunConfig,
    WaeMmdObjective,
    run,
    trace_to_csv,
)
from .sampling import (
    PointCloud,
    Rng,
    sample_standard_normal,
    sample_uniform_cube,
    sample_unit_directions,
)
from .specfun import ChiSquare, chi2_inv_cdf, normal_inv_cdf
from .stat_tests import (
    angle_test,
    distance_test,
    pairwise_angles,
    pairwise_scalar_products,
    projection_test,
    radii_test,
    scalar_product_test,
)
from .svgplot import PALETTE, Curve, render_panel

# locally calibrated run defaults for the optimized EDF-grid rows; the plain
# descent traces are flat (relative objective change < 1e-4 over the trailing
# 100 steps) well before these step counts
CWAE_ALPHA0 = 20.0
WAE_ALPHA0 = 200.0
BASELINE_STEPS = 1000
ATTRACT_STEPS = 5000
# the quantile mismatch reaches its floor well before 400 steps at the
# default alpha0; the test battery runs the attraction that far with no
# early stop
ATTRACT_BATTERY_STEPS = 400
COORD_STEPS = 200
COORD_ALPHA = 0.5

_GRADIENT_MODES = {"exact": "exact_subgradient", "paper": "paper_verbatim"}


@dataclass
class ExperimentSpec:
    experiment: str
    n: int = 200
    dim: int = 20
    trials: int = 10
    seed: int = 1
    steps: int | None = None
    alpha0: float | None = None
    out: str = "latentreg_out"
    jobs: int = 1
    gradient_mode: str = "exact_subgradient"
    norm: str = "l1"
    num_dirs: int = 10
    target: str = "gaussian"
    bits: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def out_dir(self) -> Path:
        out = Path(self.out)
        out.mkdir(parents=True, exist_ok=True)
        return out

    def echo(self, out: Path) -> None:
        lines = [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]
        (out / "config_resolved.txt").write_text("\n".join(lines) + "\n")


def _map_trials(spec: ExperimentSpec, fn):
    if spec.jobs == 1:
        return [fn(t) for t in range(spec.trials)]
    with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
        return list(pool.map(fn, range(spec.trials)))


def _attraction_config(spec: ExperimentSpec, trial_seed: int,
                       stop: bool = True) -> RunConfig:
    if stop:
        max_steps, stop_tolerance = spec.steps or ATTRACT_STEPS, \
            calibration.ATTRACT_STOP_TOLERANCE
    else:
        max_steps, stop_tolerance = spec.steps or ATTRACT_BATTERY_STEPS, None
    return RunConfig(
        n=spec.n, dim=spec.dim, seed=trial_seed, max_steps=max_steps,
        alpha0=spec.alpha0 or calibration.ATTRACT_ALPHA0,
        schedule="proportional_to_objective", stop_tolerance=stop_tolerance,
        init="uniform_cube", init_lo=-1.0, init_hi=1.0)


def run_attraction_trial(spec: ExperimentSpec, trial_seed: int, stop: bool = True):
    """Radii/distance attraction run shared by fig1's bottom row, fig2 and the
    gaussian demo; returns (initial cloud, final cloud, trace)."""
    targets = build_target_quantiles(spec.n, spec.dim)
    config = _attraction_config(spec, trial_seed, stop=stop)
    objective = CdfAttractionObjective(targets, mode=spec.gradient_mode, norm=spec.norm)
    initial = sample_uniform_cube(Rng(trial_seed), spec.n, spec.dim, -1.0, 1.0)
    final, trace = run(config, objective)
    return initial, final, trace


def _run_baseline_trial(spec: ExperimentSpec, trial_seed: int, kind: str) -> PointCloud:
    steps = spec.steps or BASELINE_STEPS
    if kind == "cwae":
        config = RunConfig(n=spec.n, dim=spec.dim, seed=trial_seed, max_steps=steps,
                           alpha0=spec.alpha0 or CWAE_ALPHA0, schedule="constant")
        objective = CwaeObjective(CwaeParams.for_cloud(spec.n, spec.dim))
    else:
        config = RunConfig(n=spec.n, dim=spec.dim, seed=trial_seed, max_steps=steps,
                           alpha0=spec.alpha0 or WAE_ALPHA0, schedule="constant")
        objective = WaeMmdObjective(KernelSpec.imq(spec.dim), Rng(trial_seed).derive(1))
    cloud, _ = run(config, objective)
    return cloud


def _cloud_stats(cloud: PointCloud, stat: str) -> np.ndarray:
    if stat == "radii":
        return (cloud.data * cloud.data).sum(1)
    iu, ju = np.triu_indices(cloud.n, k=1)
    diffs = cloud.data[iu] - cloud.data[ju]
    return 0.5 * (diffs * diffs).sum(1)


def _write_curve_csv(path: Path, sorted_values: np.ndarray,
                     target_args: np.ndarray, probs: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("value,target_arg,prob\n")
        for v, t, p in zip(sorted_values, target_args, probs):
            fh.write("%.17g,%.17g,%.17g\n" % (v, t, p))


def _chi2_deciles(dim: int) -> list[float]:
    dist = ChiSquare(dim)
    return [chi2_inv_cdf(dist, q / 10.0) for q in range(1, 10)]


_Y_TICKS = (0.0, 0.25, 0.5, 0.75, 1.0)


def _edf_panel(path: Path, trial_values: list[np.ndarray], target_xs: np.ndarray,
               target_ps: np.ndarray, title: str, x_ticks) -> None:
    """Overlay per-trial EDF polylines with the target CDF curve in black."""
    hi = max(float(target_xs[-1]), max(float(v[-1]) for v in trial_values))
    lo = min(0.0, float(target_xs[0]), min(float(v[0]) for v in trial_values))
    curves = []
    for idx, values in enumerate(trial_values):
        m = values.shape[0]
        probs = (np.arange(m) + 0.5) / m
        curves.append(Curve(values, probs, PALETTE[idx % len(PALETTE)]))
    curves.append(Curve(target_xs, target_ps, "#000000", width=2.0))
    render_panel(path, curves, title, (lo, hi * 1.02), (0.0, 1.0),
                 x_ticks=x_ticks, y_ticks=_Y_TICKS)


FIG1_ROWS = ("gaussian", "wae_mmd", "cwae", "attract")


def cmd_fig1(spec: ExperimentSpec) -> int:
    """EDF grid: radii and distance curves for prior samples, the two
    baseline minimizers and the quantile attraction, with a KS summary."""
    out = spec.out_dir()
    spec.echo(out)

    def one_trial(t: int):
        trial_seed = spec.seed + t
        clouds = {"gaussian": sample_standard_normal(Rng(trial_seed), spec.n, spec.dim)}
        clouds["wae_mmd"] = _run_baseline_trial(spec, trial_seed, "wae_mmd")
        clouds["cwae"] = _run_baseline_trial(spec, trial_seed, "cwae")
        _, attract_cloud, trace = run_attraction_trial(spec, trial_seed)
        clouds["attract"] = attract_cloud
        trace_to_csv(trace, out / f"fig1_attract_trial{t:02d}_trace.csv")
        result = {}
        for row, cloud in clouds.items():
            cloud.to_csv(out / f"fig1_{row}_trial{t:02d}_cloud.csv")
            reports = {"radii": radii_test(cloud), "distances": distance_test(cloud)}
            values = {}
            for stat in ("radii", "distances"):
                v = np.sort(_cloud_stats(cloud, stat))
                m = v.shape[0]
                _write_curve_csv(out / f"fig1_{row}_{stat}_trial{t:02d}.csv", v,
                                 chi2_quantile_table(m, spec.dim),
                                 (np.arange(m) + 0.5) / m)
                values[stat] = v
            mean_r = float((cloud.data ** 2).sum(1).mean())
            direction = "narrow" if mean_r < spec.dim else "wide"
            result[row] = (values, reports, direction)
        return result

    results = _map_trials(spec, one_trial)

    deciles = _chi2_deciles(spec.dim)
    target_ps = np.linspace(0.001, 0.999, 200)
    dist_chi2 = ChiSquare(spec.dim)
    target_xs = np.array([chi2_inv_cdf(dist_chi2, p) for p in target_ps])
    for row in FIG1_ROWS:
        for stat in ("radii", "distances"):
            _edf_panel(out / f"fig1_{row}_{stat}.svg",
                       [res[row][0][stat] for res in results],
                       target_xs, target_ps,
                       f"{row}: sorted {stat} vs chi2({spec.dim}) CDF", deciles)

    with open(out / "fig1_summary.csv", "w", newline="") as fh:
        fh.write("row,trial,stat,ks_linf,l1_area,direction\n")
        for row in FIG1_ROWS:
            for t, res in enumerate(results):
                for stat in ("radii", "distances"):
                    rep = res[row][1][stat]
                    fh.write("%s,%d,%s,%.17g,%.17g,%s\n"
                             % (row, t, stat, rep.ks_linf, rep.l1_area, res[row][2]))
    return 0


FIG2_TESTS = ("projections", "scalar_products", "angles")


def _fig2_band(spec: ExperimentSpec, test: str) -> float | None:
    if (spec.n, spec.dim) != (calibration.N, calibration.DIM):
        return None
    if test == "projections":
        return calibration.PROJECTION_KS_Q95 if spec.num_dirs == calibration.NUM_DIRS else None
    if test == "scalar_products":
        return calibration.SCALAR_KS2_Q95
    return calibration.ANGLE_KS2_Q95


def cmd_fig2(spec: ExperimentSpec) -> int:
    """Projection / scalar-product / angle battery on attraction-converged
    clouds (right column) next to i.i.d. prior clouds (left column)."""
    out = spec.out_dir()
    spec.echo(out)

    def one_trial(t: int):
        trial_seed = spec.seed + t
        _, attract_cloud, _ = run_attraction_trial(spec, trial_seed, stop=False)
        attract_cloud.to_csv(out / f"fig2_attract_trial{t:02d}_cloud.csv")
        iid_cloud = sample_standard_normal(Rng(trial_seed).derive(4), spec.n, spec.dim)
        reference = sample_standard_normal(Rng(trial_seed).derive(2), spec.n, spec.dim)
        ref_stats = {"scalar_products": pairwise_scalar_products(reference),
                     "angles": pairwise_angles(reference)}
        per_side = {}
        for side, cloud in (("iid", iid_cloud), ("attract", attract_cloud)):
            # both columns project onto the same per-trial direction set
            reports = {
                "projections": projection_test(cloud, Rng(trial_seed).derive(3),
                                               spec.num_dirs),
                "scalar_products": scalar_product_test(cloud, reference),
                "angles": angle_test(cloud, reference),
            }
            dirs = sample_unit_directions(Rng(trial_seed).derive(3),
                                          spec.num_dirs, spec.dim)
            values = {
                "projections": np.sort((cloud.data @ dirs.data.T).ravel()),
                "scalar_products": np.sort(pairwise_scalar_products(cloud)),
                "angles": np.sort(pairwise_angles(cloud)),
            }
            for test in FIG2_TESTS:
                v = values[test]
                m = v.shape[0]
                probs = (np.arange(m) + 0.5) / m
                if test == "projections":
                    targets = np.array([normal_inv_cdf(p) for p in probs])
                else:
                    targets = np.quantile(ref_stats[test], probs)
                _write_curve_csv(out / f"fig2_{side}_{test}_trial{t:02d}.csv",
                                 v, targets, probs)
            per_side[side] = (values, reports)
        return per_side, ref_stats

    results = _map_trials(spec, one_trial)

    for side in ("iid", "attract"):
        for test in FIG2_TESTS:
            trial_values = [per_side[side][0][test] for per_side, _ in results]
            if test == "projections":
                ps = np.linspace(0.001, 0.999, 200)
                xs = np.array([normal_inv_cdf(p) for p in ps])
                ticks = [normal_inv_cdf(q / 10.0) for q in range(1, 10)]
            else:
                pooled = np.sort(np.concatenate(
                    [ref_stats[test] for _, ref_stats in results]))
                ps = (np.arange(pooled.shape[0]) + 0.5) / pooled.shape[0]
                xs = pooled
                ticks = list(np.quantile(pooled, [i / 10 for i in range(1, 10)]))
            _edf_panel(out / f"fig2_{side}_{test}.svg", trial_values, xs, ps,
                       f"{side}: {test} EDF", ticks)

    with open(out / "fig2_summary.csv", "w", newline="") as fh:
        fh.write("side,test,trial,ks_linf,band_q95,pass\n")
        for side in ("iid", "attract"):
            for test in FIG2_TESTS:
                band = _fig2_band(spec, test)
                for t, (per_side, _) in enumerate(results):
                    ks = per_side[side][1][test].ks_linf
                    band_s = "%.17g" % band if band is not None else ""
                    ok = "" if band is None else str(int(ks <= band))
                    fh.write("%s,%s,%d,%.17g,%s,%s\n" % (side, test, t, ks, band_s, ok))
    return 0


_EVAL_CHOICES = ("wae_mmd", "cwae", "mardia", "radii", "distances")


def cmd_eval(cloud_csv: str, which: str, seed: int, out: str) -> int:
    """Evaluate one statistic on a cloud CSV; prints a report and writes it
    next to the other artifacts."""
    cloud = PointCloud.from_csv(cloud_csv)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"cloud={cloud_csv} n={cloud.n} dim={cloud.dim} which={which} seed={seed}")
    rows: list[tuple[str, float]] = []
    if which == "mardia":
        skew, kurt, second = mardia_stats(cloud)
        rows = [("skewness_stat", skew), ("kurtosis_stat", kurt),
                ("second_moment", second)]
    elif which == "wae_mmd":
        z_tilde = sample_standard_normal(Rng(seed).derive(1), cloud.n, cloud.dim)
        rows = [("wae_mmd", wae_mmd(cloud, z_tilde, KernelSpec.imq(cloud.dim)))]
    elif which == "cwae":
        rows = [("cwae", cwae(cloud, CwaeParams.for_cloud(cloud.n, cloud.dim)))]
    else:
        report = radii_test(cloud) if which == "radii" else distance_test(cloud)
        rows = [("ks_linf", report.ks_linf), ("l1_area", report.l1_area),
                ("sample_size", float(report.sample_size))]
    for name, value in rows:
        print(f"{name}=%.17g" % value)
    with open(out_dir / f"eval_{which}.csv", "w", newline="") as fh:
        fh.write("stat,value\n")
        for name, value in rows:
            fh.write("%s,%.17g\n" % (name, value))
    return 0


_HIST_BINS = 32


def _write_histograms(path: Path, cloud: PointCloud, lo: float, hi: float) -> None:
    edges = np.linspace(lo, hi, _HIST_BINS + 1)
    counts = np.stack([np.histogram(cloud.data[:, j], bins=edges)[0]
                       for j in range(cloud.dim)], axis=1)
    with open(path, "w", newline="") as fh:
        fh.write("bin_lo,bin_hi," + ",".join(f"coord{j}" for j in range(cloud.dim)) + "\n")
        for b in range(_HIST_BINS):
            fh.write("%.17g,%.17g," % (edges[b], edges[b + 1])
                     + ",".join(str(int(c)) for c in counts[b]) + "\n")


def codeword_fraction(cloud: PointCloud, bits: int) -> float:
    """Fraction of coordinate values within 2^-(bits+2) of a codeword center
    (m + 0.5)/2^bits."""
    scale = float(2 ** bits)
    centers = (np.floor(cloud.data * scale) + 0.5) / scale
    near = np.abs(cloud.data - centers) <= 2.0 ** -(bits + 2)
    return float(np.mean(near))


def cmd_attract_demo(spec: ExperimentSpec) -> int:
    """Attraction demo: radii/distance attraction for the gaussian target,
    coordinate-wise attraction otherwise; clouds, histograms and a summary."""
    out = spec.out_dir()
    spec.echo(out)
    target_name = spec.target

    def one_trial(t: int):
        trial_seed = spec.seed + t
        if target_name == "gaussian":
            before, after, trace = run_attraction_trial(spec, trial_seed)
            trace_to_csv(trace, out / f"attract_gaussian_trial{t:02d}_trace.csv")
            final_obj = cdf_objective(after, build_target_quantiles(spec.n, spec.dim),
                                      norm=spec.norm)
            summary = ("final_objective", final_obj)
        else:
            kind = {"uniform01": "uniform01", "torus": "torus_uniform01",
                    "quantized": "quantized_uniform"}[target_name]
            bits = spec.bits if kind == "quantized_uniform" else None
            coord_target = CoordinateTarget(kind, bits)
            before = sample_uniform_cube(Rng(trial_seed), spec.n, spec.dim, 0.0, 1.0)
            alpha = spec.alpha0 or COORD_ALPHA
            cloud = before
            for _ in range(spec.steps or COORD_STEPS):
                stepped = coordinate_step(cloud, coord_target, alpha)
                if np.max(np.abs(stepped.data - cloud.data)) < 1e-12:
                    cloud = stepped
                    break
                cloud = stepped
            after = cloud
            if target_name == "quantized":
                summary = ("codeword_fraction", codeword_fraction(after, spec.bits))
            else:
                summary = ("max_coord", float(np.max(after.data)))
        before.to_csv(out / f"attract_{target_name}_trial{t:02d}_before.csv")
        after.to_csv(out / f"attract_{target_name}_trial{t:02d}_after.csv")
        lo, hi = (-5.0, 5.0) if target_name == "gaussian" else (0.0, 1.0)
        _write_histograms(out / f"attract_{target_name}_trial{t:02d}_hist.csv",
                          after, lo, hi)
        return summary

    summaries = _map_trials(spec, one_trial)
    with open(out / f"attract_{target_name}_summary.csv", "w", newline="") as fh:
        fh.write("trial,stat,value\n")
        for t, (name, value) in enumerate(summaries):
            fh.write("%d,%s,%.17g\n" % (t, name, value))
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--alpha0", type=float, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--gradient-mode", choices=("exact", "paper"), default=None)
    p.add_argument("--norm", choices=("l1", "l2"), default=None)
    p.add_argument("--num-dirs", type=int, default=None)
    p.add_argument("--config", type=str, default=None,
                   help="key=value file; flags override file values")


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values

_SPEC_CASTS = {
    "n": int, "dim": int, "trials": int, "seed": int, "steps": int,
    "alpha0": float, "out": str, "jobs": int, "gradient_mode": str,
    "norm": str, "num_dirs": int, "target": str, "bits": int,
}


def _build_spec(experiment: str, args: argparse.Namespace) -> ExperimentSpec:
    file_values = _read_config_file(args.config) if args.config else {}
    spec = ExperimentSpec(experiment)
    for name, cast in _SPEC_CASTS.items():
        flag = getattr(args, name, None)
        if name == "gradient_mode" and flag is not None:
            flag = _GRADIENT_MODES[flag]
        if flag is not None:
            setattr(spec, name, cast(flag))
        elif name in file_values:
            value = file_values[name]
            if name == "gradient_mode":
                value = _GRADIENT_MODES.get(value, value)
            setattr(spec, name, cast(value))
    return spec


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="latentreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_fig1 = sub.add_parser("fig1", help="EDF grid for radii and distances")
    _add_common(p_fig1)
    p_fig2 = sub.add_parser("fig2", help="projection/product/angle battery")
    _add_common(p_fig2)
    p_eval = sub.add_parser("eval", help="evaluate one statistic on a cloud CSV")
    p_eval.add_argument("--cloud", required=True)
    p_eval.add_argument("--which", required=True, choices=_EVAL_CHOICES)
    p_eval.add_argument("--seed", type=int, default=1)
    p_eval.add_argument("--out", type=str, default="latentreg_out")
    p_attract = sub.add_parser("attract", help="attraction demo runs")
    _add_common(p_attract)
    p_attract.add_argument("--target", default=None,
                           choices=("gaussian", "uniform01", "torus", "quantized"))
    p_attract.add_argument("--bits", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "fig1":
            return cmd_fig1(_build_spec("fig1_grid", args))
        if args.command == "fig2":
            return cmd_fig2(_build_spec("fig2_battery", args))
        if args.command == "eval":
            return cmd_eval(args.cloud, args.which, args.seed, args.out)
        return cmd_attract_demo(_build_spec("attract_demo", args))
    except Exception as exc:  # runtime/numeric failure -> exit 2
        sys.stderr.write(f"latentreg: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
