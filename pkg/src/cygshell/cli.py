"""Command-line experiment runner.

Subcommands: count, sample, moments, expand, density, diagnose, selftest.
All artifacts are CSV/JSON with full-precision floats; identical configs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import arith, counting, gapwidth, spectra, stats, voronoi

EXIT_OK = 0
EXIT_TEST_FAILURE = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """One sampling experiment: which gap width, which window, how many points."""

    omega: dict
    X: float
    samples: int
    Q: int = 64
    mode: str = "exact"
    j_max: int = 4
    phase: float = 0.5
    threads: int = 1
    out: str = "."

    def __post_init__(self):
        if self.X < 10:
            raise ValueError("X must be >= 10")
        if self.samples < 10:
            raise ValueError("samples must be >= 10")
        if self.Q < 1:
            raise ValueError("Q must be >= 1")
        if self.j_max % 2 or self.j_max > 8:
            raise ValueError("j_max must be even and <= 8")
        if self.mode not in ("exact", "fast"):
            raise ValueError("mode must be exact or fast")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))


def _parse_radius(text: str, default_q: int = 1) -> counting.RadiusPoint:
    if "/" in text:
        num, den = text.split("/", 1)
        return counting.RadiusPoint(k=int(num), Q=int(den))
    value = float(text)
    if value == int(value):
        return counting.RadiusPoint(k=int(value), Q=default_q)
    return counting.RadiusPoint.from_value(value, 64)


def _omega_from_args(args) -> gapwidth.GapWidth:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
        return gapwidth.gap_from_json(cfg.omega)
    if getattr(args, "omega_spec", None):
        return gapwidth.gap_from_json(json.loads(Path(args.omega_spec).read_text()))
    return gapwidth.gap_from_json({"kind": args.omega})


def _config_from_args(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
        if getattr(args, "out", None):
            cfg = ExperimentConfig(**{**asdict(cfg), "out": args.out})
        return cfg
    return ExperimentConfig(
        omega={"kind": args.omega},
        X=args.X,
        samples=args.samples,
        Q=args.Q,
        mode=args.mode,
        j_max=args.j_max,
        phase=args.phase,
        threads=args.threads,
        out=args.out or ".",
    )


def _table_for(limit: int) -> arith.R2Table:
    return arith.build_r2(limit)


def cmd_count(args) -> int:
    x = _parse_radius(args.x)
    results = {}
    if args.both or args.method == "fast":
        r2 = _table_for(x.floor_sq + 1)
        results["fast"] = counting.count_ball_fast(x, r2)
    if args.both or args.method == "brute":
        results["brute"] = counting.count_ball_brute(x)
    if args.both and results["fast"] != results["brute"]:
        print(f"DISAGREEMENT: fast={results['fast']} brute={results['brute']}")
        return EXIT_TEST_FAILURE
    value = results.get(args.method, next(iter(results.values())))
    if args.both:
        print(f"{value} (methods agree)")
    else:
        print(value)
    return EXIT_OK


def _fast_rows(grid: stats.SampleGrid, omega, values):
    rows = []
    for p, v in zip(grid.points, values):
        x = p.value
        rows.append(SimpleNamespace(x=x, omega_x=float(omega.value(x)),
                                    shell_count=None, error=v * x * x, normalized=v))
    return rows


def cmd_sample(args) -> int:
    cfg = _config_from_args(args)
    omega = gapwidth.gap_from_json(cfg.omega)
    grid = stats.SampleGrid(X=cfg.X, S=cfg.samples, Q=cfg.Q, phase=cfg.phase)
    limit = (int(2 * cfg.X) + 2) ** 2 if cfg.mode == "exact" else max(10_000, int(cfg.X)) + 1
    r2 = _table_for(limit)
    values = stats.sample_errors(omega, grid, r2, mode=cfg.mode, threads=cfg.threads)
    dist = stats.EmpiricalDistribution.from_samples(values, j_max=cfg.j_max)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "exact":
        rows = [counting.shell_sample(p, omega, r2) for p in grid.points]
    else:
        rows = _fast_rows(grid, omega, values)
    stats.write_samples_csv(out / "samples.csv", rows)
    stats.write_distribution_csv(out / "distribution.csv", dist)
    ks = stats.ks_distance(dist, stats.normal_cdf)
    (out / "summary.json").write_text(stats.summary_json(cfg.X, cfg.samples, dist, ks))
    print(f"wrote {out}/samples.csv, distribution.csv, summary.json (ks_normal={ks:.4f})")
    return EXIT_OK


def cmd_moments(args) -> int:
    cfg = _config_from_args(args)
    omega = gapwidth.gap_from_json(cfg.omega)
    grid = stats.SampleGrid(X=cfg.X, S=cfg.samples, Q=cfg.Q, phase=cfg.phase)
    limit = (int(2 * cfg.X) + 2) ** 2 if cfg.mode == "exact" else max(10_000, int(cfg.X)) + 1
    r2 = _table_for(limit)
    values = stats.sample_errors(omega, grid, r2, mode=cfg.mode, threads=cfg.threads)
    dist = stats.EmpiricalDistribution.from_samples(values, j_max=cfg.j_max)
    m2 = stats.m_j(omega, cfg.X, cfg.samples, 2)
    summary = {
        "X": cfg.X,
        "S": cfg.samples,
        "mode": cfg.mode,
        "sigma2": dist.sigma ** 2,
        "m2": m2,
        "variance_ratio_32m2": dist.sigma ** 2 / (32.0 * m2),
        "moments": {str(j): dist.moments[j] for j in sorted(dist.moments)},
        "predicted_even_moments": {
            str(j): spectra.predicted_moment(None, j) for j in range(2, cfg.j_max + 1, 2)
        },
    }
    text = json.dumps(stats._round_floats(summary), indent=2, sort_keys=True)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "moments.json").write_text(text)
    print(text)
    return EXIT_OK


def cmd_expand(args) -> int:
    omega = _omega_from_args(args)
    X = args.X
    grid = stats.SampleGrid(X=X, S=args.samples, Q=args.Q, phase=args.phase)
    r2 = _table_for((int(2 * X) + 2) ** 2)
    rows = []
    for p in grid.points:
        s = counting.shell_sample(p, omega, r2)
        rhs = voronoi.expansion_rhs(p, X, omega, r2)
        rows.append((p.value, s.normalized, rhs, abs(s.normalized - rhs)))
    resid = np.array([r[3] for r in rows])
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "expansion.csv", "w", encoding="utf-8") as fh:
        fh.write("x,ehat,rhs,residual\n")
        for x, ehat, rhs, res in rows:
            fh.write(",".join(format(v, ".17g") for v in (x, ehat, rhs, res)) + "\n")
    summary = {"X": X, "S": args.samples,
               "median_residual": float(np.median(resid)),
               "q95_residual": float(np.quantile(resid, 0.95))}
    print(json.dumps(stats._round_floats(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_density(args) -> int:
    spec_obj = json.loads(Path(args.spec).read_text())
    spec = gapwidth.density_spec_from_json(spec_obj, quad_points=args.quad_points)
    alphas = [float(a) for a in args.alpha]
    values = {format(a, ".17g"): spectra.density_eval(spec, a) for a in alphas}
    summary = {
        "density": values,
        "mass": spectra.density_moment(spec, 0),
        "moment2": spectra.density_moment(spec, 2),
        "moment4": spectra.density_moment(spec, 4),
        "predicted_moment4": spectra.predicted_moment(spec, 4),
    }
    print(json.dumps(stats._round_floats(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    omega = _omega_from_args(args)
    diag = gapwidth.omega_diagnostics(omega, args.X, scan_points=args.scan_points)
    obj = {
        "X": diag.X,
        "u_count": diag.u_count,
        "v_count": diag.v_count,
        "cond3a_ratio": diag.cond3a_ratio,
        "m2": diag.m2,
        "tau_estimate": diag.tau_estimate,
        "lj_estimates": {str(j): v for j, v in sorted(diag.lj_estimates.items())},
        "carleman_partial": list(diag.carleman_partial),
    }
    print(json.dumps(stats._round_floats(obj), indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest fixtures
# ---------------------------------------------------------------------------

def _fixtures():
    def counts():
        r2 = arith.build_r2(120)
        assert counting.count_ball_brute(counting.RadiusPoint(1, 1)) == 7
        assert counting.count_ball_fast(counting.RadiusPoint(1, 1), r2) == 7
        assert counting.count_ball_fast(counting.RadiusPoint(1, 2), r2) == 1
        assert counting.count_ball_brute(counting.RadiusPoint(2, 1)) == 69
        assert counting.count_ball_fast(counting.RadiusPoint(2, 1), r2) == 69
        for k in (3, 10, 31, 59):
            p = counting.RadiusPoint(k, 7)
            assert counting.count_ball_fast(p, r2) == counting.count_ball_brute(p)

    def r2_values():
        r2 = arith.build_r2(25)
        assert list(r2.values[:11]) == [1, 4, 4, 0, 4, 8, 0, 0, 4, 4, 8]
        assert r2.values[25] == 12
        assert sum(int(v) ** 2 for v in r2.values[1:11]) == 208

    def spectra_exact():
        phi = spectra.phi_from_poly([1, 1])
        assert [spectra.phi_moment(phi, j) for j in (1, 2, 3, 4)] == [2, 6, 20, 70]
        spec = spectra.DensitySpec(mode="product", phis=(phi,))
        for j in (2, 4, 6):
            assert spectra.constrained_frequency_sum(spec, j) == spectra.construction_moment(spec, j)
        assert [spectra.predicted_moment(None, j) for j in (2, 4, 6)] == [1.0, 3.0, 15.0]

    def gap_forms():
        om = gapwidth.make_slowly_varying("inv_log")
        assert abs(float(om.value(math.e)) - 1.0) < 1e-12
        assert abs(float(om.d1(math.e)) + 1.0 / math.e) < 1e-12
        ap = gapwidth.make_almost_periodic(gapwidth.AlmostPeriodicGap(
            polys=((1.0,),), lambdas=(1.0,), exponent=2, mode="product"))
        x = 1000.0
        assert abs(float(ap.value(x)) - math.log(x) ** -2) < 1e-12

    def zero_relations():
        assert voronoi.sum_sqrt_is_zero([1, -1], [2, 2])
        assert voronoi.sum_sqrt_is_zero([1, 1, -1], [2, 8, 18])
        assert not voronoi.sum_sqrt_is_zero([1, -1], [2, 3])

    def stats_basics():
        assert abs(stats.normal_cdf(1.96) - 0.9750021048517795) < 1e-9
        dist = stats.EmpiricalDistribution.from_samples([1.0, -1.0] * 20)
        assert abs(dist.moments[2] - 1.0) < 1e-12
        phi = spectra.phi_from_poly([1, 1])
        spec = spectra.DensitySpec(mode="product", phis=(phi,))
        assert abs(stats.mixture_cdf(spec, 0.0) - 0.5) < 1e-12

    return [
        ("counting_fixtures", counts),
        ("r2_fixtures", r2_values),
        ("spectra_exact_identities", spectra_exact),
        ("gapwidth_closed_forms", gap_forms),
        ("sqrt_zero_relations", zero_relations),
        ("stats_basics", stats_basics),
    ]


def cmd_selftest(_args) -> int:
    failures = []
    passed = 0
    for name, fn in _fixtures():
        try:
            fn()
            passed += 1
            print(f"PASS {name}")
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures.append(name)
            print(f"FAIL {name}: {exc}")
    print(f"{passed} passed, {len(failures)} failed")
    if failures:
        print("failing fixtures:", ", ".join(failures))
        return EXIT_TEST_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cygshell",
                                 description="lattice shell counting and error statistics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="lattice points in a ball of radius k/Q")
    p.add_argument("--x", required=True, help="radius, e.g. 3/2 or 1.5")
    p.add_argument("--method", choices=("fast", "brute"), default="fast")
    p.add_argument("--both", action="store_true", help="run both methods and compare")
    p.set_defaults(fn=cmd_count)

    def sampling_flags(p):
        p.add_argument("--omega", default="inv_log",
                       choices=gapwidth.SLOWLY_VARYING_KINDS)
        p.add_argument("--omega-spec", help="JSON gap-width spec file")
        p.add_argument("--config", help="ExperimentConfig JSON file")
        p.add_argument("--X", type=float, default=100.0)
        p.add_argument("--samples", type=int, default=100)
        p.add_argument("--Q", type=int, default=64)
        p.add_argument("--phase", type=float, default=0.5)
        p.add_argument("--mode", choices=("exact", "fast"), default="exact")
        p.add_argument("--j-max", dest="j_max", type=int, default=4)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", help="artifact directory", default=".")

    p = sub.add_parser("sample", help="sample normalized shell errors over (X, 2X)")
    sampling_flags(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("moments", help="variance and moment summary of the samples")
    sampling_flags(p)
    p.set_defaults(fn=cmd_moments)

    p = sub.add_parser("expand", help="residuals of the trigonometric expansion")
    sampling_flags(p)
    p.set_defaults(fn=cmd_expand)

    p = sub.add_parser("density", help="limiting mixture density evaluation")
    p.add_argument("--spec", required=True, help="JSON density spec file")
    p.add_argument("--alpha", nargs="+", default=["0"])
    p.add_argument("--quad-points", dest="quad_points", type=int, default=64)
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("diagnose", help="regularity diagnostics of a gap width")
    p.add_argument("--omega", default="inv_log", choices=gapwidth.SLOWLY_VARYING_KINDS)
    p.add_argument("--omega-spec", help="JSON gap-width spec file")
    p.add_argument("--config", help="ExperimentConfig JSON file")
    p.add_argument("--X", type=float, default=1000.0)
    p.add_argument("--scan-points", dest="scan_points", type=int, default=10_000)
    p.set_defaults(fn=cmd_diagnose)

    p = sub.add_parser("selftest", help="run the built-in fixture suite")
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OverflowError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
