"""Command-line entry point: ``starshape <subcommand> [options]``.

Exit codes: 0 success, 2 parameter error, 3 I/O error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .errors import NumericalError, ParameterError
from .geometry import (
    gauge_ellipse,
    gauge_lq_sphere,
    gauge_triangle,
    make_sphere_grid,
    normalization_constant,
    true_boundary,
)
from .kde import check_brz_conditions, constant_schedule, kde_fit, power_schedule
from .metrics import hausdorff_boundaries
from .pipeline import (
    KERNELS,
    TARGETS,
    ConvergenceTable,
    _choose_eta,
    parse_eta,
    run_cell,
    run_convergence,
)
from .sampling import DirectionalSample
from .shape import estimate_shape, estimate_shape_normalized
from .svg import write_overlay_svg

log = logging.getLogger("starshape")

EXIT_PARAM, EXIT_IO, EXIT_NUMERIC = 2, 3, 4
REPRODUCE_SIZES = (100, 1000, 10000, 100000)
FORMATS = ("csv", "json", "svg")
# held-out points scored by leave-one-out CV in the reproduction commands;
# samples up to this size are scored exactly
REPRODUCE_CV_TERMS = 10000


@dataclass
class RunConfig:
    target: str = "triangle"
    n: tuple = REPRODUCE_SIZES
    seeds: tuple = (0,)
    kernel: str = "vonmises"
    eta: str = "cv"
    resolution: int = 720
    out: str = "out"
    formats: tuple = ("csv", "json", "svg")
    fill_resolution: int = 32
    jobs: int = 1
    cv_max_terms: Optional[int] = None
    timings: bool = False

    def validate(self):
        if not self.n or any(k < 1 for k in self.n) or any(b <= a for a, b in zip(self.n, self.n[1:])):
            raise ParameterError(f"sample sizes must be positive and strictly increasing: {self.n}")
        if not self.seeds:
            raise ParameterError("at least one seed is required")
        if self.resolution < 8:
            raise ParameterError("resolution must be >= 8")
        if self.kernel not in KERNELS:
            raise ParameterError(f"unknown kernel {self.kernel!r}; choose from {sorted(KERNELS)}")
        if self.target not in TARGETS:
            raise ParameterError(f"unknown target {self.target!r}; choose from {sorted(TARGETS)}")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ParameterError(f"unknown formats {sorted(bad)}")
        parse_eta(self.eta, 2)
        return self


def _int_list(text: str) -> tuple:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(float(part)))
        except (TypeError, ValueError):
            raise ParameterError(f"cannot parse integer list {text!r}") from None
    return tuple(out)


_CONVERTERS = {
    "n": _int_list,
    "seeds": _int_list,
    "resolution": int,
    "fill_resolution": int,
    "jobs": int,
    "cv_max_terms": lambda v: None if str(v).lower() in ("", "none", "all") else int(v),
    "formats": lambda v: tuple(s.strip() for s in str(v).split(",") if s.strip()),
    "timings": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
}
_ALIASES = {"format": "formats", "fill-resolution": "fill_resolution", "cv-max-terms": "cv_max_terms"}


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[_ALIASES.get(key, key.replace("-", "_"))] = value
    return out


def build_config(args: argparse.Namespace, defaults: RunConfig) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and v is not False:
            merged[f.name] = v
    known = {f.name for f in fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ParameterError(f"unknown configuration keys: {sorted(unknown)}")
    cfg = RunConfig(**{f.name: getattr(defaults, f.name) for f in fields(RunConfig)})
    for k, v in merged.items():
        conv = _CONVERTERS.get(k)
        try:
            setattr(cfg, k, conv(v) if conv and isinstance(v, str) else v)
        except ValueError:
            raise ParameterError(f"bad value for {k}: {v!r}") from None
    return cfg.validate()


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_report(n, seed, eta, rep, d_n, stream=None):
    stream = stream or sys.stdout
    wa, wb = rep.witness_a_to_b, rep.witness_b_to_a
    stream.write(
        f"{n:>8d} {seed:>6d} {eta:>12.6g} {rep.distance:>12.6g} {d_n:>12.6g}  "
        f"est({wa.point[0]:+.4f},{wa.point[1]:+.4f})->({wa.nearest[0]:+.4f},{wa.nearest[1]:+.4f})  "
        f"true({wb.point[0]:+.4f},{wb.point[1]:+.4f})->({wb.nearest[0]:+.4f},{wb.nearest[1]:+.4f})\n"
    )


def _report_header(stream=None):
    (stream or sys.stdout).write(
        f"{'n':>8} {'seed':>6} {'eta':>12} {'hausdorff':>12} {'d_n':>12}  witnesses\n"
    )


def _conditions(cfg: RunConfig, p: int) -> dict:
    eta = parse_eta(cfg.eta, p)
    if eta == "cv" or isinstance(eta, tuple):
        # CV grids are centred on this schedule
        schedule = power_schedule(p)
    elif isinstance(eta, float):
        schedule = constant_schedule(eta)
    else:
        schedule = eta
    probes = [k for k in cfg.n if k >= 2]
    if len(probes) < 2:
        return {"schedule": schedule.label, "error": "need at least two sample sizes >= 2"}
    report = check_brz_conditions(KERNELS[cfg.kernel](), schedule, p, probes)
    return {"schedule": schedule.label, "all_passed": report.all_passed, **report.as_dict()}


def cmd_reproduce(cfg: RunConfig) -> int:
    """Figure panels for each n (first seed) plus a table over all seeds."""
    target = TARGETS[cfg.target]()
    out = _outdir(cfg)
    kernel = KERNELS[cfg.kernel]()
    max_terms = cfg.cv_max_terms if cfg.cv_max_terms is not None else REPRODUCE_CV_TERMS
    rows = []
    _report_header()
    for n in cfg.n:
        for i, seed in enumerate(cfg.seeds):
            cell = run_cell(target, n, seed, kernel, cfg.eta, cfg.resolution, cfg.fill_resolution, max_terms)
            rows.append(cell.row)
            rep = hausdorff_boundaries(cell.estimate.boundary, cell.truth)
            _print_report(n, seed, cell.row.eta, rep, cell.row.d_n)
            if i:
                continue
            stem = out / f"{target.name}_n{n}"
            if "svg" in cfg.formats:
                title = f"{target.name}, n = {n}"
                if target.plot_scale != 1.0:
                    title += f" (shapes scaled by {target.plot_scale:g})"
                write_overlay_svg(stem.with_suffix(".svg"), cell.truth, cell.estimate.boundary,
                                  target.plot_scale, title)
            io.write_estimate(cell.estimate, Path(f"{stem}_estimate"), cfg.formats,
                              {"target": target.name, "seed": seed})
            if "csv" in cfg.formats:
                io.write_points_csv(cell.points, Path(f"{stem}_sample.csv"))
            if "json" in cfg.formats:
                io.write_points_json(cell.points, Path(f"{stem}_sample.json"))
    truth = cell.truth
    if "csv" in cfg.formats:
        io.write_boundary_csv(truth, out / f"{target.name}_truth.csv")
    if "json" in cfg.formats:
        io.write_boundary_json(truth, out / f"{target.name}_truth.json", {"target": target.name})
    table = ConvergenceTable(rows).sorted()
    io.write_table_csv(table, out / f"{target.name}_table.csv", cfg.timings)
    return 0


def cmd_convergence(cfg: RunConfig) -> int:
    if len(cfg.n) < 2:
        raise ParameterError("convergence needs at least two sample sizes")
    target = TARGETS[cfg.target]()
    out = _outdir(cfg)
    table = run_convergence(cfg.target, cfg.n, cfg.seeds, cfg.kernel, cfg.eta, cfg.resolution,
                            cfg.fill_resolution, cfg.jobs, cfg.cv_max_terms)
    table.conditions = _conditions(cfg, target.gauge.dimension)
    io.write_table_csv(table, out / f"{cfg.target}_convergence.csv", cfg.timings)
    io.write_json(table.conditions, out / f"{cfg.target}_conditions.json")
    if "json" in cfg.formats:
        doc = {
            "target": cfg.target,
            "kernel": cfg.kernel,
            "eta": cfg.eta,
            "resolution": cfg.resolution,
            "rows": [
                {k: getattr(r, k) for k in table.HEADER if k != "runtime_ms" or cfg.timings}
                for r in table.rows
            ],
            "conditions": table.conditions,
        }
        io.write_json(doc, out / f"{cfg.target}_convergence.json")
    med = table.median_by_n()
    sys.stdout.write(f"{'n':>8} {'median hausdorff':>18}\n")
    for n, v in med.items():
        sys.stdout.write(f"{n:>8d} {v:>18.6g}\n")
    failed = [v["name"] for k, v in table.conditions.items()
              if k.startswith("condition_") and v["status"] == "fail"]
    if failed:
        sys.stdout.write(f"conditions failed: {', '.join(failed)}\n")
    return 0


def cmd_estimate(cfg: RunConfig, input_path: str, c0: Optional[float], truth_name: Optional[str]) -> int:
    points = io.read_points(input_path)
    sample = DirectionalSample.from_points(points)
    p = sample.dimension
    kernel = KERNELS[cfg.kernel]()
    eta = _choose_eta(cfg.eta, sample, kernel, cfg.cv_max_terms)
    model = kde_fit(sample, kernel, eta)
    grid = make_sphere_grid(p, cfg.resolution, seed=cfg.seeds[0])
    est = estimate_shape(model, grid, c0) if c0 is not None else estimate_shape_normalized(model, grid)
    out = _outdir(cfg)
    stem = out / f"{Path(input_path).stem}_estimate"
    io.write_estimate(est, stem, cfg.formats, {"input": str(input_path), "dimension": p})
    sys.stdout.write(f"n={sample.source_count} p={p} kernel={kernel.label} eta={eta:.6g} "
                     f"convention={est.convention} c0={est.c0_used:.6g}\n")
    if truth_name is not None:
        target = TARGETS[truth_name]()
        rep = hausdorff_boundaries(est.boundary, true_boundary(target.gauge, grid))
        _report_header()
        _print_report(sample.source_count, cfg.seeds[0], eta, rep, float("nan"))
        if "json" in cfg.formats:
            io.write_json(rep.as_dict(), Path(f"{stem}_hausdorff.json"))
    return 0


def cmd_gauges(resolution: int) -> int:
    grid = make_sphere_grid(2, max(resolution, 8))
    gauges = [gauge_triangle(), gauge_lq_sphere(0.5, 2), gauge_lq_sphere(2.0, 2),
              gauge_ellipse(np.diag([4.0, 1.0]))]
    sys.stdout.write(f"{'gauge':<14} {'p':>2} {'known c0':>14} {'quadrature c0':>16}\n")
    for g in gauges:
        known = f"{g.known_c0:.10g}" if g.known_c0 is not None else "-"
        sys.stdout.write(f"{g.label:<14} {g.dimension:>2} {known:>14} {normalization_constant(g, grid):>16.10g}\n")
    sys.stdout.write("targets: " + ", ".join(sorted(TARGETS)) + "\n")
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--n", help="sample sizes, e.g. 100,1000,10000")
    p.add_argument("--seeds", help="seeds, e.g. 0-19 or 0,3,5")
    p.add_argument("--kernel", choices=sorted(KERNELS))
    p.add_argument("--eta", help="bandwidth: a number, 'cv', 'cv:e1,e2,...', or 'schedule[:power]'")
    p.add_argument("--resolution", type=int, help="grid nodes on the sphere")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", dest="formats", help="comma list from csv,json,svg")
    p.add_argument("--fill-resolution", dest="fill_resolution", type=int,
                   help="radial layers used for star-body distances")
    p.add_argument("--cv-max-terms", dest="cv_max_terms", type=int,
                   help="held-out points scored in leave-one-out CV")
    p.add_argument("--jobs", type=int, help="worker processes for independent cells")
    p.add_argument("--timings", action="store_true", default=None,
                   help="record runtime_ms in tables (makes output run-dependent)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starshape", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("reproduce-triangle", "triangle simulation study"),
                        ("reproduce-lhalf", "l_{1/2}-sphere simulation study")]:
        _add_common(sub.add_parser(name, help=help_))
    p = sub.add_parser("estimate", help="estimate the shape from a sample file")
    p.add_argument("input", help="CSV (x1,...,xp) or JSON {dimension, points}")
    p.add_argument("--c0", type=float, help="known c0; default treats the gauge as normalized")
    p.add_argument("--truth", choices=sorted(TARGETS), help="report the Hausdorff distance to this shape")
    _add_common(p)
    p = sub.add_parser("convergence", help="Monte Carlo table over sample sizes and seeds")
    p.add_argument("--target", choices=sorted(TARGETS))
    _add_common(p)
    p = sub.add_parser("gauges", help="list built-in gauges and their c0")
    p.add_argument("--resolution", type=int, default=100000)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gauges":
            return cmd_gauges(args.resolution)
        if args.command in ("reproduce-triangle", "reproduce-lhalf"):
            target = "triangle" if args.command == "reproduce-triangle" else "lhalf"
            cfg = build_config(args, RunConfig(target=target))
            cfg.target = target
            return cmd_reproduce(cfg)
        if args.command == "convergence":
            cfg = build_config(args, RunConfig(n=(100, 1000, 10000), seeds=tuple(range(20)), formats=("csv",)))
            return cmd_convergence(cfg)
        if args.command == "estimate":
            cfg = build_config(args, RunConfig(n=(1,), formats=("csv", "json")))
            return cmd_estimate(cfg, args.input, args.c0, args.truth)
    except ParameterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARAM
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERIC
    parser.error(f"unhandled command {args.command}")
    return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
