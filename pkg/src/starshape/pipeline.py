"""Sample -> fit -> estimate -> evaluate, for one or many (n, seed) cells."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import NumericalError, ParameterError
from .geometry import (
    RadialGauge,
    StarBoundary,
    gauge_lq_sphere,
    gauge_triangle,
    make_sphere_grid,
    true_boundary,
)
from .kde import (
    BandwidthSchedule,
    KernelFn,
    cross_validate_bandwidth,
    kde_evaluate_grid,
    kde_fit,
    kernel_uniform,
    kernel_von_mises,
    power_schedule,
)
from .metrics import (
    hausdorff_boundaries,
    hausdorff_star_bodies,
    root_gap_from_values,
    verify_hausdorff_bound,
)
from .sampling import DirectionalSample, sample_l_half_star, sample_triangle_star
from .shape import ShapeEstimate

__all__ = [
    "Target",
    "TARGETS",
    "KERNELS",
    "TableRow",
    "ConvergenceTable",
    "CellResult",
    "cv_grid",
    "parse_eta",
    "cell_rng",
    "run_cell",
    "run_convergence",
]

CV_GRID_SIZE = 15
FILL_RESOLUTION = 32

KERNELS: dict = {"vonmises": kernel_von_mises, "uniform": kernel_uniform}


@dataclass(frozen=True)
class Target:
    """A star-shaped law with a known gauge, c0 and exact sampler."""

    name: str
    gauge: RadialGauge
    c0: float
    sampler: Callable = field(repr=False)
    plot_scale: float = 1.0


def _triangle() -> Target:
    return Target("triangle", gauge_triangle(), 1.0 / 9.0, sample_triangle_star, 1.0)


def _lhalf() -> Target:
    return Target("lhalf", gauge_lq_sphere(0.5, 2), 0.75, sample_l_half_star, 10.0)


TARGETS: dict = {"triangle": _triangle, "lhalf": _lhalf}


def cv_grid(n: int, p: int, count: int = CV_GRID_SIZE) -> np.ndarray:
    """Geometric bandwidth grid on ``[0.3, 3] * n^{-1/(p+3)}``."""
    base = float(n) ** (-1.0 / (p + 3))
    return np.geomspace(0.3 * base, 3.0 * base, count)


def cell_rng(seed: int, n: int) -> np.random.Generator:
    """Independent stream for the (seed, n) cell of a study."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n)]))


@dataclass(frozen=True)
class TableRow:
    n: int
    seed: int
    eta: float
    hausdorff_boundary: float
    hausdorff_body: float
    d_n: float
    runtime_ms: float


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)
    conditions: Optional[dict] = None

    HEADER = ("n", "seed", "eta", "hausdorff_boundary", "hausdorff_body", "d_n", "runtime_ms")

    def sorted(self) -> "ConvergenceTable":
        return ConvergenceTable(sorted(self.rows, key=lambda r: (r.n, r.seed)), self.conditions)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def median_by_n(self, name: str = "hausdorff_boundary") -> dict:
        out = {}
        for n in sorted({r.n for r in self.rows}):
            out[n] = float(np.median([getattr(r, name) for r in self.rows if r.n == n]))
        return out


@dataclass
class CellResult:
    row: TableRow
    estimate: ShapeEstimate
    truth: StarBoundary
    points: np.ndarray
    body_slack: float


EtaSpec = Union[float, str, BandwidthSchedule]


def parse_eta(eta: EtaSpec, p: int):
    """Normalize a bandwidth argument.

    Accepted forms: a positive number; ``"cv"`` (default candidate grid);
    ``"cv:e1,e2,..."`` (explicit candidates, returned as a tuple);
    a schedule object; or ``"schedule[:power]"`` for ``eta_n = n^{-power}``
    (default power 1/(p+3)).
    """
    if isinstance(eta, (BandwidthSchedule, tuple)) or eta == "cv":
        return eta
    if isinstance(eta, str) and eta.startswith("cv:"):
        try:
            cands = tuple(float(v) for v in eta[3:].split(",") if v.strip())
        except ValueError:
            raise ParameterError(f"bad bandwidth candidates in {eta!r}") from None
        if not cands or any(not c > 0 for c in cands):
            raise ParameterError(f"bandwidth candidates must be positive numbers: {eta!r}")
        return cands
    if isinstance(eta, str):
        if eta == "schedule" or eta.startswith("schedule:"):
            power = eta.partition(":")[2]
            try:
                return power_schedule(p, float(power) if power else None)
            except ValueError:
                raise ParameterError(f"bad schedule power in {eta!r}") from None
        try:
            eta = float(eta)
        except ValueError:
            raise ParameterError(f"unknown bandwidth rule {eta!r}") from None
    if not eta > 0:
        raise ParameterError(f"bandwidth must be positive, got {eta}")
    return float(eta)


def _choose_eta(eta: EtaSpec, sample: DirectionalSample, kernel: KernelFn,
                cv_max_terms: Optional[int] = None) -> float:
    n, p = sample.source_count, sample.dimension
    eta = parse_eta(eta, p)
    if isinstance(eta, BandwidthSchedule):
        return eta(n)
    if isinstance(eta, tuple):
        return cross_validate_bandwidth(sample, kernel, eta, cv_max_terms)
    if eta == "cv":
        return cross_validate_bandwidth(sample, kernel, cv_grid(n, p), cv_max_terms)
    return eta


def run_cell(
    target: Target,
    n: int,
    seed: int,
    kernel: KernelFn,
    eta: EtaSpec = "cv",
    resolution: int = 720,
    fill_resolution: int = FILL_RESOLUTION,
    cv_max_terms: Optional[int] = None,
) -> CellResult:
    """One Monte Carlo replicate: draw, fit, estimate and score against truth.

    Raises NumericalError if either Hausdorff bound by ``d_n`` is violated,
    which can only happen through an implementation error.
    """
    t0 = time.perf_counter()
    p = target.gauge.dimension
    grid = make_sphere_grid(p, resolution, seed=seed)
    points = target.sampler(n, cell_rng(seed, n))
    sample = DirectionalSample.from_points(points)
    bw = _choose_eta(eta, sample, kernel, cv_max_terms)
    model = kde_fit(sample, kernel, bw)
    dens = kde_evaluate_grid(model, grid)
    truth = true_boundary(target.gauge, grid)
    radii = (dens / target.c0) ** (1.0 / p)
    estimate = ShapeEstimate(StarBoundary(grid.nodes, radii), target.c0, "known-c0",
                             kernel.label, bw, n)
    f = target.c0 * target.gauge.evaluate(grid.nodes) ** (-p)
    d_n = root_gap_from_values(dens, f, target.c0, p)
    h_boundary = hausdorff_boundaries(estimate.boundary, truth).distance
    h_body = hausdorff_star_bodies(estimate.boundary, truth, fill_resolution).distance
    runtime_ms = 1e3 * (time.perf_counter() - t0)

    check = verify_hausdorff_bound(estimate, truth, d_n)
    body_slack = max(float(np.max(estimate.boundary.radii)), float(np.max(truth.radii))) / fill_resolution
    if not check.holds or h_body > d_n + body_slack:
        raise NumericalError(
            f"Hausdorff bound violated for {target.name}, n={n}, seed={seed}: "
            f"boundary {h_boundary:.6g}, body {h_body:.6g}, d_n {d_n:.6g}"
        )
    row = TableRow(int(n), int(seed), bw, h_boundary, h_body, d_n, runtime_ms)
    return CellResult(row, estimate, truth, points, body_slack)


def _cell_row(args) -> TableRow:
    target_name, n, seed, kernel_name, eta, resolution, fill, cv_max_terms = args
    return run_cell(TARGETS[target_name](), n, seed, KERNELS[kernel_name](), eta, resolution, fill,
                    cv_max_terms).row


def run_convergence(
    target_name: str,
    sizes: Sequence[int],
    seeds: Sequence[int],
    kernel_name: str = "vonmises",
    eta: Union[float, str] = "cv",
    resolution: int = 720,
    fill_resolution: int = FILL_RESOLUTION,
    jobs: int = 1,
    cv_max_terms: Optional[int] = None,
) -> ConvergenceTable:
    """Full factorial over ``(n, seed)``; rows come back sorted by (n, seed).

    ``eta`` is anything :func:`parse_eta` accepts; use the string form of
    schedules when ``jobs > 1`` so that cells can be shipped to workers.
    """
    if target_name not in TARGETS:
        raise ParameterError(f"unknown target {target_name!r}")
    if kernel_name not in KERNELS:
        raise ParameterError(f"unknown kernel {kernel_name!r}")
    cells = [(target_name, int(n), int(s), kernel_name, eta, resolution, fill_resolution, cv_max_terms)
             for n in sizes for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_cell_row, cells))
    else:
        rows = [_cell_row(c) for c in cells]
    return ConvergenceTable(rows).sorted()
