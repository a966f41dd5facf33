"""Hausdorff distances between discretized shapes, and the root gap ``d_n``.

All distances here are between finite point sets.  They approximate the
continuum distances as the grid is refined; the grid resolution is kept in
each report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError
from .geometry import RadialGauge, SphereGrid, StarBoundary
from .kde import KdeModel, kde_evaluate_grid
from .shape import ShapeEstimate

__all__ = [
    "Witness",
    "HausdorffReport",
    "BoundCheck",
    "directed_hausdorff",
    "directed_hausdorff_bruteforce",
    "hausdorff_points",
    "hausdorff_boundaries",
    "hausdorff_star_bodies",
    "fill_star_body",
    "sup_root_gap",
    "root_gap_from_values",
    "verify_hausdorff_bound",
]

BOUND_SLACK = 1e-9
# point-set sizes at or below which the brute-force path is used directly
_BRUTE_MAX = 2048


@dataclass(frozen=True)
class Witness:
    """A point of one set, its nearest point in the other, and their gap."""

    point: tuple
    nearest: tuple
    gap: float


@dataclass(frozen=True)
class HausdorffReport:
    distance: float
    witness_a_to_b: Witness
    witness_b_to_a: Witness
    grid_resolution: int

    def as_dict(self) -> dict:
        def w(x):
            return {"point": list(x.point), "nearest": list(x.nearest), "gap": x.gap}

        return {
            "distance": self.distance,
            "witness_a_to_b": w(self.witness_a_to_b),
            "witness_b_to_a": w(self.witness_b_to_a),
            "grid_resolution": self.grid_resolution,
        }


def _gaps(a: np.ndarray, b: np.ndarray, idx: np.ndarray) -> np.ndarray:
    # shared by both paths so that equal nearest indices give equal bits
    return np.sqrt(np.sum((a - b[idx]) ** 2, axis=1))


def directed_hausdorff_bruteforce(a, b) -> tuple:
    """Reference ``max_{x in a} min_{y in b} |x - y|`` by an explicit double loop.

    Returns ``(gap, i, j)`` with ``a[i]`` the farthest point and ``b[j]``
    its nearest neighbour.  Quadratic in Python; meant for small sets.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    best_gap, best_i, best_j = -1.0, 0, 0
    for i in range(a.shape[0]):
        dists = _gaps(np.broadcast_to(a[i], b.shape), b, np.arange(b.shape[0]))
        j = int(np.argmin(dists))
        if dists[j] > best_gap:
            best_gap, best_i, best_j = float(dists[j]), i, j
    return best_gap, best_i, best_j


def directed_hausdorff(a, b) -> tuple:
    """Directed Hausdorff distance; same return convention as the brute force.

    Nearest neighbours come from vectorized brute force for small sets and
    a k-d tree otherwise; the gaps are always recomputed by the formula used
    in the brute-force reference.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] * b.shape[0] <= _BRUTE_MAX * _BRUTE_MAX and a.shape[0] <= _BRUTE_MAX:
        d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
        idx = np.argmin(d2, axis=1)
    else:
        _, idx = cKDTree(b).query(a)
    gaps = _gaps(a, b, idx)
    i = int(np.argmax(gaps))
    return float(gaps[i]), i, int(idx[i])


def hausdorff_points(a, b, grid_resolution: int = 0) -> HausdorffReport:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ParameterError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ParameterError("point sets must be nonempty")
    gab, ia, jb = directed_hausdorff(a, b)
    gba, ib, ja = directed_hausdorff(b, a)
    return HausdorffReport(
        max(gab, gba),
        Witness(tuple(a[ia].tolist()), tuple(b[jb].tolist()), gab),
        Witness(tuple(b[ib].tolist()), tuple(a[ja].tolist()), gba),
        int(grid_resolution),
    )


def hausdorff_boundaries(a: StarBoundary, b: StarBoundary) -> HausdorffReport:
    """Hausdorff distance between the boundary point sets of ``a`` and ``b``."""
    if a.dimension != b.dimension:
        raise ParameterError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return hausdorff_points(a.points, b.points, max(len(a), len(b)))


def fill_star_body(boundary: StarBoundary, fill_resolution: int) -> np.ndarray:
    """Radial layers ``{(k / F) radius(u) u : k = 1..F}`` plus the origin."""
    if int(fill_resolution) != fill_resolution or fill_resolution < 2:
        raise ParameterError(f"fill_resolution must be an integer >= 2, got {fill_resolution}")
    c = np.arange(1, int(fill_resolution) + 1) / fill_resolution
    layers = (c[:, None, None] * boundary.points[None, :, :]).reshape(-1, boundary.dimension)
    return np.vstack([np.zeros((1, boundary.dimension)), layers])


def hausdorff_star_bodies(a: StarBoundary, b: StarBoundary, fill_resolution: int = 32) -> HausdorffReport:
    """Hausdorff distance between the filled star bodies of ``a`` and ``b``."""
    if a.dimension != b.dimension:
        raise ParameterError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return hausdorff_points(fill_star_body(a, fill_resolution), fill_star_body(b, fill_resolution),
                            max(len(a), len(b)))


def root_gap_from_values(estimated, true_density, c0: float, p: int) -> float:
    """``max |(f_hat / c0)^{1/p} - (f / c0)^{1/p}|`` over paired node values."""
    fh = np.asarray(estimated, dtype=float)
    f = np.asarray(true_density, dtype=float)
    return float(np.max(np.abs((fh / c0) ** (1.0 / p) - (f / c0) ** (1.0 / p))))


def sup_root_gap(model: KdeModel, gauge: RadialGauge, c0: float, grid: SphereGrid) -> float:
    """Grid approximation of ``d_n = sup_u |f_hat(u)^{1/p} - f(u)^{1/p}|``.

    Both densities are divided by ``c0`` first, i.e. the gap is measured
    for the normalized gauge ``c0^{-1/p} r``.  This is the quantity that
    bounds the Hausdorff distance between the shape estimate (built with
    the same ``c0``) and the true shape; for ``c0 = 1`` it is the plain gap.
    """
    if model.dimension != gauge.dimension or grid.dimension != gauge.dimension:
        raise ParameterError("model, gauge and grid dimensions must agree")
    if not c0 > 0:
        raise ParameterError(f"c0 must be positive, got {c0}")
    p = gauge.dimension
    f = c0 * gauge.evaluate(grid.nodes) ** (-p)
    return root_gap_from_values(kde_evaluate_grid(model, grid), f, c0, p)


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    hausdorff: float
    gap_dn: float
    slack: float


def verify_hausdorff_bound(estimate: ShapeEstimate, truth: StarBoundary, gap_dn: float,
                           allowance: float = 0.0) -> BoundCheck:
    """Check ``hausdorff(estimate, truth) <= d_n`` up to ``1e-9 + allowance``.

    ``allowance`` is the extra discretization slack; it is zero when both
    boundaries and ``d_n`` live on the same grid, as the node-by-node
    pairing then realizes the bound exactly.
    """
    eb = estimate.boundary
    if eb.directions.shape != truth.directions.shape or not np.array_equal(eb.directions, truth.directions):
        raise ParameterError("estimate and truth must share the grid on which d_n was computed")
    dist = hausdorff_boundaries(eb, truth).distance
    slack = BOUND_SLACK + allowance
    return BoundCheck(dist <= gap_dn + slack, dist, float(gap_dn), slack)
