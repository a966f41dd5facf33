"""Shape estimates ``{(f_hat(u) / c0)^{1/p} u}`` built from a fitted model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geometry import SphereGrid, StarBoundary
from .kde import KdeModel, kde_evaluate_grid

__all__ = [
    "ShapeEstimate",
    "CONVENTIONS",
    "estimate_shape",
    "estimate_shape_l_half",
    "estimate_shape_normalized",
    "estimate_shape_unit_volume",
    "scale_boundary",
]

CONVENTIONS = ("normalized", "known-c0", "unit-volume-rescaled")


@dataclass(frozen=True)
class ShapeEstimate:
    """Discretized shape estimate and the provenance needed to interpret it.

    ``convention`` records how ``c0_used`` was obtained: ``"normalized"``
    (gauge assumed normalized, c0 = 1, so the shape is known only up to
    homothety), ``"known-c0"`` (analytic or quadrature c0 of a known gauge)
    or ``"unit-volume-rescaled"``.
    """

    boundary: StarBoundary
    c0_used: float
    convention: str
    kernel: str
    eta: float
    n: int

    @property
    def metadata(self) -> dict:
        return {
            "c0_used": self.c0_used,
            "convention": self.convention,
            "kernel": self.kernel,
            "eta": self.eta,
            "n": self.n,
        }


def _estimate(model: KdeModel, grid: SphereGrid, c0: float, convention: str) -> ShapeEstimate:
    if not c0 > 0:
        raise ParameterError(f"c0 must be positive, got {c0}")
    if grid.dimension != model.dimension:
        raise ParameterError("grid and model dimensions differ")
    if convention not in CONVENTIONS:
        raise ParameterError(f"unknown convention {convention!r}")
    dens = kde_evaluate_grid(model, grid)
    radii = (dens / c0) ** (1.0 / model.dimension)
    return ShapeEstimate(StarBoundary(grid.nodes, radii), float(c0), convention,
                         model.kernel.label, model.bandwidth, model.n)


def estimate_shape(model: KdeModel, grid: SphereGrid, c0: float,
                   convention: str = "known-c0") -> ShapeEstimate:
    """Boundary radii ``(f_hat(u) / c0)^{1/p}`` on the grid nodes.

    A zero density value gives a zero radius, i.e. a boundary point at the
    origin.
    """
    return _estimate(model, grid, c0, convention)


def estimate_shape_normalized(model: KdeModel, grid: SphereGrid) -> ShapeEstimate:
    """Estimate with c0 = 1, for data whose gauge normalization is unknown."""
    return _estimate(model, grid, 1.0, "normalized")


def estimate_shape_unit_volume(model: KdeModel, grid: SphereGrid) -> ShapeEstimate:
    """Estimate rescaled so that the estimated star body has unit volume.

    The body's volume is ``(1/p) int r^p du = int f_hat du / (p c0)``, and
    the estimator integrates to one, so this is the choice ``c0 = 1/p``.
    """
    return _estimate(model, grid, 1.0 / model.dimension, "unit-volume-rescaled")


def estimate_shape_l_half(model: KdeModel, grid: SphereGrid) -> ShapeEstimate:
    """Estimate for the planar l_{1/2} sphere, where c0 = 3/4."""
    if model.dimension != 2:
        raise ParameterError("the l_{1/2} estimate is defined for planar samples only")
    return _estimate(model, grid, 0.75, "known-c0")


def scale_boundary(boundary: StarBoundary, c: float) -> StarBoundary:
    """Homothetic copy ``c * boundary`` about the origin."""
    if not c >= 0:
        raise ParameterError(f"scale must be nonnegative, got {c}")
    return StarBoundary(boundary.directions, c * np.asarray(boundary.radii))
