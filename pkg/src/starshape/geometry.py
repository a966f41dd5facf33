"""Radial gauges, discretized star boundaries and quadrature on the sphere.

A gauge ``r`` is a positive, continuous function on R^p minus the origin
with ``r(c x) = c r(x)`` for ``c > 0``.  Its unit level set ``Z`` is the
shape shared by all density contours of ``h(r(x)) dx``, and the point of
``Z`` in direction ``u`` is ``u / r(u)``.

All arrays follow the convention that points are stored row-wise, i.e. a
set of ``N`` points in R^p is an ``(N, p)`` array.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.spatial import cKDTree
from scipy.special import gammaln

from .errors import ParameterError

__all__ = [
    "RadialGauge",
    "SphereGrid",
    "StarBoundary",
    "C0MismatchWarning",
    "surface_area",
    "make_sphere_grid",
    "gauge_triangle",
    "gauge_lq_sphere",
    "gauge_ellipse",
    "boundary_radius",
    "true_boundary",
    "direction_density",
    "normalization_constant",
]

UNIT_TOL = 1e-12
GRID_TOL = 1e-12
# relative disagreement between a quadrature c0 and an analytic one that
# triggers C0MismatchWarning
C0_WARN_RTOL = 1e-3


class C0MismatchWarning(UserWarning):
    """Quadrature value of c0 disagrees with the gauge's analytic value."""


def surface_area(p: int) -> float:
    """Surface measure of the unit sphere S^{p-1} in R^p."""
    return float(2.0 * math.exp(0.5 * p * math.log(math.pi) - gammaln(0.5 * p)))


def _as_points(x, p: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p:
        raise ParameterError(f"expected points of dimension {p}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class RadialGauge:
    """Positively homogeneous gauge ``r`` defining a star-shaped family.

    Parameters
    ----------
    dimension : int
        Ambient dimension ``p >= 2``.
    func : callable
        Vectorized map from an ``(N, p)`` array of nonzero points to an
        ``(N,)`` array of positive values.  Homogeneity is the caller's
        responsibility for user-supplied gauges.
    label : str
        Human-readable identifier, used in file metadata.
    known_c0 : float, optional
        Exact value of ``1 / int_{S^{p-1}} r(u)^{-p} du`` when known.
    """

    dimension: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    label: str
    known_c0: Optional[float] = None

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise ParameterError(f"dimension must be an integer >= 2, got {self.dimension}")
        if self.known_c0 is not None and not self.known_c0 > 0:
            raise ParameterError("known_c0 must be positive")

    def evaluate(self, x):
        """Evaluate the gauge at one point ``(p,)`` or many ``(N, p)``.

        Raises ParameterError if any point is the origin.
        """
        x = _as_points(x, self.dimension)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if np.any(np.all(pts == 0.0, axis=-1)):
            raise ParameterError("gauge is undefined at the origin")
        val = np.asarray(self.func(pts), dtype=float)
        return float(val[0]) if single else val

    __call__ = evaluate


@dataclass(frozen=True)
class SphereGrid:
    """Quadrature rule on S^{p-1}: unit ``nodes`` (N, p) and ``weights`` (N,)."""

    nodes: np.ndarray
    weights: np.ndarray
    stochastic: bool = False

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        """Quadrature sum of ``values`` sampled at the nodes."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise ParameterError("values must have one entry per node")
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class StarBoundary:
    """Discretized boundary ``{radii[k] * directions[k]}`` of a star body.

    The filled star body is implicit: every segment from the origin to a
    boundary point belongs to it.
    """

    directions: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        d = np.array(self.directions, dtype=float, copy=True)
        r = np.array(self.radii, dtype=float, copy=True)
        if d.ndim != 2 or d.shape[1] < 2:
            raise ParameterError("directions must be an (N, p) array with p >= 2")
        if r.shape != (d.shape[0],):
            raise ParameterError("radii must have one entry per direction")
        if d.shape[0] == 0:
            raise ParameterError("boundary must contain at least one direction")
        if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > UNIT_TOL):
            raise ParameterError("directions must be unit vectors")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ParameterError("radii must be finite and nonnegative")
        if d.shape[0] > 1 and cKDTree(d).query_pairs(GRID_TOL):
            raise ParameterError("directions contain duplicates")
        d.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "radii", r)

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    @property
    def points(self) -> np.ndarray:
        return self.radii[:, None] * self.directions

    def __len__(self):
        return self.radii.shape[0]


def make_sphere_grid(p: int, resolution: int, seed: Optional[int] = None) -> SphereGrid:
    """Equal-weight quadrature nodes on S^{p-1}.

    For ``p = 2`` the nodes are the equally spaced angles ``2 pi k / N``.
    For ``p = 3`` a Fibonacci spiral is used.  For ``p >= 4`` the nodes are
    i.i.d. uniform on the sphere (a stochastic rule), and ``seed`` is
    required so that the grid is reproducible.
    """
    if int(p) != p or p < 2:
        raise ParameterError(f"p must be an integer >= 2, got {p}")
    if int(resolution) != resolution or resolution < 8:
        raise ParameterError(f"resolution must be an integer >= 8, got {resolution}")
    p, n = int(p), int(resolution)
    stochastic = False
    if p == 2:
        theta = 2.0 * np.pi * np.arange(n) / n
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    elif p == 3:
        k = np.arange(n)
        z = 1.0 - (2.0 * k + 1.0) / n
        rho = np.sqrt(1.0 - z * z)
        phi = k * np.pi * (3.0 - math.sqrt(5.0))
        nodes = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        if seed is None:
            raise ParameterError("a seed is required for the Monte Carlo grid used when p >= 4")
        g = np.random.default_rng(seed).standard_normal((n, p))
        nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
        stochastic = True
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = np.full(n, surface_area(p) / n)
    return SphereGrid(nodes, weights, stochastic)


def gauge_triangle() -> RadialGauge:
    """Gauge of the triangle with vertices (2, -1), (-1, 2), (-1, -1)."""

    def r(x):
        return np.maximum(np.maximum(-x[:, 0], -x[:, 1]), x[:, 0] + x[:, 1])

    return RadialGauge(2, r, "triangle", known_c0=1.0 / 9.0)


def gauge_lq_sphere(q: float, p: int = 2) -> RadialGauge:
    """Gauge ``(sum_j |x_j|^q)^(1/q)`` whose unit set is the l_q sphere.

    Only the case ``q = 1/2, p = 2`` carries an analytic c0 (= 3/4).
    """
    if not q > 0:
        raise ParameterError(f"q must be positive, got {q}")
    q = float(q)

    if q == 2.0:
        def r(x):
            return np.linalg.norm(x, axis=1)
    else:
        def r(x):
            a = np.abs(x)
            # scale out the max so that small q does not underflow
            m = a.max(axis=1)
            return m * np.sum((a / m[:, None]) ** q, axis=1) ** (1.0 / q)

    c0 = None
    if q == 0.5 and p == 2:
        c0 = 0.75
    elif q == 2.0:
        c0 = 1.0 / surface_area(p)
    return RadialGauge(p, r, f"l{q:g}-sphere", known_c0=c0)


def gauge_ellipse(shape_matrix) -> RadialGauge:
    """Gauge ``(x^T S^{-1} x)^(1/2)`` for a symmetric positive definite S."""
    s = np.asarray(shape_matrix, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 2:
        raise ParameterError("shape matrix must be square with size >= 2")
    if not np.allclose(s, s.T, rtol=1e-12, atol=0):
        raise ParameterError("shape matrix must be symmetric")
    try:
        chol = linalg.cholesky(s, lower=True)
    except linalg.LinAlgError:
        raise ParameterError("shape matrix must be positive definite") from None

    def r(x):
        y = linalg.solve_triangular(chol, x.T, lower=True)
        return np.linalg.norm(y, axis=0)

    # int r^{-p} du = p vol(ellipsoid) = |S^{p-1}| sqrt(det S)
    c0 = 1.0 / (surface_area(s.shape[0]) * float(np.prod(np.diag(chol))))
    return RadialGauge(s.shape[0], r, "ellipse", known_c0=c0)


def _check_unit(u):
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(np.linalg.norm(np.atleast_2d(u), axis=1) - 1.0) > 1e-10):
        raise ParameterError("direction must be a unit vector")
    return u


def boundary_radius(gauge: RadialGauge, u):
    """Distance from the origin to ``Z`` along the unit direction(s) ``u``."""
    u = _check_unit(u)
    return 1.0 / gauge.evaluate(u)


def true_boundary(gauge: RadialGauge, grid: SphereGrid) -> StarBoundary:
    """Discretize ``Z = {r = 1}`` on the grid directions."""
    if grid.dimension != gauge.dimension:
        raise ParameterError("grid and gauge dimensions differ")
    return StarBoundary(grid.nodes, boundary_radius(gauge, grid.nodes))


def direction_density(gauge: RadialGauge, c0: float, u):
    """Density ``c0 r(u)^{-p}`` of the direction ``x / |x|``."""
    if not c0 > 0:
        raise ParameterError("c0 must be positive")
    u = _check_unit(u)
    return c0 * gauge.evaluate(u) ** (-gauge.dimension)


def normalization_constant(gauge: RadialGauge, grid: SphereGrid) -> float:
    """Quadrature value of ``c0 = 1 / int_{S^{p-1}} r(u)^{-p} du``.

    If the gauge carries an analytic ``known_c0`` and the two disagree by
    more than ``C0_WARN_RTOL`` (relative), a C0MismatchWarning is issued;
    the quadrature value is returned regardless.
    """
    if grid.dimension != gauge.dimension:
        raise ParameterError("grid and gauge dimensions differ")
    c0 = 1.0 / grid.integrate(gauge.evaluate(grid.nodes) ** (-gauge.dimension))
    if gauge.known_c0 is not None:
        rel = abs(c0 - gauge.known_c0) / gauge.known_c0
        if rel > C0_WARN_RTOL:
            warnings.warn(
                f"quadrature c0={c0:.8g} differs from analytic {gauge.known_c0:.8g} "
                f"(relative {rel:.2e}) on a {len(grid)}-node grid",
                C0MismatchWarning,
                stacklevel=2,
            )
    return c0
