"""Samplers for star-shaped distributions ``h(r(x)) dx``.

A draw is built from the independence decomposition ``x = rho * u / r(u)``
where ``u`` has density ``f(u) = c0 r(u)^{-p}`` on the sphere and ``rho``
has density proportional to ``h(rho) rho^{p-1}`` on (0, inf), independent
of ``u``.

Randomness comes from :func:`numpy.random.default_rng` (PCG64) seeded with
the caller's integer seed, so identical seeds reproduce identical arrays on
a given numpy version.  No attempt is made to match bit streams of other
generators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import EnvelopeError, NumericalError, ParameterError
from .geometry import (
    RadialGauge,
    SphereGrid,
    direction_density,
    make_sphere_grid,
    surface_area,
)

__all__ = [
    "RadialLaw",
    "DirectionalSample",
    "radial_rayleigh",
    "radial_exp_sqrt",
    "radial_from_density",
    "sample_direction",
    "sample_star",
    "sample_triangle_boundary",
    "sample_triangle_star",
    "sample_pgnorm_half",
    "sample_l_half_star",
    "TRIANGLE_VERTICES",
]

log = logging.getLogger(__name__)

ENVELOPE_INFLATION = 1.05
CDF_TABLE_SIZE = 2048

# P, Q, R
TRIANGLE_VERTICES = np.array([[2.0, -1.0], [-1.0, 2.0], [-1.0, -1.0]])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_n(n):
    if int(n) != n or n < 1:
        raise ParameterError(f"sample size must be a positive integer, got {n}")
    return int(n)


@dataclass(frozen=True)
class RadialLaw:
    """Law of the radial part ``rho = r(x)``.

    ``density_shape(rho)`` is proportional to ``h(rho) rho^{p-1}``;
    ``sampler(n, rng)`` returns ``n`` positive draws.
    """

    density_shape: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    sampler: Callable[[int, np.random.Generator], np.ndarray] = field(repr=False)
    label: str

    def sample(self, n: int, seed=None) -> np.ndarray:
        n = _check_n(n)
        return np.asarray(self.sampler(n, _rng(seed)), dtype=float)


@dataclass(frozen=True)
class DirectionalSample:
    """Unit vectors ``u_i = x_i / |x_i|``, stored as an ``(n, p)`` array."""

    directions: np.ndarray

    def __post_init__(self):
        d = np.array(self.directions, dtype=float, copy=True)
        if d.ndim != 2 or d.shape[1] < 2:
            raise ParameterError("directions must be an (n, p) array with p >= 2")
        if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > 1e-12):
            raise ParameterError("directions must be unit vectors")
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)

    @classmethod
    def from_points(cls, x) -> "DirectionalSample":
        """Normalize raw sample points; rejects the zero vector by row."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        norms = np.linalg.norm(x, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise ParameterError(f"zero vector at row {int(zero[0])}")
        u = x / norms[:, None]
        # a second pass brings the norm within a couple of ulps of one
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return cls(u)

    @property
    def source_count(self) -> int:
        return self.directions.shape[0]

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    def __len__(self):
        return self.source_count


def radial_rayleigh() -> RadialLaw:
    """Rayleigh law, ``rho^2 ~ chi^2(2)``: ``h(r) ~ exp(-r^2/2)`` in the plane."""

    def shape(r):
        r = np.asarray(r, dtype=float)
        return r * np.exp(-0.5 * r * r)

    def sampler(n, rng):
        # 1 - U lies in (0, 1], so the log is finite
        return np.sqrt(-2.0 * np.log1p(-rng.random(n)))

    return RadialLaw(shape, sampler, "rayleigh")


def radial_exp_sqrt(p: int = 2) -> RadialLaw:
    """Radial law for ``h(r) ~ exp(-2 r^{1/2})`` in dimension ``p``.

    With ``t = 2 rho^{1/2}`` the density of ``t`` is proportional to
    ``t^{2p-1} e^{-t}``, i.e. Gamma(2p, 1).
    """

    def shape(r):
        r = np.asarray(r, dtype=float)
        return r ** (p - 1) * np.exp(-2.0 * np.sqrt(r))

    def sampler(n, rng):
        t = rng.gamma(2.0 * p, 1.0, n)
        out = 0.25 * t * t
        while np.any(out <= 0):
            bad = out <= 0
            t = rng.gamma(2.0 * p, 1.0, int(bad.sum()))
            out[bad] = 0.25 * t * t
        return out

    return RadialLaw(shape, sampler, f"exp-sqrt(p={p})")


def radial_from_density(
    density_shape: Callable[[np.ndarray], np.ndarray],
    label: str = "tabulated",
    r_max: Optional[float] = None,
    tail_mass: float = 1e-12,
) -> RadialLaw:
    """Radial law from an unnormalized density ``h(r) r^{p-1}`` on (0, inf).

    Draws use inverse-CDF sampling: the CDF is tabulated on 2048 points of
    ``[0, r_max]``, interpolated monotonically (PCHIP), and inverted by
    vectorized bisection.  If ``r_max`` is omitted it is grown by doubling
    until the mass beyond it is below ``tail_mass`` of the total.
    """
    total, _ = integrate.quad(density_shape, 0.0, np.inf, limit=200)
    if not (np.isfinite(total) and total > 0):
        raise NumericalError(f"radial density integrates to {total}; must be finite and positive")
    if r_max is None:
        r_max = 1.0
        while True:
            tail, _ = integrate.quad(density_shape, r_max, np.inf, limit=200)
            if tail <= tail_mass * total:
                break
            r_max *= 2.0
            if r_max > 1e12:
                raise NumericalError("could not bracket the radial tail")
    edges = np.linspace(0.0, r_max, CDF_TABLE_SIZE)
    pieces = [integrate.quad(density_shape, a, b)[0] for a, b in zip(edges[:-1], edges[1:])]
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    cdf /= cdf[-1]
    # drop flat stretches so the interpolant is strictly increasing
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    r_tab, c_tab = edges[keep], cdf[keep]
    cdf_interp = PchipInterpolator(r_tab, c_tab, extrapolate=False)

    def sampler(n, rng):
        target = rng.random(n)
        # bracket by table lookup, then bisect on the interpolant
        idx = np.clip(np.searchsorted(c_tab, target, side="right"), 1, len(c_tab) - 1)
        lo, hi = r_tab[idx - 1].copy(), r_tab[idx].copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = cdf_interp(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        # a draw of exactly 0 needs target == 0; push it to the first node
        return np.where(out > 0, out, r_tab[1] * 1e-6)

    return RadialLaw(density_shape, sampler, label)


def sample_direction(
    gauge: RadialGauge,
    c0: float,
    grid: Optional[SphereGrid],
    n: int,
    seed=None,
) -> DirectionalSample:
    """Draw ``n`` directions from ``f(u) = c0 r(u)^{-p}`` by rejection.

    The proposal is uniform on the sphere and the envelope is 1.05 times
    the largest ratio ``f / uniform`` over ``grid``.  If a proposal ever
    exceeds the envelope, the envelope is enlarged to 1.05 times the
    offending ratio and sampling restarts from scratch with the same
    generator, which keeps the accepted draws exact.
    """
    n = _check_n(n)
    p = gauge.dimension
    if grid is None:
        grid = make_sphere_grid(p, 720 if p == 2 else 4000, seed=0)
    if grid.dimension != p:
        raise ParameterError("grid and gauge dimensions differ")
    rng = _rng(seed)
    uniform = 1.0 / surface_area(p)
    bound = ENVELOPE_INFLATION * float(np.max(direction_density(gauge, c0, grid.nodes))) / uniform

    for _attempt in range(50):
        out = np.empty((n, p))
        filled = 0
        violated = None
        while filled < n:
            m = max(64, int(1.2 * (n - filled) * bound))
            g = rng.standard_normal((m, p))
            u = g / np.linalg.norm(g, axis=1, keepdims=True)
            ratio = direction_density(gauge, c0, u) / uniform
            if np.any(ratio > bound):
                violated = float(ratio.max())
                break
            acc = u[rng.random(m) * bound < ratio]
            take = min(n - filled, acc.shape[0])
            out[filled:filled + take] = acc[:take]
            filled += take
        if violated is None:
            return DirectionalSample.from_points(out)
        log.warning(
            "rejection envelope %.6g undershoots f/uniform = %.6g for gauge %s; restarting",
            bound, violated, gauge.label,
        )
        bound = ENVELOPE_INFLATION * violated
    raise EnvelopeError(f"rejection envelope kept undershooting for gauge {gauge.label}")


def sample_star(
    gauge: RadialGauge,
    c0: float,
    radial: RadialLaw,
    n: int,
    seed=None,
    grid: Optional[SphereGrid] = None,
) -> np.ndarray:
    """``n`` i.i.d. points from ``h(r(x)) dx`` as ``rho_i u_i / r(u_i)``."""
    n = _check_n(n)
    rng = _rng(seed)
    u = sample_direction(gauge, c0, grid, n, rng).directions
    rho = radial.sample(n, rng)
    if np.any(rho <= 0):
        raise NumericalError(f"radial law {radial.label} produced a nonpositive draw")
    return (rho / gauge.evaluate(u))[:, None] * u


def sample_triangle_boundary(n: int, seed=None) -> np.ndarray:
    """Points on the triangle ``Z`` with line-element densities
    1/(9 sqrt 2), 1/9, 1/9 on sides PQ, QR, RP.

    Each side carries total mass 1/3, so a side is picked uniformly and a
    point is then placed uniformly along it.
    """
    n = _check_n(n)
    rng = _rng(seed)
    side = rng.integers(0, 3, n)
    t = rng.random(n)
    start = TRIANGLE_VERTICES[side]
    end = TRIANGLE_VERTICES[(side + 1) % 3]
    return start + t[:, None] * (end - start)


def sample_triangle_star(n: int, seed=None) -> np.ndarray:
    """``n`` draws from ``(1/9) exp(-r(x)^2 / 2) dx`` with the triangle gauge,
    as Rayleigh radius times a boundary point."""
    n = _check_n(n)
    rng = _rng(seed)
    z = sample_triangle_boundary(n, rng)
    rho = radial_rayleigh().sample(n, rng)
    return rho[:, None] * z


def sample_pgnorm_half(n: int, seed=None) -> np.ndarray:
    """``n`` draws from the density ``exp(-2 |x|^{1/2})`` on the real line.

    ``|x| = T^2 / 4`` with ``T ~ Gamma(2, 1)``, and an independent fair sign.
    """
    n = _check_n(n)
    rng = _rng(seed)
    t = rng.gamma(2.0, 1.0, n)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * 0.25 * t * t


def sample_l_half_star(n: int, seed=None) -> np.ndarray:
    """``n`` draws from ``exp(-2 r(x)^{1/2}) dx`` for the l_{1/2} gauge in the plane.

    Coordinates are independent ``sample_pgnorm_half`` draws.  A zero
    vector (a probability-zero event) is redrawn.
    """
    n = _check_n(n)
    rng = _rng(seed)
    x = sample_pgnorm_half(2 * n, rng).reshape(n, 2)
    zero = np.all(x == 0.0, axis=1)
    while np.any(zero):
        log.warning("redrawing %d zero vectors", int(zero.sum()))
        x[zero] = sample_pgnorm_half(2 * int(zero.sum()), rng).reshape(-1, 2)
        zero = np.all(x == 0.0, axis=1)
    return x
