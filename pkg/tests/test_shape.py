import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starshape import (
    DirectionalSample,
    ParameterError,
    estimate_shape,
    estimate_shape_l_half,
    estimate_shape_normalized,
    estimate_shape_unit_volume,
    gauge_lq_sphere,
    gauge_triangle,
    hausdorff_boundaries,
    kde_evaluate_grid,
    kde_fit,
    kernel_uniform,
    kernel_von_mises,
    make_sphere_grid,
    sample_l_half_star,
    sample_triangle_star,
    scale_boundary,
    true_boundary,
)

GRID = make_sphere_grid(2, 720)


def fitted(x, eta=0.2, kernel=kernel_von_mises):
    return kde_fit(DirectionalSample.from_points(x), kernel(), eta)


class TestEstimateShape:
    def test_triangle_factor_three(self):
        m = fitted(sample_triangle_star(1000, 0))
        est = estimate_shape(m, GRID, 1 / 9)
        fh = kde_evaluate_grid(m, GRID)
        np.testing.assert_allclose(est.boundary.radii, 3 * np.sqrt(fh), rtol=1e-14)
        assert est.metadata == {"c0_used": 1 / 9, "convention": "known-c0", "kernel": m.kernel.label,
                                "eta": 0.2, "n": 1000}

    def test_l_half_multiplier(self):
        m = fitted(sample_l_half_star(1000, 1), 0.1)
        est = estimate_shape_l_half(m, GRID)
        fh = kde_evaluate_grid(m, GRID)
        np.testing.assert_allclose(est.boundary.radii, 2 / math.sqrt(3) * np.sqrt(fh), rtol=1e-14)
        np.testing.assert_array_equal(est.boundary.radii, estimate_shape(m, GRID, 0.75).boundary.radii)

    def test_l_half_planar_only(self):
        m = kde_fit(DirectionalSample(np.eye(3)), kernel_von_mises(), 0.5)
        with pytest.raises(ParameterError):
            estimate_shape_l_half(m, make_sphere_grid(3, 100))

    def test_uniform_circle(self):
        theta = np.random.default_rng(2).uniform(0, 2 * np.pi, 10 ** 4)
        m = fitted(np.column_stack([np.cos(theta), np.sin(theta)]), 0.2)
        est = estimate_shape(m, GRID, 1 / (2 * np.pi))
        assert np.max(np.abs(est.boundary.radii - 1.0)) < 0.05

    def test_single_bump(self):
        m = kde_fit(DirectionalSample(np.array([[1.0, 0.0]])), kernel_uniform(), 0.3)
        est = estimate_shape(m, GRID, 1 / (2 * np.pi))
        r = est.boundary.radii
        assert r[0] == r.max() > 0
        assert r[360] == 0.0  # antipode

    def test_normalized_convention(self):
        m = fitted(sample_triangle_star(200, 3))
        est = estimate_shape_normalized(m, GRID)
        assert est.c0_used == 1.0 and est.convention == "normalized"

    def test_unit_volume(self):
        m = fitted(sample_triangle_star(500, 5), 0.3)
        est = estimate_shape_unit_volume(m, GRID)
        assert est.convention == "unit-volume-rescaled" and est.c0_used == 0.5
        # area of the star body: (1/2) sum r^2 * (2 pi / N)
        area = 0.5 * np.sum(est.boundary.radii ** 2) * 2 * np.pi / len(GRID)
        assert area == pytest.approx(1.0, abs=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(c0=st.floats(1e-3, 10.0), lam=st.floats(0.05, 20.0))
    def test_scaling_consistency(self, c0, lam):
        m = fitted(sample_triangle_star(100, 4))
        a = estimate_shape(m, GRID, c0).boundary.radii
        b = estimate_shape(m, GRID, c0 / lam).boundary.radii
        np.testing.assert_allclose(b, lam ** 0.5 * a, rtol=1e-12)

    def test_rejects(self):
        m = fitted(sample_triangle_star(100, 4))
        with pytest.raises(ParameterError):
            estimate_shape(m, GRID, 0.0)
        with pytest.raises(ParameterError):
            estimate_shape(m, make_sphere_grid(3, 100), 1.0)
        with pytest.raises(ParameterError):
            estimate_shape(m, GRID, 1.0, convention="guess")

    def test_trend_triangle(self):
        truth = true_boundary(gauge_triangle(), GRID)
        med = []
        for n in (100, 1000, 10000):
            d = [hausdorff_boundaries(estimate_shape(fitted(sample_triangle_star(n, [s, n]), n ** (-1 / 5)),
                                                     GRID, 1 / 9).boundary, truth).distance
                 for s in range(20)]
            med.append(np.median(d))
        assert med[0] > med[1] > med[2]

    def test_trend_l_half(self):
        truth = true_boundary(gauge_lq_sphere(0.5), GRID)
        med = []
        for n in (100, 1000, 10000):
            d = [hausdorff_boundaries(estimate_shape_l_half(fitted(sample_l_half_star(n, [s, n]),
                                                                   0.5 * n ** (-1 / 5)), GRID).boundary,
                                      truth).distance
                 for s in range(20)]
            med.append(np.median(d))
        assert med[0] > med[1] > med[2]


class TestScaleBoundary:
    def test_identity_and_zero(self):
        b = true_boundary(gauge_triangle(), GRID)
        np.testing.assert_array_equal(scale_boundary(b, 1.0).radii, b.radii)
        assert np.all(scale_boundary(b, 0.0).radii == 0.0)

    def test_ten_times_l_half(self):
        b = true_boundary(gauge_lq_sphere(0.5), GRID)
        big = scale_boundary(b, 10.0)
        np.testing.assert_allclose(gauge_lq_sphere(0.5)(big.points), 10.0, rtol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(c1=st.floats(0, 50), c2=st.floats(0, 50))
    def test_nesting(self, c1, c2):
        lo, hi = sorted((c1, c2))
        b = true_boundary(gauge_triangle(), make_sphere_grid(2, 64))
        assert np.all(scale_boundary(b, lo).radii <= scale_boundary(b, hi).radii)

    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            scale_boundary(true_boundary(gauge_triangle(), GRID), -1.0)
