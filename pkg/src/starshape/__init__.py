"""Shape estimation for star-shaped distributions by directional kernel
density estimation, with Hausdorff-distance evaluation."""

from .errors import EnvelopeError, NumericalError, ParameterError
from .geometry import (
    C0MismatchWarning,
    RadialGauge,
    SphereGrid,
    StarBoundary,
    boundary_radius,
    direction_density,
    gauge_ellipse,
    gauge_lq_sphere,
    gauge_triangle,
    make_sphere_grid,
    normalization_constant,
    surface_area,
    true_boundary,
)
from .kde import (
    BandwidthSchedule,
    BandwidthSelectionError,
    ConditionReport,
    KdeModel,
    KernelFn,
    check_brz_conditions,
    constant_schedule,
    cross_validate_bandwidth,
    kde_evaluate,
    kde_evaluate_grid,
    kde_fit,
    kernel_uniform,
    kernel_von_mises,
    normalizer_C,
    normalizer_limit,
    power_schedule,
)
from .metrics import (
    HausdorffReport,
    hausdorff_boundaries,
    hausdorff_star_bodies,
    sup_root_gap,
    verify_hausdorff_bound,
)
from .sampling import (
    DirectionalSample,
    RadialLaw,
    radial_exp_sqrt,
    radial_from_density,
    radial_rayleigh,
    sample_direction,
    sample_l_half_star,
    sample_pgnorm_half,
    sample_star,
    sample_triangle_boundary,
    sample_triangle_star,
)
from .shape import (
    ShapeEstimate,
    estimate_shape,
    estimate_shape_l_half,
    estimate_shape_normalized,
    estimate_shape_unit_volume,
    scale_boundary,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
