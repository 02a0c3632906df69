"""Volume bounds and extremal metrics for conic 2-spheres.

Layers: ``core`` (divisors, closed-form bounds), ``extremal`` (glued
constant-curvature models), ``geometry`` (curvature/volume quadrature for
radial factors), ``levelset`` (gridded level-set machinery), ``lemma``
(the slope-constrained functional bound and its brute-force oracle) and
``cli`` (the command-line front end).
"""

from .core import (
    CASE_A_NEGATIVE,
    CASE_A_POSITIVE,
    CASE_A_ZERO,
    CRITICAL,
    SUBCRITICAL,
    SUPERCRITICAL,
    BoundsReport,
    CurvatureBand,
    Divisor,
    InfeasibleBandError,
    InvalidOrderError,
    UnsupportedDivisorError,
    classify,
    min_vol,
    pinching_check,
    volume_bounds,
    volume_quadratic_coefficients,
    weighted_euler,
)
from .extremal import (
    KIND_MINVOL,
    KIND_V0B,
    KIND_VAB,
    KIND_VMAX,
    KIND_VMIN,
    MODEL_KINDS,
    C11Report,
    GluingError,
    PiecewiseRadialMetric,
    RadialPiece,
    build_extremal,
    check_c11,
    football_mass,
    glue_radius,
    verify_model,
)
from .geometry import (
    ConeOrderFit,
    IntegralEstimate,
    RadialProfile,
    cone_order,
    curvature,
    gauss_bonnet,
    profile_of,
    volume,
)
from .lemma import SlopeProfile, bang_bang, brute_force_max, lemma_bound
from .levelset import (
    GriddedMetric,
    LevelSetSummary,
    b_prime_check,
    deficit_trend,
    grid_from_function,
    grid_from_metric,
    iso_deficit,
    key_inequality_check,
    load_grid,
    save_grid,
    slope_band_check,
    summarize,
)

__version__ = "0.1.0"
