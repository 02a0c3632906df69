"""Divisor bookkeeping and closed-form volume bounds for conic 2-spheres.

A conic sphere is described here by its divisor (the list of cone orders,
each in (-1, 0]) and a curvature band [a, b] constraining the Gaussian
curvature.  The two derived divisor invariants used throughout are

    beta  = smallest cone order (the order placed at infinity),
    alpha = degree - beta       (the total order of the remaining points),

and the weighted Euler characteristic chi = 2*pi*(2 + degree).  All volumes
are areas of the plane metric e^{2u} |dz|^2; everything is plain float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"

CASE_A_NEGATIVE = "a_negative"
CASE_A_ZERO = "a_zero"
CASE_A_POSITIVE = "a_positive"


class InvalidOrderError(ValueError):
    """A cone order outside (-1, 0]; positive orders get this distinct type."""


class UnsupportedDivisorError(ValueError):
    """Divisor class outside the scope of the volume bounds (subcritical)."""


class InfeasibleBandError(ValueError):
    """A model was requested for a band that admits no metric (pinching)."""


@dataclass(frozen=True)
class Divisor:
    """A formal sum of cone orders at marked points of the 2-sphere.

    ``entries`` is a tuple of (order, label) pairs.  Orders must lie in
    (-1, 0]; an empty divisor describes the smooth sphere.
    """

    entries: tuple = ()

    def __post_init__(self):
        for order, _label in self.entries:
            if order > 0.0:
                raise InvalidOrderError(
                    f"cone order {order} is positive; orders must lie in (-1, 0]")
            if order <= -1.0:
                raise ValueError(
                    f"cone order {order} is <= -1; orders must lie in (-1, 0]")

    @classmethod
    def from_orders(cls, orders, labels=None) -> "Divisor":
        orders = list(orders)
        if labels is None:
            labels = [f"p{i + 1}" for i in range(len(orders))]
        if len(labels) != len(orders):
            raise ValueError("labels and orders must have equal length")
        return cls(tuple((float(o), str(l)) for o, l in zip(orders, labels)))

    @property
    def orders(self) -> tuple:
        return tuple(o for o, _ in self.entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> float:
        """The degree: the sum of all orders (non-positive)."""
        return math.fsum(self.orders) if self.entries else 0.0

    @property
    def beta(self) -> float:
        """Smallest order; 0 for the empty divisor."""
        return min(self.orders) if self.entries else 0.0

    @property
    def alpha(self) -> float:
        """degree - beta: the combined order of all but the smallest point."""
        return self.degree - self.beta


@dataclass(frozen=True)
class CurvatureBand:
    """Bounds a <= K <= b on the Gaussian curvature.  b must be positive."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a <= self.b):
            raise ValueError(f"band requires a <= b, got a={self.a}, b={self.b}")
        if not self.b > 0.0:
            raise ValueError(
                f"band requires b > 0 (total curvature of a conic sphere is "
                f"positive), got b={self.b}")


@dataclass(frozen=True)
class BoundsReport:
    """Result of :func:`volume_bounds`.

    ``v_upper`` is present only for positive lower curvature bounds; when a
    positive band violates the pinching condition the report carries
    ``feasible=False`` and omits both bounds, so sweeps can chart the
    feasibility boundary instead of aborting.
    """

    case: str
    v_lower: float | None
    v_upper: float | None
    chi: float
    feasible: bool
    alpha: float
    beta: float
    a: float
    b: float
    degenerate_football: bool = False

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "v_lower": self.v_lower,
            "v_upper": self.v_upper,
            "chi": self.chi,
            "feasible": self.feasible,
            "alpha": self.alpha,
            "beta": self.beta,
            "a": self.a,
            "b": self.b,
            "degenerate_football": self.degenerate_football,
        }


def classify(divisor: Divisor) -> str:
    """Troyanov class of the divisor: compares degree with twice the
    smallest order.  Ties are critical."""
    d = divisor.degree
    floor = 2.0 * divisor.beta
    if d < floor:
        return SUBCRITICAL
    if d == floor:
        return CRITICAL
    return SUPERCRITICAL


def weighted_euler(divisor: Divisor) -> float:
    """Total curvature 2*pi*(2 + degree) of any metric representing the
    divisor on the sphere."""
    return TWO_PI * (2.0 + divisor.degree)


def _check_scope(divisor: Divisor) -> bool:
    """Reject subcritical divisors; return True when the divisor is the
    degenerate constant-curvature football case (critical with < 3 points),
    which is accepted as a formula limit but flagged."""
    cls = classify(divisor)
    if cls == SUBCRITICAL:
        raise UnsupportedDivisorError(
            "subcritical divisors admit constant-curvature metrics and are "
            "outside the scope of these bounds")
    return cls == CRITICAL and divisor.n < 3


def pinching_feasible(alpha: float, beta: float, a: float, b: float) -> bool:
    """a/b <= (1+beta)^2/(1+alpha)^2, written multiplication-only so the
    quadratic-discriminant test agrees bit for bit."""
    return a * (1.0 + alpha) ** 2 <= b * (1.0 + beta) ** 2


def pinching_check(divisor: Divisor, band: CurvatureBand) -> bool:
    """Necessary pinching condition for 0 < a <= K <= b on a conic sphere.

    Equivalent to the volume quadratic having a real root; rejects a <= 0.
    """
    if band.a <= 0.0:
        raise ValueError("pinching condition applies only when a > 0")
    _check_scope(divisor)
    return pinching_feasible(divisor.alpha, divisor.beta, band.a, band.b)


def volume_quadratic_coefficients(divisor: Divisor, band: CurvatureBand):
    """Coefficients (c2, c1, c0) of the quadratic a*b*V^2 + c1*V + c0 whose
    non-positivity region is exactly the admissible volume range."""
    a, b = band.a, band.b
    aa, bb = 1.0 + divisor.alpha, 1.0 + divisor.beta
    chi = weighted_euler(divisor)
    return a * b, -4.0 * math.pi * (a * aa + b * bb), chi * chi


def _sqrt_term(alpha: float, beta: float, a: float, b: float) -> float:
    aa, bb = 1.0 + alpha, 1.0 + beta
    disc = (b - a) * (b * bb * bb - a * aa * aa)
    # guarded by the pinching test; clamp the rounding of exact equality
    return math.sqrt(max(disc, 0.0))


def volume_bounds(divisor: Divisor, band: CurvatureBand) -> BoundsReport:
    """Sharp volume bounds for a conic sphere with curvature in [a, b].

    a = 0 gives only a lower bound; a < 0 likewise; a > 0 pins the volume
    between two bounds, real exactly when the pinching condition holds.
    The (v_lower, v_upper) pair coincides with the real roots of the volume
    quadratic (see :func:`volume_quadratic_coefficients`).
    """
    degenerate = _check_scope(divisor)
    alpha, beta = divisor.alpha, divisor.beta
    a, b = band.a, band.b
    aa, bb = 1.0 + alpha, 1.0 + beta
    chi = weighted_euler(divisor)

    if a == 0.0:
        v_lower = math.pi * (2.0 + divisor.degree) ** 2 / (b * bb)
        return BoundsReport(CASE_A_ZERO, v_lower, None, chi, True,
                            alpha, beta, a, b, degenerate)

    if a < 0.0:
        v_lower = TWO_PI * (bb / a + aa / b - _sqrt_term(alpha, beta, a, b) / (a * b))
        return BoundsReport(CASE_A_NEGATIVE, v_lower, None, chi, True,
                            alpha, beta, a, b, degenerate)

    if not pinching_feasible(alpha, beta, a, b):
        return BoundsReport(CASE_A_POSITIVE, None, None, chi, False,
                            alpha, beta, a, b, degenerate)
    # stable rearrangement of 2 pi [bb/a + aa/b -+ root/(a b)]: the smaller
    # root comes from chi^2 / (larger root scaled), avoiding the a -> 0+
    # cancellation
    root = _sqrt_term(alpha, beta, a, b)
    q = TWO_PI * (a * aa + b * bb + root)
    v_lower = chi * chi / q
    v_upper = q / (a * b)
    return BoundsReport(CASE_A_POSITIVE, v_lower, v_upper, chi, True,
                        alpha, beta, a, b, degenerate)


def min_vol(divisor: Divisor) -> float:
    """Smallest volume of a metric representing the divisor with |K| <= 1.

    Equals the lower volume bound for the band [-1, 1]; kept as its own
    closed form 2*pi*(alpha - beta + sqrt(2(1+alpha)^2 + 2(1+beta)^2)).
    """
    _check_scope(divisor)
    alpha, beta = divisor.alpha, divisor.beta
    aa, bb = 1.0 + alpha, 1.0 + beta
    return TWO_PI * (alpha - beta + math.sqrt(2.0 * aa * aa + 2.0 * bb * bb))
