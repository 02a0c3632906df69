"""Numerical differential geometry of radial conformal factors.

Everything runs in the log-radius chart xi = ln rho:

    Delta u   = e^{-2 xi} u''(xi)         (radial Laplacian)
    K        = -e^{-2 xi - 2 u} u''(xi)
    Volume   = 2 pi  Int e^{2u + 2 xi} d xi
    Int K dv = 2 pi  Int K e^{2u + 2 xi} d xi

Cone asymptotics are affine in xi (slope alpha at the origin, -(beta + 2)
at infinity), so the windows [-40, 40] used by the integrators can be
completed by exact exponential tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

TWO_PI = 2.0 * math.pi

# second-derivative round-off grows like eps |u| / h^2 and the curvature
# multiplies it by e^{-2xi-2u} (up to ~20 on model tails); one Richardson
# level makes truncation O(h^4), so a step this large still leaves it
# negligible while keeping round-off near 1e-9
FD_STEP = 1e-3
FIT_WINDOW_ORIGIN = (-20.0, -14.0)
FIT_WINDOW_INFINITY = (14.0, 20.0)


@dataclass
class RadialProfile:
    """A radial conformal exponent u(xi) with derivative evaluators.

    ``du``/``d2u`` default to centered finite differences (step ``fd_step``
    with one Richardson level for the second derivative).  ``breakpoints``
    lists xi values where u is only C^1, so integrators can split there.
    """

    u: object
    du: object = None
    d2u: object = None
    fd_step: float = FD_STEP
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.du is None:
            h = self.fd_step
            f = self.u
            self.du = lambda x: (f(np.asarray(x) + h) - f(np.asarray(x) - h)) / (2.0 * h)
        if self.d2u is None:
            self.d2u = lambda x: _fd2_richardson(self.u, x, self.fd_step)


def _fd2(f, x, h):
    x = np.asarray(x, dtype=float)
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def _fd2_richardson(f, x, h):
    """Second derivative, centered differences at h and h/2 combined."""
    coarse = _fd2(f, x, h)
    fine = _fd2(f, x, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def profile_of(metric) -> RadialProfile:
    """RadialProfile view of a piecewise metric (closed-form derivatives)."""
    breaks = ()
    r = getattr(metric, "glue_radius", None)
    if r is not None and 0.0 < r < math.inf and not metric.degenerate:
        breaks = (math.log(r),)
    return RadialProfile(metric.u, metric.du, metric.d2u, breakpoints=breaks)


def curvature(profile: RadialProfile, xi):
    """Gaussian curvature at log-radius xi: K = -e^{-2xi-2u} u''."""
    xi = np.asarray(xi, dtype=float)
    return -np.asarray(profile.d2u(xi)) * np.exp(-2.0 * xi - 2.0 * np.asarray(profile.u(xi)))


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error: float


def _tail_slopes(profile: RadialProfile, xi_min: float, xi_max: float):
    s_lo = float(profile.du(xi_min))
    s_hi = float(profile.du(xi_max))
    return s_lo, s_hi


def _integrate(profile: RadialProfile, weight, xi_min: float, xi_max: float,
               tail_weight, tails=(True, True)) -> IntegralEstimate:
    """2 pi Int weight(xi) e^{2u+2xi} over the window plus exponential
    tails (each side optional for partial integrals).

    ``weight`` maps xi -> factor under the integral (1 for volume, K for
    total curvature); ``tail_weight`` gives its constant tail values.
    """
    def integrand(x):
        return TWO_PI * weight(x) * math.exp(2.0 * float(profile.u(x)) + 2.0 * x)

    points = [p for p in profile.breakpoints if xi_min < p < xi_max]
    value, err = quad(integrand, xi_min, xi_max, points=points or None,
                      limit=400, epsabs=1e-12, epsrel=1e-11)

    s_lo, s_hi = _tail_slopes(profile, xi_min, xi_max)
    w_lo, w_hi = tail_weight
    tail = tail_err = 0.0
    if tails[0]:
        rate_lo = 2.0 * s_lo + 2.0   # integrand ~ e^{rate_lo * xi} at -inf
        if rate_lo <= 0.0:
            raise ValueError(f"non-integrable behaviour at the origin "
                             f"(local slope {s_lo} <= -1)")
        g_lo = TWO_PI * math.exp(2.0 * float(profile.u(xi_min)) + 2.0 * xi_min)
        tail += w_lo * g_lo / rate_lo
        tail_err += abs(w_lo * g_lo / rate_lo)
    if tails[1]:
        rate_hi = 2.0 * s_hi + 2.0   # ~ e^{rate_hi * xi} at +inf, rate_hi < 0
        if rate_hi >= 0.0:
            raise ValueError(f"non-integrable behaviour at infinity "
                             f"(local slope {s_hi} >= -1)")
        g_hi = TWO_PI * math.exp(2.0 * float(profile.u(xi_max)) + 2.0 * xi_max)
        tail += w_hi * g_hi / (-rate_hi)
        tail_err += abs(w_hi * g_hi / rate_hi)
    # the affine-tail model is exact up to the next-order decay of u' --
    # treat the whole tail as its own error bound
    return IntegralEstimate(value + tail, err + tail_err)


def volume(profile: RadialProfile, xi_min: float = -40.0,
           xi_max: float = 40.0, tails=(True, True)) -> IntegralEstimate:
    """Volume 2 pi Int e^{2u+2xi} d xi with analytic tail completion.

    Pass ``tails=(True, False)`` for the partial volume up to xi_max (the
    superlevel-set volume of a monotone radial factor)."""
    return _integrate(profile, lambda x: 1.0, xi_min, xi_max, (1.0, 1.0),
                      tails)


def gauss_bonnet(profile: RadialProfile, xi_min: float = -40.0,
                 xi_max: float = 40.0, tails=(True, True)) -> IntegralEstimate:
    """Total curvature Int K e^{2u}; equals 2 pi (2 + degree) for a metric
    representing the divisor."""
    k = lambda x: float(curvature(profile, x))
    k_lo = k(xi_min)
    k_hi = k(xi_max)
    return _integrate(profile, k, xi_min, xi_max, (k_lo, k_hi), tails)


@dataclass(frozen=True)
class ConeOrderFit:
    """Least-squares cone order with a split-window consistency check."""

    order: float
    slope: float
    drift: float
    flagged: bool


def cone_order(profile: RadialProfile, end: str = "origin",
               window: tuple | None = None, samples: int = 64,
               drift_tol: float = 1e-3) -> ConeOrderFit:
    """Cone order from the asymptotic log-slope of u.

    The origin end fits u ~ alpha * xi; the infinity end fits
    u ~ -(beta + 2) * xi and converts back to beta.  The fit is flagged if
    two disjoint half-windows disagree by more than ``drift_tol``.
    """
    if end == "origin":
        lo, hi = window or FIT_WINDOW_ORIGIN
    elif end == "infinity":
        lo, hi = window or FIT_WINDOW_INFINITY
    else:
        raise ValueError("end must be 'origin' or 'infinity'")

    def fit(w_lo, w_hi):
        xs = np.linspace(w_lo, w_hi, samples)
        ys = np.asarray(profile.u(xs), dtype=float)
        slope, _ = np.polyfit(xs, ys, 1)
        return float(slope)

    mid = 0.5 * (lo + hi)
    s1 = fit(lo, mid)
    s2 = fit(mid, hi)
    slope = fit(lo, hi)
    drift = abs(s1 - s2)
    order = slope if end == "origin" else -(slope + 2.0)
    return ConeOrderFit(order, slope, drift, drift > drift_tol)
