"""Extremal glued-football metrics as piecewise closed-form radial factors.

Each extremal model is a rotationally symmetric conformal factor e^{2u}
assembled from two constant-curvature pieces joined at a gluing radius r:
an inner football cap of curvature b carrying the cone order alpha at the
origin, and an outer cap of curvature a (spherical, flat, or hyperbolic by
the sign of a) carrying the order beta at infinity.  The radius solves a
mass equation; the outer piece's free gauge constant is then fixed by
continuity of e^{2u}, after which the factor is automatically C^1 and the
total volume lands exactly on the corresponding sharp bound.

All radial evaluation happens in log-radius xi = ln rho, where every piece
is an affine function plus a softplus-type correction, so cone tips neither
overflow nor underflow.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    CurvatureBand,
    Divisor,
    InfeasibleBandError,
    min_vol,
    volume_bounds,
    weighted_euler,
)

FOOTBALL_CAP = "football_cap"
HYPERBOLIC_CAP = "hyperbolic_cap"
FLAT_TAIL = "flat_tail"
INVERTED_FOOTBALL_CAP = "inverted_football_cap"

KIND_VAB = "Vab"
KIND_V0B = "V0b"
KIND_VMIN = "Vmin"
KIND_VMAX = "Vmax"
KIND_MINVOL = "MinVol"
MODEL_KINDS = (KIND_VAB, KIND_V0B, KIND_VMIN, KIND_VMAX, KIND_MINVOL)


class GluingError(ValueError):
    """The (divisor, band, volume) triple admits no consistent gluing."""


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    out = np.empty_like(np.asarray(x, dtype=float))
    x = np.asarray(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class RadialPiece:
    """One constant-curvature piece of a radial conformal factor.

    ``scale`` multiplies the unit-curvature base factor and fixes the
    curvature (K = +-1/scale for the spherical/hyperbolic families, 0 for
    the flat tail).  ``gauge`` is the latitude parameter of the base family
    (the residual z -> lambda*z coordinate freedom); it moves the gluing
    latitude without touching the curvature.  ``cone_order`` is the order
    at the piece's singular end (origin for the football cap, infinity for
    the outer kinds).
    """

    kind: str
    curvature: float
    cone_order: float
    scale: float
    gauge: float = 1.0
    r_in: float = 0.0
    r_out: float = math.inf

    def __post_init__(self):
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")
        if self.kind not in (FOOTBALL_CAP, HYPERBOLIC_CAP, FLAT_TAIL,
                             INVERTED_FOOTBALL_CAP):
            raise ValueError(f"unknown piece kind {self.kind!r}")

    @property
    def _mu(self) -> float:
        return 2.0 + 2.0 * self.cone_order

    def log_factor(self, xi):
        """log of e^{2u} at log-radius xi (vectorized)."""
        xi = np.asarray(xi, dtype=float)
        o, mu, c = self.cone_order, self._mu, self.gauge
        lead = math.log(self.scale)
        if self.kind == FLAT_TAIL:
            return lead - (4.0 + 2.0 * o) * xi
        lead += math.log(4.0 * (1.0 + o) ** 2 * c)
        if self.kind == FOOTBALL_CAP:
            return lead + 2.0 * o * xi - 2.0 * _softplus(math.log(c) + mu * xi)
        if self.kind == INVERTED_FOOTBALL_CAP:
            return lead - (4.0 + 2.0 * o) * xi - 2.0 * _softplus(math.log(c) - mu * xi)
        # hyperbolic: valid only where gauge * rho^-mu < 1
        q = np.exp(math.log(c) - mu * xi)
        return lead - (4.0 + 2.0 * o) * xi - 2.0 * np.log1p(-q)

    def u(self, xi):
        return 0.5 * self.log_factor(xi)

    def du(self, xi):
        xi = np.asarray(xi, dtype=float)
        o, mu, c = self.cone_order, self._mu, self.gauge
        if self.kind == FLAT_TAIL:
            return np.full_like(xi, -(2.0 + o))
        if self.kind == FOOTBALL_CAP:
            return o - mu * _sigmoid(math.log(c) + mu * xi)
        if self.kind == INVERTED_FOOTBALL_CAP:
            return -(2.0 + o) + mu * _sigmoid(math.log(c) - mu * xi)
        q = np.exp(math.log(c) - mu * xi)
        return -(2.0 + o) - mu * q / (1.0 - q)

    def d2u(self, xi):
        xi = np.asarray(xi, dtype=float)
        o, mu, c = self.cone_order, self._mu, self.gauge
        if self.kind == FLAT_TAIL:
            return np.zeros_like(xi)
        if self.kind == FOOTBALL_CAP:
            s = _sigmoid(math.log(c) + mu * xi)
            return -mu * mu * s * (1.0 - s)
        if self.kind == INVERTED_FOOTBALL_CAP:
            s = _sigmoid(math.log(c) - mu * xi)
            return -mu * mu * s * (1.0 - s)
        q = np.exp(math.log(c) - mu * xi)
        return mu * mu * q / (1.0 - q) ** 2

    def e2u(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.exp(self.log_factor(np.log(rho)))

    def cap_volume(self, r: float) -> float:
        """Closed-form volume of the piece's own cap bounded by radius r:
        [0, r] for the football cap, [r, inf) for the outer kinds."""
        o, mu, c, s = self.cone_order, self._mu, self.gauge, self.scale
        opo = 1.0 + o
        if self.kind == FOOTBALL_CAP:
            if math.isinf(r):
                return s * 4.0 * math.pi * opo
            w = c * r ** mu
            return s * 4.0 * math.pi * opo * w / (1.0 + w)
        if self.kind == INVERTED_FOOTBALL_CAP:
            if r == 0.0:
                return s * 4.0 * math.pi * opo
            w = c * r ** (-mu)
            return s * 4.0 * math.pi * opo * w / (1.0 + w)
        if r == 0.0:
            raise ValueError("outer cap volume needs r > 0")
        w = c * r ** (-mu)
        if self.kind == HYPERBOLIC_CAP:
            if w >= 1.0:
                raise GluingError(
                    f"hyperbolic piece invalid at r={r}: singular latitude "
                    f"{c ** (1.0 / mu)} is not below the gluing radius")
            return s * 4.0 * math.pi * opo * w / (1.0 - w)
        return s * TWO_PI * r ** (-mu) / mu

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "curvature": self.curvature,
            "cone_order": self.cone_order,
            "scale": self.scale,
            "gauge": self.gauge,
            "r_in": self.r_in,
            "r_out": None if math.isinf(self.r_out) else self.r_out,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadialPiece":
        r_out = d["r_out"]
        return cls(d["kind"], d["curvature"], d["cone_order"], d["scale"],
                   d["gauge"], d["r_in"], math.inf if r_out is None else r_out)


@dataclass(frozen=True)
class PiecewiseRadialMetric:
    """A glued extremal conformal factor with its construction data."""

    kind: str
    alpha: float
    beta: float
    a: float
    b: float
    glue_radius: float
    pieces: tuple
    target_volume: float
    chi: float

    @property
    def degenerate(self) -> bool:
        return len(self.pieces) == 1

    def _select(self, xi, method: str):
        xi = np.asarray(xi, dtype=float)
        if self.degenerate:
            return getattr(self.pieces[0], method)(xi)
        log_r = math.log(self.glue_radius)
        inner, outer = self.pieces
        out = np.where(xi <= log_r,
                       getattr(inner, method)(np.minimum(xi, log_r)),
                       getattr(outer, method)(np.maximum(xi, log_r)))
        return out

    def u(self, xi):
        return self._select(xi, "u")

    def du(self, xi):
        return self._select(xi, "du")

    def d2u(self, xi):
        return self._select(xi, "d2u")

    def e2u(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.exp(2.0 * self.u(np.log(rho)))

    def curvature_const(self, rho):
        """Piecewise-constant curvature by radius (the design value)."""
        rho = np.asarray(rho, dtype=float)
        if self.degenerate:
            return np.full_like(rho, self.pieces[0].curvature)
        inner, outer = self.pieces
        return np.where(rho <= self.glue_radius, inner.curvature, outer.curvature)

    def volume_closed(self) -> float:
        """Total volume from the pieces' closed forms."""
        if self.degenerate:
            p = self.pieces[0]
            if p.kind == FOOTBALL_CAP:
                return p.cap_volume(math.inf)
            return p.cap_volume(0.0)
        inner, outer = self.pieces
        return inner.cap_volume(self.glue_radius) + outer.cap_volume(self.glue_radius)

    def sample(self, rho):
        """Arrays (rho, u, e2u, K) at the given radii."""
        rho = np.asarray(rho, dtype=float)
        xi = np.log(rho)
        u = self.u(xi)
        return rho, u, np.exp(2.0 * u), self.curvature_const(rho)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "a": self.a,
            "b": self.b,
            "glue_radius": (None if math.isinf(self.glue_radius)
                            else self.glue_radius),
            "target_volume": self.target_volume,
            "chi": self.chi,
            "pieces": [p.to_dict() for p in self.pieces],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseRadialMetric":
        r = d["glue_radius"]
        return cls(d["kind"], d["alpha"], d["beta"], d["a"], d["b"],
                   math.inf if r is None else r,
                   tuple(RadialPiece.from_dict(p) for p in d["pieces"]),
                   d["target_volume"], d["chi"])

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseRadialMetric":
        return cls.from_dict(json.loads(text))

    def write_csv(self, path, rho=None) -> None:
        """Sampled profile as CSV columns rho,u,e2u,K."""
        if rho is None:
            rho = np.logspace(-4, 4, 513)
        rows = zip(*self.sample(rho))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rho", "u", "e2u", "K"])
            for row in rows:
                writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class C11Report:
    """Gluing regularity: relative jumps of e^{2u} and its radial
    derivative at r, plus the (expected) curvature jump."""

    e2u_jump_rel: float
    de2u_jump_rel: float
    curvature_jump: float
    expected_curvature_jump: float
    glue_radius: float
    degenerate: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "e2u_jump_rel": self.e2u_jump_rel,
            "de2u_jump_rel": self.de2u_jump_rel,
            "curvature_jump": self.curvature_jump,
            "expected_curvature_jump": self.expected_curvature_jump,
            "glue_radius": (None if math.isinf(self.glue_radius)
                            else self.glue_radius),
            "degenerate": self.degenerate,
            "passed": self.passed,
        }


def football_mass(alpha: float, b: float, r: float) -> float:
    """Volume of the curvature-b football cap of radius r with cone order
    alpha at the origin: 4*pi*(1+alpha)/b * r^m/(1+r^m), m = 2+2*alpha."""
    if b <= 0.0:
        raise ValueError("football curvature b must be positive")
    if r < 0.0:
        raise ValueError("radius must be non-negative")
    opo = 1.0 + alpha
    if math.isinf(r):
        return 4.0 * math.pi * opo / b
    w = r ** (2.0 * opo)
    return (4.0 * math.pi * opo / b) * w / (1.0 + w)


def _bisect(f, lo: float, hi: float, rel_tol: float = 1e-12,
            max_iter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise GluingError("root bracket does not straddle a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel_tol * mid:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def glue_radius(divisor: Divisor, band: CurvatureBand,
                target_volume: float) -> float:
    """Radius at which the inner football cap holds exactly the mass the
    target volume dictates.

    Solved by bisection (relative tolerance 1e-12) on a bracket taken
    around the closed-form inversion.  Degenerate alpha == beta divisors
    return inf (target mass equals the whole football) or 0 (zero mass).
    """
    alpha = divisor.alpha
    a, b = band.a, band.b
    chi = weighted_euler(divisor)
    if a == b:
        raise GluingError("a == b leaves the gluing mass undetermined; "
                          "the model is a single football")
    if a == 0.0:
        mass = chi / b
    else:
        mass = (chi - a * target_volume) / (b - a)
    cap = 4.0 * math.pi * (1.0 + alpha) / b
    if divisor.alpha == divisor.beta:
        if abs(mass - cap) <= 1e-9 * cap:
            return math.inf
        if abs(mass) <= 1e-9 * cap:
            return 0.0
    if not 0.0 < mass < cap:
        raise GluingError(
            f"target volume {target_volume} needs inner mass {mass}, outside "
            f"(0, {cap}); the (divisor, band, volume) triple is inconsistent")
    frac = mass / cap
    r0 = (frac / (1.0 - frac)) ** (1.0 / (2.0 + 2.0 * alpha))
    lo, hi = 0.9 * r0, 1.1 * r0
    f = lambda r: football_mass(alpha, b, r) - mass
    while f(lo) > 0.0:
        lo *= 0.5
    while f(hi) < 0.0:
        hi *= 2.0
    return _bisect(f, lo, hi)


def _solve_gauge(theta: float, bare_target: float, k: float, y: float,
                 want_small_q: bool) -> float:
    """Gauge c of an outer cap matching a bare boundary factor.

    Solves W*(1 + theta*c*y)^2 = k*c with W = bare_target; the two roots
    have reciprocal latitude parameters q = c*y (the two caps of the same
    football cut at the same boundary factor); the caller picks the branch.
    """
    W = bare_target
    c2 = W * y * y
    c1 = 2.0 * theta * W * y - k
    c0 = W
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        if disc > -1e-12 * max(c1 * c1, 4.0 * c2 * c0):
            disc = 0.0  # pinching-equality inputs land here up to rounding
        else:
            raise GluingError("no gauge makes the outer cap continuous: the "
                              "boundary factor exceeds the cap's maximum")
    sq = math.sqrt(disc)
    roots = sorted(((-c1 - sq) / (2.0 * c2), (-c1 + sq) / (2.0 * c2)))
    c = roots[0] if want_small_q else roots[1]
    if c <= 0.0:
        raise GluingError("continuity gauge came out non-positive")
    return c


def build_extremal(kind: str, divisor: Divisor,
                   band: CurvatureBand | None = None) -> PiecewiseRadialMetric:
    """Assemble the extremal model of the given kind for (divisor, band).

    Kinds: "Vab" (a < 0), "V0b" (a = 0), "Vmin"/"Vmax" (a > 0, pinching
    feasible), "MinVol" (band fixed at [-1, 1]).  The inner football cap
    always has curvature b and order alpha; the outer cap has curvature a
    and order beta at infinity, with its gauge fixed by continuity.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of "
                         f"{MODEL_KINDS}")
    if kind == KIND_MINVOL:
        if band is None:
            band = CurvatureBand(-1.0, 1.0)
        elif (band.a, band.b) != (-1.0, 1.0):
            raise ValueError("MinVol is defined for the band [-1, 1]")
        target = min_vol(divisor)
    else:
        if band is None:
            raise ValueError(f"kind {kind} requires an explicit band")
        report = volume_bounds(divisor, band)
        if kind == KIND_VAB:
            if band.a >= 0.0:
                raise ValueError("Vab requires a < 0")
            target = report.v_lower
        elif kind == KIND_V0B:
            if band.a != 0.0:
                raise ValueError("V0b requires a = 0")
            target = report.v_lower
        else:
            if band.a <= 0.0:
                raise ValueError(f"{kind} requires a > 0")
            if not report.feasible:
                raise InfeasibleBandError(
                    f"pinching condition fails for a={band.a}, b={band.b}, "
                    f"alpha={divisor.alpha}, beta={divisor.beta}")
            target = report.v_lower if kind == KIND_VMIN else report.v_upper
    a, b = band.a, band.b
    alpha, beta = divisor.alpha, divisor.beta
    chi = weighted_euler(divisor)

    if alpha == beta:
        if kind == KIND_VMAX and a != b:
            piece = RadialPiece(INVERTED_FOOTBALL_CAP, a, beta, 1.0 / a)
            return PiecewiseRadialMetric(kind, alpha, beta, a, b, 0.0,
                                         (piece,), target, chi)
        piece = RadialPiece(FOOTBALL_CAP, b, alpha, 1.0 / b)
        return PiecewiseRadialMetric(kind, alpha, beta, a, b, math.inf,
                                     (piece,), target, chi)

    r = glue_radius(divisor, band, target)
    inner = RadialPiece(FOOTBALL_CAP, b, alpha, 1.0 / b, 1.0, 0.0, r)
    bare_target = float(inner.e2u(r)) * r ** (4.0 + 2.0 * beta)
    mu = 2.0 + 2.0 * beta
    y = r ** (-mu)
    if a == 0.0:
        outer = RadialPiece(FLAT_TAIL, 0.0, beta, bare_target, 1.0, r)
    else:
        scale = 1.0 / abs(a)
        theta = -1.0 if a < 0.0 else 1.0
        want_small_q = kind != KIND_VMAX
        c = _solve_gauge(theta, bare_target, 4.0 * (1.0 + beta) ** 2 * scale,
                         y, want_small_q)
        outer_kind = HYPERBOLIC_CAP if a < 0.0 else INVERTED_FOOTBALL_CAP
        if a < 0.0 and c * y >= 1.0:
            raise GluingError("hyperbolic outer cap invalid: its singular "
                              "latitude reaches the gluing radius")
        outer = RadialPiece(outer_kind, a, beta, scale, c, r)
    metric = PiecewiseRadialMetric(kind, alpha, beta, a, b, r,
                                   (inner, outer), target, chi)
    report = check_c11(metric)
    if not report.passed:
        raise RuntimeError(
            f"internal inconsistency: glued factor not C^1 at r={r} "
            f"(jumps {report.e2u_jump_rel:.3e}, {report.de2u_jump_rel:.3e})")
    return metric


def verify_model(metric: PiecewiseRadialMetric,
                 n_curv_samples: int = 1000,
                 vol_tol: float = 1e-8, gb_tol: float = 1e-7,
                 curv_tol: float = 1e-6, jump_tol: float = 1e-8,
                 order_tol: float = 1e-4) -> dict:
    """Run the invariant battery on a built model.

    Checks the quadrature volume against the target bound, the total
    curvature against 2 pi (2 + alpha + beta), pointwise curvature against
    the band on log-spaced radii (excluding a relative 1e-3 neighborhood
    of the gluing radius), the gluing jumps, and the fitted cone orders.
    Returns a dict of measurements and per-check pass flags.
    """
    from . import geometry

    prof = geometry.profile_of(metric)
    vol = geometry.volume(prof)
    gb = geometry.gauss_bonnet(prof)
    vol_rel = abs(vol.value - metric.target_volume) / metric.target_volume
    gb_rel = abs(gb.value - metric.chi) / abs(metric.chi)

    rho = np.logspace(-6.0, 6.0, n_curv_samples)
    r = metric.glue_radius
    if 0.0 < r < math.inf:
        rho = rho[np.abs(rho - r) > 1e-3 * r]
    k = geometry.curvature(prof, np.log(rho))
    band_violation = max(float((metric.a - k).max()), float((k - metric.b).max()), 0.0)

    c11 = check_c11(metric, tol=jump_tol)
    # the subleading term of u decays like rho^{-(2+2*order)}, so the fit
    # windows stretch by 1/(1+order) to keep its residual uniform
    w0 = 1.0 / (1.0 + metric.alpha)
    w1 = 1.0 / (1.0 + metric.beta)
    fit0 = geometry.cone_order(prof, "origin", window=(-20.0 * w0, -14.0 * w0))
    fit1 = geometry.cone_order(prof, "infinity", window=(14.0 * w1, 20.0 * w1))

    checks = {
        "volume": vol_rel < vol_tol,
        "gauss_bonnet": gb_rel < gb_tol,
        "curvature_band": band_violation < curv_tol,
        "c11": c11.passed,
        "curvature_jump": c11.degenerate or abs(c11.curvature_jump
                                                - c11.expected_curvature_jump)
        < curv_tol,
        "cone_orders": (abs(fit0.order - metric.alpha) < order_tol
                        and abs(fit1.order - metric.beta) < order_tol
                        and not fit0.flagged and not fit1.flagged),
    }
    return {
        "kind": metric.kind,
        "alpha": metric.alpha,
        "beta": metric.beta,
        "a": metric.a,
        "b": metric.b,
        "glue_radius": None if math.isinf(metric.glue_radius) else metric.glue_radius,
        "target_volume": metric.target_volume,
        "volume_quadrature": vol.value,
        "volume_rel_err": vol_rel,
        "chi": metric.chi,
        "gauss_bonnet": gb.value,
        "gauss_bonnet_rel_err": gb_rel,
        "curvature_min": float(k.min()),
        "curvature_max": float(k.max()),
        "band_violation": band_violation,
        "c11": c11.to_dict(),
        "cone_order_origin": fit0.order,
        "cone_order_infinity": fit1.order,
        "checks": checks,
        "passed": all(checks.values()),
    }


def check_c11(metric: PiecewiseRadialMetric,
              tol: float = 1e-8) -> C11Report:
    """Measure the jumps of e^{2u} and d(e^{2u})/drho at the gluing radius.

    Both should vanish (the factor is C^{1,1}); the curvature jumps by b-a,
    which is exactly the expected second-order failure.
    """
    if metric.degenerate:
        return C11Report(0.0, 0.0, 0.0, metric.b - metric.a,
                         metric.glue_radius, True, True)
    r = metric.glue_radius
    xi = math.log(r)
    inner, outer = metric.pieces
    f_in = math.exp(float(inner.log_factor(xi)))
    f_out = math.exp(float(outer.log_factor(xi)))
    # d(e^{2u})/drho = e^{2u} * 2 u'(xi) / rho
    df_in = f_in * 2.0 * float(inner.du(xi)) / r
    df_out = f_out * 2.0 * float(outer.du(xi)) / r
    e2u_jump = abs(f_out - f_in) / max(abs(f_in), abs(f_out))
    dref = max(abs(df_in), abs(df_out))
    de2u_jump = abs(df_out - df_in) / dref if dref > 0 else abs(df_out - df_in)
    curv_jump = outer.curvature - inner.curvature
    passed = e2u_jump < tol and de2u_jump < tol
    return C11Report(e2u_jump, de2u_jump, abs(curv_jump),
                     abs(metric.b - metric.a), r, False, passed)
