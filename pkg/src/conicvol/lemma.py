"""Sharp bound for the integral of a slope-constrained function, with a
brute-force oracle.

The objects here are functions f on [0, V] with f(0) = 0, f(V) = chi and
a <= f' <= b.  The integral of f is maximized by the bang-bang profile
(slope b up to the breakpoint delta = (chi - a V)/(b - a), slope a after),
and the maximum value has a closed form.  ``brute_force_max`` checks this
independently on piecewise-linear profiles with n equal segments: there
the objective is linear with decreasing coefficients, so a greedy
allocation is exact and approaches the closed form from below as n grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _check_admissible(V: float, chi: float, a: float, b: float) -> None:
    if V <= 0.0:
        raise ValueError("V must be positive")
    if a > b:
        raise ValueError("need a <= b")
    lo, hi = a * V, b * V
    if not (lo <= chi <= hi):
        raise ValueError(
            f"inadmissible: chi={chi} outside [a*V, b*V] = [{lo}, {hi}]; "
            "no slope-constrained f exists")


@dataclass(frozen=True)
class SlopeProfile:
    """Piecewise-linear f given by its slopes on consecutive segments.

    ``edges`` are the segment boundaries (first 0, last V); the default is
    a uniform partition.  f starts at 0 and must end at chi to be
    admissible (checked by :meth:`is_admissible`, not enforced).
    """

    V: float
    chi: float
    slopes: tuple
    edges: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.slopes)

    def edge_array(self):
        if self.edges is not None:
            return np.asarray(self.edges, dtype=float)
        return np.linspace(0.0, self.V, self.n + 1)

    def values(self):
        """f at the segment endpoints (n+1 values, f[0] = 0)."""
        widths = np.diff(self.edge_array())
        return np.concatenate([[0.0], np.cumsum(np.asarray(self.slopes) * widths)])

    def is_admissible(self, a: float, b: float, tol: float = 1e-9) -> bool:
        s = np.asarray(self.slopes)
        end_ok = abs(self.values()[-1] - self.chi) <= tol * max(1.0, abs(self.chi))
        return bool(end_ok and s.min() >= a - tol and s.max() <= b + tol)

    def integral(self) -> float:
        """Trapezoid integral of f (exact for piecewise-linear f)."""
        f = self.values()
        widths = np.diff(self.edge_array())
        return float(np.sum(0.5 * (f[:-1] + f[1:]) * widths))


def lemma_bound(V: float, chi: float, a: float, b: float) -> float:
    """Closed-form maximum of Int f over admissible slope-constrained f.

    For the degenerate band a == b the unique admissible f is a*x (exists
    only when chi == a*V) and the integral is a*V^2/2.
    """
    _check_admissible(V, chi, a, b)
    if a == b:
        return 0.5 * a * V * V
    return -0.5 * a * V * V - (chi - a * V) ** 2 / (2.0 * (b - a)) + V * chi


def bang_bang(V: float, chi: float, a: float, b: float) -> SlopeProfile:
    """The maximizing profile: slope b on [0, delta), slope a on [delta, V],
    delta = (chi - a V)/(b - a).  Its integral equals :func:`lemma_bound`
    identically."""
    _check_admissible(V, chi, a, b)
    if a == b:
        return SlopeProfile(V, chi, (a,), (0.0, V))
    delta = switching_point(V, chi, a, b)
    if delta <= 0.0:
        return SlopeProfile(V, chi, (a,), (0.0, V))
    if delta >= V:
        return SlopeProfile(V, chi, (b,), (0.0, V))
    return SlopeProfile(V, chi, (b, a), (0.0, delta, V))


def switching_point(V: float, chi: float, a: float, b: float) -> float:
    """delta = (chi - a V)/(b - a), where the maximizer switches slope."""
    _check_admissible(V, chi, a, b)
    if a == b:
        raise ValueError("switching point undefined for a == b")
    return (chi - a * V) / (b - a)


def greedy_slopes(V: float, chi: float, a: float, b: float, n: int):
    """Exact maximizer over n-segment profiles: put slope b as early as
    possible subject to the endpoint constraint."""
    _check_admissible(V, chi, a, b)
    step = V / n
    slopes = np.full(n, float(a))
    if b > a:
        # total slope excess to distribute; mathematically in [0, n(b-a)],
        # clamped against rounding at the admissibility boundary
        budget = min(max(chi / step - a * n, 0.0), n * (b - a))
        full = max(0, int(min(n, math.floor(budget / (b - a) + 1e-15))))
        slopes[:full] = b
        if full < n:
            slopes[full] = min(b, max(a, a + budget - full * (b - a)))
    return slopes


def brute_force_max(V: float, chi: float, a: float, b: float, n: int) -> float:
    """Maximum of Int f over n-segment slope profiles.

    The integral is (V/n)^2 * sum_j s_j (n - j + 1/2), a linear objective
    with strictly decreasing coefficients, so the greedy allocation is the
    exact maximum.  Approaches :func:`lemma_bound` from below, gap O(1/n).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    slopes = greedy_slopes(V, chi, a, b, n)
    return SlopeProfile(V, chi, tuple(slopes)).integral()


def random_search_max(V: float, chi: float, a: float, b: float, n: int,
                      restarts: int = 200, steps: int = 10_000,
                      seed: int = 0) -> float:
    """Hill-climbing check of :func:`brute_force_max`.

    Random pairwise slope transfers (which preserve f(V)) are accepted when
    they raise the integral; purely an independent sanity check on the
    greedy solution, never used as the primary oracle.
    """
    _check_admissible(V, chi, a, b)
    rng = np.random.default_rng(seed)
    step = V / n
    weights = (step * step) * (n - np.arange(1, n + 1) + 0.5)
    best = -math.inf
    for _ in range(restarts):
        slopes = rng.uniform(a, b, n)
        # project onto the sum constraint, then clip back into the box
        for _ in range(50):
            slopes += (chi / step - slopes.sum()) / n
            np.clip(slopes, a, b, out=slopes)
            if abs(slopes.sum() * step - chi) < 1e-12 * max(1.0, abs(chi)):
                break
        value = float(weights @ slopes)
        for _ in range(steps):
            i, j = rng.integers(0, n, 2)
            if i == j:
                continue
            room = min(b - slopes[i], slopes[j] - a)
            if room <= 0.0:
                continue
            d = rng.uniform(0.0, room)
            gain = d * (weights[i] - weights[j])
            if gain > 0.0:
                slopes[i] += d
                slopes[j] -= d
                value += gain
        best = max(best, value)
    return best
