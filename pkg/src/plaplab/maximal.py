"""Discrete sharp and plain maximal operators on element fields.

The supremum over all balls through a point is replaced by a maximum over
centered balls with a geometrically decaying radius set.  That restriction
(and the dyadic radius quantization) only moves the fitted comparison
constants, which is all the experiments track.  Evaluation points must keep
a margin of the largest radius from the boundary unless clipped balls are
explicitly requested.
"""

from dataclasses import dataclass

import numpy as np

from .grid import ball_oscillation, ball_elements

__all__ = [
    "RadiiSet",
    "MarginError",
    "sharp_maximal",
    "weighted_local_sharp",
    "plain_maximal",
    "riesz_ratio",
]


class MarginError(ValueError):
    """Evaluation point too close to the boundary for the largest radius."""


@dataclass(frozen=True)
class RadiiSet:
    """Radii r_max * ratio^k, k = 0, 1, ..., truncated below at r_min."""

    r_min: float
    r_max: float
    ratio: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.r_min <= self.r_max):
            raise ValueError("need 0 < r_min <= r_max")
        if not (0.0 < self.ratio < 1.0):
            raise ValueError("ratio must lie in (0, 1)")

    def values(self):
        out = []
        r = self.r_max
        while r >= self.r_min * (1.0 - 1e-12):
            out.append(r)
            r *= self.ratio
        return np.array(out)

    def below(self, cap):
        """The subset of radii strictly below cap (same ordering)."""
        vals = self.values()
        return vals[vals < cap]


def _check_margin(mesh, x, r_needed, require_interior):
    if require_interior and mesh.boundary_distance(x) <= r_needed:
        raise MarginError(
            f"point {tuple(x)} is within {r_needed} of the boundary")


def sharp_maximal(mesh, f, q, radii: RadiiSet, x, require_interior=True):
    """Max over the radius set of the q-mean oscillation of f on B_r(x).

    With require_interior=False balls are clipped by the domain instead of
    rejected, which changes only the fitted constants.
    """
    _check_margin(mesh, x, radii.r_max, require_interior)
    best = 0.0
    for r in radii.values():
        _, osc = ball_oscillation(mesh, f, x, r, q)
        best = max(best, osc)
    return best


def weighted_local_sharp(mesh, f, q, omega, R, radii: RadiiSet, x,
                         require_interior=True):
    """Localized, weighted variant: max over r < R of osc_q / omega(r)."""
    if radii.r_max >= R:
        raise ValueError("radius set must stay strictly below the locality R")
    _check_margin(mesh, x, R, require_interior)
    best = 0.0
    for r in radii.below(R):
        _, osc = ball_oscillation(mesh, f, x, r, q)
        best = max(best, osc / omega(r))
    return best


def plain_maximal(mesh, f, q, radii: RadiiSet, x, require_interior=True):
    """Max over the radius set of the q-mean of |f| on B_r(x)."""
    _check_margin(mesh, x, radii.r_max, require_interior)
    norms = f.norms()
    best = 0.0
    for r in radii.values():
        idx = ball_elements(mesh, x, r)
        w = mesh.areas[idx]
        val = (np.sum(w * norms[idx] ** q) / w.sum()) ** (1.0 / q)
        best = max(best, val)
    return best


def riesz_ratio(mesh, f, q, radii: RadiiSet, stride=1):
    """Fitted constant in the rearranged maximal-function bound.

    Evaluates the plain maximal operator on interior barycenters, rearranges
    the resulting values, and fits the smallest C with
    (M^q f)*(s) <= C * ((|f|^q)**(s))^(1/q) at every breakpoint s.
    """
    from .rearrange import StepFunction, double_star, rearrange

    pts = mesh.interior_points(radii.r_max * (1.0 + 1e-9), stride)
    if len(pts) == 0:
        raise MarginError("no interior points clear the largest radius")
    vals = np.array([plain_maximal(mesh, f, q, radii, x) for x in pts])
    lhs = StepFunction.from_samples(vals, np.full(len(vals), mesh.element_area))
    rhs = rearrange(mesh, f.norms() ** q)
    ratios = []
    s_prev = 0.0
    for m, v in zip(lhs.measures, lhs.values):
        s = s_prev + m
        rhs_val = double_star(rhs, s) ** (1.0 / q)
        if rhs_val > 0.0:
            ratios.append(v / rhs_val)
        s_prev = s
    if not ratios:
        return 0.0
    return float(max(ratios))
