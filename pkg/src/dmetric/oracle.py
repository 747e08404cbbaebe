"""Ground truth for disagreement probabilities, independent of Monte Carlo.

Two routes:

* closed form for two-input, two-class networks without hidden layer, whose
  decision regions are half-planes (polygon clipping for uniform laws,
  normal CDFs for axis-aligned boundaries under a truncated Gaussian on a box);
* midpoint quadrature on a dense 2-D grid for anything with two inputs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .measure import InputMeasure, density
from .metric import region_indices
from .net import Activation, NetworkParams, toy_network

__all__ = [
    "HalfPlane",
    "DegenerateHalfPlaneError",
    "UnsupportedOracleError",
    "halfplane_of",
    "halfplane_network",
    "has_closed_form",
    "exact_disagreement",
    "quad_disagreement",
    "polygon_area",
    "clip_halfplane",
    "circle_polygon_area",
]


class DegenerateHalfPlaneError(ValueError):
    """Half-plane with zero normal: the decision is constant or tied everywhere."""


class UnsupportedOracleError(ValueError):
    pass


@dataclass(frozen=True)
class HalfPlane:
    """Class 1 wins where ``a*x1 + b*x2 + c > 0``; class 2 where it is negative."""

    a: float
    b: float
    c: float

    @property
    def degenerate(self) -> bool:
        return self.a == 0 and self.b == 0

    def side(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.a * x[..., 0] + self.b * x[..., 1] + self.c


def halfplane_of(params: NetworkParams) -> HalfPlane:
    """Pre-activation score difference of a two-input two-class single-layer net."""
    if params.layer_dims != (2, 2):
        raise ValueError(f"half-plane form needs layer_dims (2, 2), got {params.layer_dims}")
    (W,), (bias,) = params.weights, params.biases
    return HalfPlane(
        float(W[0, 0] - W[1, 0]),
        float(W[0, 1] - W[1, 1]),
        float(bias[0] - bias[1]),
    )


def halfplane_network(h: HalfPlane, activation: Activation | None = None) -> NetworkParams:
    """A network whose decision regions are exactly ``h``."""
    return toy_network(h.a, h.b, 0.0, 0.0, h.c, 0.0, activation)


# --- planar geometry -------------------------------------------------------


def polygon_area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def clip_halfplane(poly: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to ``a*x + b*y + c >= 0``."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        sp = a * p[0] + b * p[1] + c
        sq = a * q[0] + b * q[1] + c
        if sp >= 0:
            out.append(p)
        if (sp >= 0) != (sq >= 0):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def _segment_circle_area(p: np.ndarray, q: np.ndarray, r: float) -> float:
    """Signed area of the origin-p-q triangle intersected with the disc of radius ``r``."""
    d = q - p
    A = float(d @ d)
    if A == 0:
        return 0.0
    B = float(p @ d)
    C = float(p @ p) - r * r
    disc = B * B - A * C
    cuts = [0.0]
    if disc > 0:
        s = math.sqrt(disc)
        for t in ((-B - s) / A, (-B + s) / A):
            if 0 < t < 1:
                cuts.append(t)
    cuts.append(1.0)
    area = 0.0
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        u = p + t0 * d
        v = p + t1 * d
        mid = p + 0.5 * (t0 + t1) * d
        cross = float(u[0] * v[1] - u[1] * v[0])
        if mid @ mid <= r * r:
            area += 0.5 * cross
        else:
            area += 0.5 * r * r * math.atan2(cross, float(u @ v))
    return area


def circle_polygon_area(poly: np.ndarray, r: float) -> float:
    """Area of a polygon intersected with the origin-centred disc of radius ``r``."""
    if len(poly) < 3:
        return 0.0
    total = sum(_segment_circle_area(poly[i], poly[(i + 1) % len(poly)], r) for i in range(len(poly)))
    return abs(total)


def _box_polygon(bounds) -> np.ndarray:
    (x0, x1), (y0, y1) = bounds
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


# --- closed form -----------------------------------------------------------


def _axis_of(h: HalfPlane) -> int | None:
    if h.b == 0:
        return 0
    if h.a == 0:
        return 1
    return None


def has_closed_form(h1: HalfPlane, h2: HalfPlane, measure: InputMeasure) -> bool:
    if measure.dim != 2:
        return False
    if measure.law == "uniform":
        return True
    if measure.domain.kind != "box":
        return False
    ax1, ax2 = _axis_of(h1), _axis_of(h2)
    return ax1 is not None and ax1 == ax2


def _uniform_mass(h1: HalfPlane, h2: HalfPlane, measure: InputMeasure) -> float:
    dom = measure.domain
    if dom.kind == "box":
        base = _box_polygon(dom.bounds)
        area = lambda poly: polygon_area(poly)  # noqa: E731
    else:
        r = dom.radius
        base = _box_polygon(((-2 * r, 2 * r), (-2 * r, 2 * r)))
        area = lambda poly: circle_polygon_area(poly, r)  # noqa: E731
    # class-1 of h1 with class-2 of h2, and vice versa
    part1 = clip_halfplane(clip_halfplane(base, h1.a, h1.b, h1.c), -h2.a, -h2.b, -h2.c)
    part2 = clip_halfplane(clip_halfplane(base, -h1.a, -h1.b, -h1.c), h2.a, h2.b, h2.c)
    return (area(part1) + area(part2)) / dom.volume


def _gaussian_axis_mass(h1: HalfPlane, h2: HalfPlane, measure: InputMeasure) -> float:
    axis = _axis_of(h1)
    lo, hi = measure.domain.bounds[axis]
    m = measure.mean[axis]
    norm = stats.norm(loc=m)

    def coef(h):
        return h.a if axis == 0 else h.b

    # each rule is "class 1 iff coef * t + c > 0", a half-line in t
    t1 = -h1.c / coef(h1)
    t2 = -h2.c / coef(h2)
    up1 = coef(h1) > 0
    up2 = coef(h2) > 0

    def mass(a, b):
        a, b = max(a, lo), min(b, hi)
        return norm.cdf(b) - norm.cdf(a) if b > a else 0.0

    if up1 == up2:
        diff = mass(min(t1, t2), max(t1, t2))
    else:
        # opposite orientation: disagree outside the segment between the cuts
        diff = mass(-math.inf, min(t1, t2)) + mass(max(t1, t2), math.inf)
    return float(diff / (norm.cdf(hi) - norm.cdf(lo)))


def exact_disagreement(h1: HalfPlane, h2: HalfPlane, measure: InputMeasure, grid_res: int = 2048) -> float:
    """Probability that the two half-plane decisions differ.

    Uses closed-form geometry when :func:`has_closed_form` holds and otherwise
    falls back to :func:`quad_disagreement` on equivalent networks.
    """
    if h1.degenerate or h2.degenerate:
        raise DegenerateHalfPlaneError(
            "constant or all-tie decision; use quad_disagreement or the sample estimators, which handle ties"
        )
    if h1 == h2:
        return 0.0
    if not has_closed_form(h1, h2, measure):
        return quad_disagreement(halfplane_network(h1), halfplane_network(h2), measure, grid_res)
    if measure.law == "uniform":
        return _uniform_mass(h1, h2, measure)
    return _gaussian_axis_mass(h1, h2, measure)


# --- quadrature ------------------------------------------------------------


def quad_disagreement(
    w: NetworkParams,
    w_other: NetworkParams,
    measure: InputMeasure,
    grid_res: int = 2048,
    tie_tol: float = 0.0,
    workers: int = 1,
) -> float:
    """Midpoint rule for the density-weighted indicator of differing region indices."""
    if w.n_inputs != 2 or measure.dim != 2:
        raise UnsupportedOracleError("dense quadrature is only available for two inputs")
    if grid_res < 64:
        raise ValueError("grid_res must be >= 64")
    (x0, x1), (y0, y1) = measure.domain.bounding_box()
    hx = (x1 - x0) / grid_res
    hy = (y1 - y0) / grid_res
    xs = x0 + hx * (np.arange(grid_res) + 0.5)
    ys = y0 + hy * (np.arange(grid_res) + 0.5)
    block = max(1, (1 << 20) // grid_res)
    starts = list(range(0, grid_res, block))

    def rows(i0):
        gx, gy = np.meshgrid(xs[i0 : i0 + block], ys, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        dens = density(measure, pts)
        differ = region_indices(w, pts, tie_tol) != region_indices(w_other, pts, tie_tol)
        return float(np.sum(dens[differ]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partial = list(pool.map(rows, starts))
    else:
        partial = [rows(i0) for i0 in starts]
    # fixed-order reduction
    return math.fsum(partial) * hx * hy
