"""Linear projections of generation squares, Favard-length quadrature, the
projection-counting / Hardy-Littlewood / stacking pipeline, bad-angle sets,
and the visibility-vs-Favard scaling pipeline.

Angle quadrature uses the midpoint rule on a uniform partition of [0, pi);
per-angle work is pure and reduced in fixed index order, so results are
byte-stable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import MERGE_TOL, IntervalSet, Point2
from .ifs import Generation, IFSystem, generate_generation


class DegenerateError(ArithmeticError):
    """A quantity needed for a derived threshold vanished."""


@dataclass(frozen=True)
class AngleGrid:
    """Midpoints of a uniform count-cell partition of [0, pi)."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("angle count must be >= 1")

    @property
    def thetas(self) -> np.ndarray:
        return (np.arange(self.count) + 0.5) * (math.pi / self.count)

    @property
    def spacing(self) -> float:
        return math.pi / self.count


@dataclass(frozen=True)
class StackReport:
    n: int
    theta: float
    K: float
    stacked_fraction: float
    support_measure: float


def _projection_bounds(gen: Generation, theta: float):
    c = math.cos(theta)
    s = math.sin(theta)
    lo = (gen.corner_x * c + gen.corner_y * s
          + gen.sides * (min(c, 0.0) + min(s, 0.0)))
    hi = lo + gen.sides * (abs(c) + abs(s))
    return lo, hi


def project_generation(gen: Generation, theta: float) -> IntervalSet:
    """Exact union of the per-square projection intervals at angle theta."""
    if len(gen) == 0:
        raise ValueError("empty generation")
    lo, hi = _projection_bounds(gen, theta)
    return IntervalSet.from_arrays(lo, hi)


def projection_measures(gen: Generation, thetas: np.ndarray) -> np.ndarray:
    """Union measure of the theta-projections for a whole batch of angles."""
    return _kernels.projection_measures(
        gen.corner_x, gen.corner_y, gen.sides,
        np.ascontiguousarray(thetas, dtype=float), MERGE_TOL)


def favard_length(gen: Generation, grid: AngleGrid) -> float:
    """Midpoint-rule value of the direction-averaged projection length."""
    if len(gen) == 0:
        return 0.0
    return float(np.mean(projection_measures(gen, grid.thetas)))


def projection_count(gen: Generation, theta: float, r: float) -> int:
    """Number of squares whose closed projection interval contains r."""
    lo, hi = _projection_bounds(gen, theta)
    return int(np.count_nonzero((lo <= r) & (r <= hi)))


def hl_maximal(gen: Generation, theta: float, r: float) -> float:
    """Centered maximal average of the projection-counting function.

    Maximizes the window average over a dyadic ladder of radii anchored at
    the hull-projection width scaled to the current generation; a factor-2
    ladder loss relative to the continuum supremum is accepted.
    """
    lo, hi = _projection_bounds(gen, theta)
    base = gen.side * (abs(math.cos(theta)) + abs(math.sin(theta)))
    if base <= 0:
        return 0.0
    kmax = max(0, math.ceil(math.log2(max(len(gen), 1))))
    best = 0.0
    rho = base / 2
    for _ in range(kmax + 2):
        # uncentered: any window of half-length rho containing r; probing the
        # left-aligned, centered, and right-aligned positions loses at most a
        # constant factor against the true supremum
        for shift in (-rho, 0.0, rho):
            lo_w = r + shift - rho
            hi_w = r + shift + rho
            overlap = np.minimum(hi, hi_w) - np.maximum(lo, lo_w)
            mass = float(np.sum(np.clip(overlap, 0.0, None)))
            best = max(best, mass / (2 * rho))
        rho *= 2
    return best


def stacked_census(gen: Generation, theta: float, K: float) -> StackReport:
    """Fraction of stage-n squares whose whole projection sits where the
    maximal function is >= K, probed at 9 equispaced points per square."""
    if K <= 0:
        raise ValueError("stack threshold K must be positive")
    lo, hi = _projection_bounds(gen, theta)
    stacked = 0
    for i in range(len(gen)):
        rs = np.linspace(lo[i], hi[i], 9)
        if all(hl_maximal(gen, theta, float(r)) >= K for r in rs):
            stacked += 1
    support = project_generation(gen, theta).measure()
    return StackReport(gen.n, theta, K, stacked / len(gen), support)


def sup_projection_count(gen: Generation, theta: float) -> int:
    """Exact sup of the projection-counting step function via endpoint sweep."""
    lo, hi = _projection_bounds(gen, theta)
    xs = np.concatenate([lo, hi])
    # closed intervals: at a shared coordinate, openings count before closings
    order = np.concatenate([np.zeros(lo.size, dtype=np.int8),
                            np.ones(hi.size, dtype=np.int8)])
    deltas = np.concatenate([np.ones(lo.size, dtype=np.int64),
                             -np.ones(hi.size, dtype=np.int64)])
    perm = np.lexsort((order, xs))
    running = np.cumsum(deltas[perm])
    return int(running.max())


@dataclass(frozen=True)
class BadAngleReport:
    K: float
    measure_estimate: float
    bad_thetas: tuple[float, ...]


def bad_angle_measure(sys: IFSystem, L: int, grid: AngleGrid,
                      budget: int | None = None) -> BadAngleReport:
    """Angle-measure of {theta : sup of the stage-L counting function at
    theta - pi/2 is at most 1/sqrt(Fav(J_L))}."""
    kwargs = {} if budget is None else {"budget": budget}
    gen = generate_generation(sys, L, **kwargs)
    fav = favard_length(gen, grid)
    if fav <= 0:
        raise DegenerateError("Favard estimate is zero; threshold undefined")
    K = 1.0 / math.sqrt(fav)
    bad = []
    for th in grid.thetas:
        direction = (th - math.pi / 2) % math.pi
        if sup_projection_count(gen, direction) <= K:
            bad.append(float(th))
    return BadAngleReport(K, len(bad) * grid.spacing, tuple(bad))


def fav_upper_pipeline(sys: IFSystem, a: Point2, n: int, grid: AngleGrid,
                       budget: int | None = None):
    """Measured visibility of J_n from a, paired with sqrt(Fav(J_L)) at the
    logarithmically shallower depth L = ceil(log_s n)."""
    hull = sys.hull
    dx = max(hull.corner.x - a.x, 0.0, a.x - hull.corner.x - hull.side)
    dy = max(hull.corner.y - a.y, 0.0, a.y - hull.corner.y - hull.side)
    if math.hypot(dx, dy) < 0.1 * hull.side:
        raise ValueError("vantage point too close to the hull")
    from .visibility import radial_projection  # local import: one-way dep

    kwargs = {} if budget is None else {"budget": budget}
    gen_n = generate_generation(sys, n, **kwargs)
    vis = radial_projection(gen_n, a).measure() / (2 * math.pi)
    L = 0 if n <= 1 else math.ceil(math.log(n) / math.log(sys.s))
    gen_l = generate_generation(sys, L, **kwargs)
    bound = math.sqrt(favard_length(gen_l, grid))
    return vis, bound
