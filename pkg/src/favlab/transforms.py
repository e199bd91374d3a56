"""Plane diffeomorphisms used by the experiments: the projective map
sending pencils of lines to parallel families, its direction map, the
polar wrap of the unit square, and affine maps; plus application of a
preset to a point cloud with a sampled Jacobian bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Point2, Square, TWO_PI, CircularIntervalSet
from .ifs import Generation
from .visibility import PointCloud


class SingularInputError(ValueError):
    """The map is singular at the given point (line at infinity)."""


class DomainError(ValueError):
    """A point lies outside the preset's declared domain."""


#: Jacobian sampling step for the delta-rescaling bound
JACOBIAN_GRID_STEP = 1e-2


def projective_T(p: Point2, allow_near_singular: bool = False) -> Point2:
    """(x, y) -> ((x+1)/y, (y+1)/y); maps lines to lines, y = 0 is sent to
    the line at infinity.

    The library guard requires |y| >= 1/2 (the intended fixtures sit in
    [1, 20]^2); pass allow_near_singular to lift it.
    """
    if p.y == 0:
        raise SingularInputError("projective map undefined on y = 0")
    if abs(p.y) < 0.5 and not allow_near_singular:
        raise DomainError(
            f"|y| = {abs(p.y)} < 1/2; pass allow_near_singular to override")
    return Point2((p.x + 1) / p.y, (p.y + 1) / p.y)


def theta_x(x: float) -> float:
    """Direction arccot(x+1) in (0, pi) of the image of the pencil of lines
    through (x, 0)."""
    return math.pi / 2 - math.atan(x + 1)


def polar_phi(p: Point2) -> Point2:
    """(x, y) -> ((x+1) cos(pi y), (x+1) sin(pi y)); a diffeomorphism on a
    neighborhood of the unit square, with |phi(p)| = x + 1."""
    r = p.x + 1
    return Point2(r * math.cos(math.pi * p.y), r * math.sin(math.pi * p.y))


def _polar_forward(pts: np.ndarray) -> np.ndarray:
    r = pts[:, 0] + 1
    ang = math.pi * pts[:, 1]
    return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)


def _polar_jacobian(pts: np.ndarray) -> np.ndarray:
    r = pts[:, 0] + 1
    ang = math.pi * pts[:, 1]
    c, s = np.cos(ang), np.sin(ang)
    out = np.empty((len(pts), 2, 2))
    out[:, 0, 0] = c
    out[:, 0, 1] = -math.pi * r * s
    out[:, 1, 0] = s
    out[:, 1, 1] = math.pi * r * c
    return out


def _projective_forward(pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    return np.stack([(x + 1) / y, (y + 1) / y], axis=1)


def _projective_jacobian(pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    out = np.empty((len(pts), 2, 2))
    out[:, 0, 0] = 1 / y
    out[:, 0, 1] = -(x + 1) / y ** 2
    out[:, 1, 0] = 0.0
    out[:, 1, 1] = -1 / y ** 2
    return out


@dataclass(frozen=True)
class DiffeoPreset:
    """Forward map plus closed-form Jacobian, valid on a declared square."""

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    domain: Square

    def contains(self, pts: np.ndarray, pad: float = 1e-9) -> np.ndarray:
        c = self.domain.corner
        a = self.domain.side
        return ((pts[:, 0] >= c.x - pad) & (pts[:, 0] <= c.x + a + pad)
                & (pts[:, 1] >= c.y - pad) & (pts[:, 1] <= c.y + a + pad))


def affine_preset(mat: np.ndarray, shift: np.ndarray,
                  domain: Square) -> DiffeoPreset:
    mat = np.asarray(mat, dtype=float).reshape(2, 2)
    shift = np.asarray(shift, dtype=float).reshape(2)
    if abs(np.linalg.det(mat)) < 1e-15:
        raise ValueError("affine map must be invertible")

    def fwd(pts):
        return pts @ mat.T + shift

    def jac(pts):
        return np.broadcast_to(mat, (len(pts), 2, 2))

    return DiffeoPreset("affine", fwd, jac, domain)


POLAR = DiffeoPreset("polar", _polar_forward, _polar_jacobian,
                     Square(Point2(0.0, 0.0), 1.0))
PROJECTIVE_T = DiffeoPreset("projectiveT", _projective_forward,
                            _projective_jacobian,
                            Square(Point2(1.0, 1.0), 19.0))

DIFFEO_PRESETS = {"polar": POLAR, "projectiveT": PROJECTIVE_T}


def _inverse_jacobian_sup(d: DiffeoPreset,
                          step: float = JACOBIAN_GRID_STEP) -> float:
    """Sup of the operator norm of the inverse differential, sampled on a
    dense grid over the declared domain."""
    c = d.domain.corner
    n = max(2, int(math.ceil(d.domain.side / step)) + 1)
    xs = np.linspace(c.x, c.x + d.domain.side, n)
    ys = np.linspace(c.y, c.y + d.domain.side, n)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    jac = d.jacobian(pts)
    inv = np.linalg.inv(jac)
    return float(np.linalg.norm(inv, ord=2, axis=(1, 2)).max())


def jacobian_norms(d: DiffeoPreset, pts: np.ndarray) -> np.ndarray:
    """Operator norms of the differential at the given points."""
    return np.linalg.norm(d.jacobian(pts), ord=2, axis=(1, 2))


def apply_diffeo(d: DiffeoPreset, A: PointCloud) -> PointCloud:
    """Image cloud with the separation scale rescaled by the sampled
    inverse-Jacobian bound and verified against the actual point spread."""
    inside = d.contains(A.points)
    if not inside.all():
        bad = A.points[~inside][0]
        raise DomainError(
            f"point ({bad[0]}, {bad[1]}) outside the {d.name} domain")
    image = d.forward(A.points)
    delta_new = A.delta / _inverse_jacobian_sup(d)
    if len(image) > 1:
        tree = cKDTree(image)
        dists, _ = tree.query(image, k=2)
        actual = float(dists[:, 1].min())
        delta_new = min(delta_new, actual)
    return PointCloud(image, delta_new, A.weights)


# ---------------------------------------------------------------------------
# polar Cantor visibility from the origin
# ---------------------------------------------------------------------------

def polar_arc_of_square(sq: Square) -> tuple[float, float]:
    """Exact direction arc of the polar image of an axis-aligned square as
    seen from the origin: the angle of phi(x, y) is pi*y, independent of x."""
    return (math.pi * sq.corner.y, math.pi * sq.side)


def polar_visibility_from_origin(gen: Generation) -> float:
    """vis(0, phi(J_n)) via exact circular unions of the polar image arcs."""
    starts = math.pi * gen.corner_y
    widths = math.pi * gen.sides
    arcs = CircularIntervalSet.from_arcs(
        zip(starts.tolist(), widths.tolist()))
    return arcs.measure() / TWO_PI


# ---------------------------------------------------------------------------
# radial/projection bridge
# ---------------------------------------------------------------------------

def radial_vs_projection_bridge(A: PointCloud, x: float, fam, c: float = 4.0):
    """Discrete visibility from (x, 0) next to the projected length of the
    projective image of the delta-thickened cloud in direction theta_x."""
    from .geometry import IntervalSet
    from .visibility import vis_delta

    if not (-10 <= x <= 0):
        raise DomainError("vantage abscissa must lie in [-10, 0]")
    if len(A) == 0:
        return 0, 0.0
    vd = vis_delta(Point2(x, 0.0), A, fam, c)
    image = _projective_forward(A.points)
    # each delta-ball maps to a region within delta * |J| of the image point
    radii = A.delta * jacobian_norms(PROJECTIVE_T, A.points)
    th = theta_x(x)
    t = image[:, 0] * math.cos(th) + image[:, 1] * math.sin(th)
    proj = IntervalSet.from_arrays(t - radii, t + radii)
    return vd, proj.measure()
