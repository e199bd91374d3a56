"""Exact primitive geometry: interval unions on the line and the circle,
axis-aligned squares, lines, rotated rectangles, and angular hulls.

Everything here is immutable and pure; values can be shared freely across
workers.  Interval measures are exact sums of the stored endpoints; a merge
tolerance absorbs floating-point rounding without bridging real gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

# Absolute merge tolerance: projection endpoints are sums/products of O(n)
# dyadic-rational terms, so 1e-12 absorbs rounding without bridging real
# gaps of size >= 4^-15.
MERGE_TOL = 1e-12

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Rejected geometric input (non-finite, inverted, out of range)."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Square:
    """Axis-aligned square given by its lower-left corner and side."""

    corner: Point2
    side: float

    def __post_init__(self):
        if not (self.side > 0 and math.isfinite(self.side)):
            raise GeometryError(f"square side must be positive, got {self.side}")

    def contains(self, p: Point2) -> bool:
        return (self.corner.x <= p.x <= self.corner.x + self.side
                and self.corner.y <= p.y <= self.corner.y + self.side)

    def corners(self) -> np.ndarray:
        x0, y0, a = self.corner.x, self.corner.y, self.side
        return np.array([[x0, y0], [x0 + a, y0], [x0 + a, y0 + a], [x0, y0 + a]])

    @property
    def center(self) -> Point2:
        return Point2(self.corner.x + self.side / 2, self.corner.y + self.side / 2)


@dataclass(frozen=True)
class Line:
    """Unoriented line: direction angle theta in [0, pi), signed offset.

    The line is {p : -sin(theta) * p.x + cos(theta) * p.y = offset}; the
    offset is the signed distance from the origin along the unit normal
    (-sin theta, cos theta).
    """

    theta: float
    offset: float

    def __post_init__(self):
        th = self.theta % math.pi
        off = self.offset
        # direction angle wraps mod pi; each wrap flips the normal
        wraps = round((self.theta - th) / math.pi)
        if wraps % 2:
            off = -off
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "offset", off)

    def point_on(self) -> Point2:
        return Point2(-self.offset * math.sin(self.theta),
                      self.offset * math.cos(self.theta))


@dataclass(frozen=True)
class RotRect:
    """Rotated rectangle: center, long-axis angle, dimensions r1 <= r2."""

    center: Point2
    axis_angle: float
    r1: float
    r2: float

    def __post_init__(self):
        if not (0 < self.r1 <= self.r2):
            raise GeometryError(f"need 0 < r1 <= r2, got {self.r1}, {self.r2}")

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Boolean membership for an (m, 2) array of points."""
        c, s = math.cos(self.axis_angle), math.sin(self.axis_angle)
        dx = pts[:, 0] - self.center.x
        dy = pts[:, 1] - self.center.y
        u = dx * c + dy * s       # along long axis
        v = -dx * s + dy * c      # across
        return (np.abs(u) <= self.r2 / 2) & (np.abs(v) <= self.r1 / 2)


def dist_point_line(p: Point2, line: Line) -> float:
    """Euclidean distance; p lies in the rho-neighborhood iff result <= rho."""
    return abs(-math.sin(line.theta) * p.x + math.cos(line.theta) * p.y
               - line.offset)


# ---------------------------------------------------------------------------
# interval sets on the line
# ---------------------------------------------------------------------------

class IntervalSet:
    """Maximal disjoint sorted intervals on R with exact total measure."""

    __slots__ = ("_lo", "_hi")

    def __init__(self, lo: np.ndarray | None = None, hi: np.ndarray | None = None):
        if lo is None:
            lo = np.empty(0)
            hi = np.empty(0)
        self._lo = np.asarray(lo, dtype=float)
        self._hi = np.asarray(hi, dtype=float)

    @classmethod
    def from_pairs(cls, pairs, tol: float = MERGE_TOL) -> "IntervalSet":
        pairs = list(pairs)
        if not pairs:
            return cls()
        lo = np.array([p[0] for p in pairs], dtype=float)
        hi = np.array([p[1] for p in pairs], dtype=float)
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise GeometryError("non-finite interval endpoint")
        if np.any(lo >= hi):
            raise GeometryError("inverted or empty interval")
        mlo, mhi = _kernels.merge_intervals(lo, hi, tol)
        return cls(mlo, mhi)

    @classmethod
    def from_arrays(cls, lo: np.ndarray, hi: np.ndarray,
                    tol: float = MERGE_TOL) -> "IntervalSet":
        mlo, mhi = _kernels.merge_intervals(np.asarray(lo, float),
                                            np.asarray(hi, float), tol)
        return cls(mlo, mhi)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self._lo.tolist(), self._hi.tolist()))

    def insert(self, lo: float, hi: float, tol: float = MERGE_TOL) -> "IntervalSet":
        """Union with [lo, hi]; returns a new set."""
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise GeometryError(f"non-finite interval [{lo}, {hi}]")
        if lo >= hi:
            raise GeometryError(f"inverted interval [{lo}, {hi}]")
        mlo, mhi = _kernels.merge_intervals(
            np.append(self._lo, lo), np.append(self._hi, hi), tol)
        return IntervalSet(mlo, mhi)

    def measure(self) -> float:
        return float(np.sum(self._hi - self._lo))

    def contains(self, r: float) -> bool:
        i = int(np.searchsorted(self._lo, r, side="right")) - 1
        return i >= 0 and r <= self._hi[i]

    def __len__(self) -> int:
        return self._lo.size

    def __repr__(self) -> str:
        return f"IntervalSet({self.intervals!r})"

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi


def interval_union_insert(s: IntervalSet, lo: float, hi: float) -> IntervalSet:
    return s.insert(lo, hi)


# ---------------------------------------------------------------------------
# interval sets on the circle
# ---------------------------------------------------------------------------

def _normalize_angle(a: float) -> float:
    a = a % TWO_PI
    return a if a >= 0 else a + TWO_PI


class CircularIntervalSet:
    """Disjoint arcs on R/2piZ; a set covering the whole circle reports 2pi."""

    __slots__ = ("_arcs",)

    def __init__(self, arcs: tuple[tuple[float, float], ...] = ()):
        self._arcs = arcs

    @classmethod
    def full(cls) -> "CircularIntervalSet":
        return cls(((0.0, TWO_PI),))

    @classmethod
    def from_arcs(cls, arcs, tol: float = MERGE_TOL) -> "CircularIntervalSet":
        """Union of (start, length) arcs; start anywhere, length in (0, 2pi]."""
        lo_list = []
        hi_list = []
        for start, length in arcs:
            if not (0 < length <= TWO_PI + tol):
                raise GeometryError(f"arc length {length} outside (0, 2pi]")
            if length >= TWO_PI - tol:
                return cls.full()
            s = _normalize_angle(start)
            e = s + length
            if e > TWO_PI:
                lo_list.extend([s, 0.0])
                hi_list.extend([TWO_PI, e - TWO_PI])
            else:
                lo_list.append(s)
                hi_list.append(e)
        if not lo_list:
            return cls()
        mlo, mhi = _kernels.merge_intervals(
            np.array(lo_list), np.array(hi_list), tol)
        total = float(np.sum(mhi - mlo))
        if total >= TWO_PI - tol:
            return cls.full()
        # rejoin across the 0 = 2pi seam
        segs = list(zip(mlo.tolist(), mhi.tolist()))
        if len(segs) >= 2 and segs[0][0] <= tol and segs[-1][1] >= TWO_PI - tol:
            first = segs.pop(0)
            last = segs.pop()
            segs.append((last[0], last[1] - last[0] + (first[1] - first[0])))
            arcs_out = tuple((s, e - s) for s, e in segs[:-1]) + (segs[-1],)
        else:
            arcs_out = tuple((s, e - s) for s, e in segs)
        return cls(tuple(sorted(arcs_out)))

    @property
    def arcs(self) -> tuple[tuple[float, float], ...]:
        return self._arcs

    def is_full(self) -> bool:
        return len(self._arcs) == 1 and self._arcs[0][1] >= TWO_PI

    def measure(self) -> float:
        if self.is_full():
            return TWO_PI
        return float(sum(length for _, length in self._arcs))

    def insert(self, lo: float, length: float,
               tol: float = MERGE_TOL) -> "CircularIntervalSet":
        if not (0 < length <= TWO_PI):
            raise GeometryError(f"arc length {length} outside (0, 2pi]")
        if self.is_full():
            return self
        return CircularIntervalSet.from_arcs(
            list(self._arcs) + [(lo, length)], tol)

    def contains(self, angle: float) -> bool:
        a = _normalize_angle(angle)
        for start, length in self._arcs:
            if (a - start) % TWO_PI <= length:
                return True
        return False

    def __len__(self) -> int:
        return len(self._arcs)

    def __repr__(self) -> str:
        return f"CircularIntervalSet({self._arcs!r})"


def circular_union_insert(s: CircularIntervalSet, lo: float,
                          length: float) -> CircularIntervalSet:
    return s.insert(lo, length)


# ---------------------------------------------------------------------------
# angular hulls
# ---------------------------------------------------------------------------

FULL = "full"


def angular_hull(sq: Square, a: Point2):
    """Directions {(x - a)/|x - a| : x in sq} as (start, length), or FULL.

    Exact for convex bodies: when a is outside the closed square the hull is
    the minor arc spanned by the extreme corner directions.
    """
    if sq.contains(a):
        return FULL
    pts = sq.corners()
    ang = np.arctan2(pts[:, 1] - a.y, pts[:, 0] - a.x) % TWO_PI
    ang = np.sort(ang)
    gaps = np.diff(np.append(ang, ang[0] + TWO_PI))
    k = int(np.argmax(gaps))
    width = TWO_PI - gaps[k]
    start = ang[(k + 1) % 4]
    return (float(start), float(width))


def hull_arcs_of_squares(x0: np.ndarray, y0: np.ndarray, side: float,
                         a: Point2):
    """Vectorized angular_hull for many equal-side squares.

    Returns (starts, widths) or FULL if the vantage lies in some square.
    """
    inside = ((x0 <= a.x) & (a.x <= x0 + side)
              & (y0 <= a.y) & (a.y <= y0 + side))
    if np.any(inside):
        return FULL
    cx = np.stack([x0, x0 + side, x0 + side, x0], axis=1) - a.x
    cy = np.stack([y0, y0, y0 + side, y0 + side], axis=1) - a.y
    ang = np.sort(np.arctan2(cy, cx) % TWO_PI, axis=1)
    gaps = np.diff(np.concatenate([ang, ang[:, :1] + TWO_PI], axis=1), axis=1)
    k = np.argmax(gaps, axis=1)
    widths = TWO_PI - gaps[np.arange(len(k)), k]
    starts = ang[np.arange(len(k)), (k + 1) % 4]
    return starts, widths
