"""Certifiers for discrete set classes (dimension-alpha sets unconcentrated
on lines, unrectifiable one-sets), Riesz energy, box-counting dimension,
and well-distributed measures on the line or circle.

All "for every ball / line / rectangle" conditions are checked over a
deterministic design plus seeded random samples: a certificate is sound
for the sampled family only, and the seed and sample sizes are part of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .geometry import IntervalSet
from .ifs import ResourceBudgetError
from .visibility import PointCloud

N_RANDOM = 10_000
KAPPA_GRID = 0.01


class UndefinedDimensionError(ArithmeticError):
    """Box counting degenerated to a single occupied cell at all scales."""


@dataclass
class CheckResult:
    passed: bool
    margin: float           # worst count / allowed bound; <= 1 means pass
    witness: dict = field(default_factory=dict)


@dataclass
class SetCertificate:
    alpha: float
    C: float
    delta: float
    checks: dict[str, CheckResult]
    kappa_estimate: float | None = None
    seed: int = 0
    n_random: int = N_RANDOM

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json(self) -> str:
        return json.dumps({
            "alpha": self.alpha,
            "C": self.C,
            "delta": self.delta,
            "passes": {k: v.passed for k, v in self.checks.items()},
            "kappa_estimate": self.kappa_estimate,
            "worst_witnesses": [
                {"check": k, "margin": v.margin, **v.witness}
                for k, v in self.checks.items()],
            "seed": self.seed,
            "n_random": self.n_random,
        }, indent=2)


def _bbox(pts: np.ndarray):
    return pts.min(axis=0), pts.max(axis=0)


def _diameter(pts: np.ndarray) -> float:
    lo, hi = _bbox(pts)
    return float(np.hypot(*(hi - lo))) or 1.0


def _ball_check(A: PointCloud, alpha: float, C: float,
                rng: np.random.Generator, n_random: int) -> CheckResult:
    pts = A.points
    m = len(pts)
    tree = cKDTree(pts)
    diam = _diameter(pts)
    levels = max(1, math.ceil(math.log2(diam / A.delta)))
    radii = A.delta * 2.0 ** np.arange(levels + 1)
    lo, hi = _bbox(pts)
    extra = rng.uniform(lo - A.delta, hi + A.delta,
                        size=(max(1, n_random // (levels + 1)), 2))
    worst = CheckResult(True, 0.0)
    for r in radii:
        for centers, kind in ((pts, "on-set"), (extra, "random")):
            counts = tree.query_ball_point(centers, r, return_length=True)
            bound = C * r ** alpha * m
            i = int(np.argmax(counts))
            margin = float(counts[i] / bound)
            if margin > worst.margin:
                worst = CheckResult(margin <= 1.0, float(margin), {
                    "kind": "ball", "center": centers[i].tolist(),
                    "radius": float(r), "count": int(counts[i]),
                    "design": kind})
    return worst


def _segment_area(t: np.ndarray, radius: float) -> np.ndarray:
    """Area of the part of a radius-ball lying at signed coordinate > t."""
    u = np.clip(t / radius, -1.0, 1.0)
    return radius ** 2 * (np.arccos(u) - u * np.sqrt(1.0 - u ** 2))


def _strip_masses(dist: np.ndarray, radius: float,
                  halfwidth: float) -> np.ndarray:
    """Fraction of each delta-ball inside a strip, given center distances.

    The certified object is the union of delta-balls around the cloud, so
    line concentration is ball mass caught by the 1/C-strip, not a point
    count (a bare count through a finite column would overshoot the strip
    width and misreport thin structured clouds).
    """
    inner = _segment_area(dist - halfwidth, radius)
    outer = _segment_area(dist + halfwidth, radius)
    return (inner - outer) / (math.pi * radius ** 2)


def _line_check(A: PointCloud, C: float, rng: np.random.Generator,
                n_random: int) -> CheckResult:
    pts = A.points
    m = len(pts)
    halfwidth = 1.0 / C
    bound = m / 10.0
    worst = CheckResult(True, 0.0)
    # deterministic design: axis and diagonal lines through every point
    fixed_thetas = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4]
    n_theta = max(1, int(math.sqrt(n_random)))
    random_thetas = rng.uniform(0, math.pi, n_theta)
    scale = _diameter(pts)
    for theta in fixed_thetas + random_thetas.tolist():
        t = -math.sin(theta) * pts[:, 0] + math.cos(theta) * pts[:, 1]
        if theta in fixed_thetas:
            offsets = np.unique(t)
        else:
            center = 0.5 * (t.min() + t.max())
            offsets = rng.uniform(center - scale, center + scale,
                                  n_random // n_theta)
        masses = np.array([
            float(np.sum(_strip_masses(np.abs(t - off), A.delta, halfwidth)))
            for off in offsets])
        i = int(np.argmax(masses))
        margin = float(masses[i] / bound)
        if margin > worst.margin:
            worst = CheckResult(margin <= 1.0, float(margin), {
                "kind": "line", "theta": float(theta),
                "offset": float(offsets[i]), "mass": float(masses[i])})
    return worst


def check_discrete_alpha_set(A: PointCloud, alpha: float, C: float,
                             seed: int = 0,
                             n_random: int = N_RANDOM) -> SetCertificate:
    """Certify the delta-separated, cardinality-window, ball-growth, and
    line-unconcentration conditions over a deterministic plus seeded design."""
    if len(A) == 0:
        raise ValueError("empty point cloud")
    rng = np.random.default_rng(seed)
    m = len(A)
    checks: dict[str, CheckResult] = {}

    tree = cKDTree(A.points)
    pairs = tree.query_pairs(A.delta * (1 - 1e-9))
    checks["separation"] = CheckResult(
        len(pairs) == 0, float(bool(pairs)),
        {"kind": "separation", "violating_pairs": len(pairs)})

    lo_card = A.delta ** (-alpha) / C
    hi_card = C * A.delta ** (-alpha)
    card_margin = max(lo_card / m, m / hi_card)
    checks["cardinality"] = CheckResult(
        lo_card <= m <= hi_card, float(card_margin),
        {"kind": "cardinality", "size": m,
         "window": [lo_card, hi_card]})

    checks["ball"] = _ball_check(A, alpha, C, rng, n_random)
    checks["line"] = _line_check(A, C, rng, n_random)
    return SetCertificate(alpha, C, A.delta, checks, seed=seed,
                          n_random=n_random)


def _rectangle_census(A: PointCloud, rng: np.random.Generator,
                      n_centers: int = 200, n_orient: int = 64):
    """Counts |A n R| over dyadic-dimension rotated rectangles.

    Returns (counts[orient, center, i2, i1], radii) where the rectangle at
    (i1, i2) has short side delta*2^i1 and long side delta*2^i2 and counts
    are cumulative over both indices.
    """
    pts = A.points
    m = len(pts)
    diam = _diameter(pts)
    levels = max(1, math.ceil(math.log2(diam / A.delta))) + 1
    half = n_centers // 2
    idx = rng.choice(m, size=min(half, m), replace=False)
    lo, hi = _bbox(pts)
    centers = np.concatenate([
        pts[idx],
        rng.uniform(lo, hi, size=(n_centers - len(idx), 2))])
    counts = np.zeros((n_orient, len(centers), levels + 1, levels + 1),
                      dtype=np.int64)
    for j in range(n_orient):
        phi = j * math.pi / n_orient
        c, s = math.cos(phi), math.sin(phi)
        u = pts[:, 0] * c + pts[:, 1] * s        # along long axis
        v = -pts[:, 0] * s + pts[:, 1] * c
        uc = centers[:, 0] * c + centers[:, 1] * s
        vc = -centers[:, 0] * s + centers[:, 1] * c
        du = np.abs(u[None, :] - uc[:, None])
        dv = np.abs(v[None, :] - vc[:, None])
        with np.errstate(divide="ignore"):
            iu = np.ceil(np.log2(np.maximum(2 * du / A.delta, 1.0))).astype(int)
            iv = np.ceil(np.log2(np.maximum(2 * dv / A.delta, 1.0))).astype(int)
        np.clip(iu, 0, levels, out=iu)
        np.clip(iv, 0, levels, out=iv)
        flat = (np.arange(len(centers))[:, None] * (levels + 1) + iu
                ) * (levels + 1) + iv
        hist = np.bincount(flat.ravel(),
                           minlength=len(centers) * (levels + 1) ** 2)
        counts[j] = hist.reshape(len(centers), levels + 1, levels + 1)
    counts = counts.cumsum(axis=2).cumsum(axis=3)
    radii = A.delta * 2.0 ** np.arange(levels)
    return counts[:, :, :levels, :levels], radii


def check_unrectifiable_one_set(A: PointCloud, C: float, seed: int = 0,
                                n_random: int = N_RANDOM) -> SetCertificate:
    """Alpha=1 certificate plus the rectangle condition and the largest
    kappa (0.01 grid) at which it holds over the sampled rectangles."""
    cert = check_discrete_alpha_set(A, 1.0, C, seed=seed, n_random=n_random)
    rng = np.random.default_rng(seed + 1)
    counts, radii = _rectangle_census(A, rng)
    m = len(A)
    levels = len(radii)
    i2g, i1g = np.meshgrid(np.arange(levels), np.arange(levels),
                           indexing="ij")
    valid = i1g <= i2g
    r1 = radii[i1g]
    r2 = radii[i2g]
    frac = counts / (C * m)          # need frac <= r1^kappa * r2^(1-kappa)
    worst_margin = 0.0
    witness: dict = {}
    kappa_min = 1.0
    for j in range(counts.shape[0]):
        for ci in range(counts.shape[1]):
            f = frac[j, ci]
            # kappa = 0 bound: frac <= r2
            marg = np.where(valid, f / r2, 0.0)
            jj = int(np.argmax(marg))
            if marg.flat[jj] > worst_margin:
                worst_margin = float(marg.flat[jj])
                witness = {"kind": "rectangle",
                           "orientation": j * math.pi / counts.shape[0],
                           "center_index": ci,
                           "r1": float(r1.flat[jj]), "r2": float(r2.flat[jj]),
                           "count": int(counts[j, ci].flat[jj])}
            # largest kappa with frac <= r1^k r2^(1-k); bound decreasing in k
            with np.errstate(divide="ignore", invalid="ignore"):
                k_r = np.log(f / r2) / np.log(r1 / r2)
            k_r = np.where(valid & (f > 0) & (r1 < r2), k_r, np.inf)
            k_r = np.where(valid & (f > 0) & (r1 == r2),
                           np.where(f <= r1, np.inf, -np.inf), k_r)
            kappa_min = min(kappa_min, float(np.min(k_r)))
    passed = worst_margin <= 1.0
    if not passed:
        kappa = 0.0
    elif math.isinf(kappa_min):
        kappa = 0.5          # every sampled rectangle is kappa-independent
    else:
        kappa = max(0.0, min(0.5,
                             math.floor(kappa_min / KAPPA_GRID) * KAPPA_GRID))
    cert.checks["rectangle"] = CheckResult(passed, worst_margin, witness)
    cert.kappa_estimate = kappa
    return cert


def riesz_energy(A: PointCloud, s: float) -> float:
    """Off-diagonal weighted energy sum with the kernel floored at the
    cloud's separation scale."""
    if s <= 0:
        raise ValueError("s must be positive")
    if A.weights is None:
        w = np.full(len(A), 1.0 / len(A))
    else:
        w = A.weights
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be normalized to total mass 1")
    return float(_kernels.riesz_energy_sum(
        np.ascontiguousarray(A.x), np.ascontiguousarray(A.y),
        np.ascontiguousarray(w), float(s), float(A.delta)))


def _covering_count_points(pts: np.ndarray, eps: float) -> int:
    cells = np.floor(pts / eps).astype(np.int64)
    return len(np.unique(cells, axis=0))


def _covering_count_intervals(iv: IntervalSet, eps: float) -> int:
    # cells are half-open [j*eps, (j+1)*eps); count those meeting the
    # interior of the union
    jmin = np.floor(iv.lo / eps).astype(np.int64)
    jmax = (np.ceil(iv.hi / eps) - 1).astype(np.int64)
    total = 0
    prev_end = None
    for a, b in zip(jmin, jmax):
        if prev_end is not None and a <= prev_end:
            a = prev_end + 1
        if b >= a:
            total += int(b - a + 1)
            prev_end = int(b)
        elif prev_end is None:
            prev_end = int(b)
    return total


def box_dimension_estimate(obj, scales) -> float:
    """Least-squares slope of log N(eps) against log(1/eps).

    Scales must be dyadic (powers of two), at least 3 of them, spanning a
    factor of at least 16.
    """
    scales = sorted(float(s) for s in scales)
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    if scales[-1] / scales[0] < 16:
        raise ValueError("scales must span a factor of at least 16")
    for s in scales:
        if abs(math.log2(s) - round(math.log2(s))) > 1e-9:
            raise ValueError(f"scale {s} is not a power of two")
    if isinstance(obj, PointCloud):
        ns = [_covering_count_points(obj.points, e) for e in scales]
    elif isinstance(obj, IntervalSet):
        ns = [_covering_count_intervals(obj, e) for e in scales]
    else:
        raise TypeError("expected a PointCloud or an IntervalSet")
    if all(n <= 1 for n in ns):
        raise UndefinedDimensionError(
            "single occupied cell at every scale")
    slope = np.polyfit(np.log(1.0 / np.array(scales)), np.log(ns), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class WellDistributedResult:
    passed: bool
    worst_interval: tuple[float, float]
    worst_mass: float
    worst_bound: float


def check_well_distributed(positions, weights, delta: float, kappa: float,
                           tau: float, circle: bool = False,
                           budget: int = 20_000_000) -> WellDistributedResult:
    """Exhaustively test mass(I) <= |I|^kappa for every interval I with
    endpoints on the delta/2 grid and delta < |I| < delta^tau.

    For measures on the circle, positions are angles and intervals wrap.
    """
    pos = np.asarray(positions, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValueError("weights must be normalized to total mass 1")
    if not (0 < tau < 1) or not (0 < kappa):
        raise ValueError("need kappa > 0 and tau in (0, 1)")
    max_len = delta ** tau
    g = delta / 2
    if circle:
        period = 2 * math.pi
        pos = pos % period
        order = np.argsort(pos)
        pos_s = np.concatenate([pos[order], pos[order] + period])
        w_s = np.concatenate([w[order], w[order]])
        start_lo, start_hi = 0.0, period
    else:
        order = np.argsort(pos)
        pos_s = pos[order]
        w_s = w[order]
        start_lo = math.floor((pos_s[0] - max_len) / g) * g
        start_hi = pos_s[-1]
    cum = np.concatenate([[0.0], np.cumsum(w_s)])
    starts = np.arange(start_lo, start_hi + g / 2, g)
    n_len = int(math.floor(max_len / g)) - int(math.ceil(delta / g)) + 1
    if starts.size * max(n_len, 1) > budget:
        raise ResourceBudgetError(
            "well-distribution sweep exceeds the interval budget; "
            "reduce the grid or the admissible range")
    worst = WellDistributedResult(True, (0.0, 0.0), 0.0, 1.0)
    worst_ratio = 0.0
    length = math.ceil(delta / g) * g
    while length < max_len:
        if length > delta:
            lo = np.searchsorted(pos_s, starts, side="left")
            hi = np.searchsorted(pos_s, starts + length, side="right")
            masses = cum[hi] - cum[lo]
            bound = length ** kappa
            i = int(np.argmax(masses))
            ratio = masses[i] / bound
            if ratio > worst_ratio:
                worst_ratio = ratio
                worst = WellDistributedResult(
                    ratio <= 1.0, (float(starts[i]), float(starts[i] + length)),
                    float(masses[i]), float(bound))
        length += g
    return worst
