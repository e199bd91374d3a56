"""Numeric inner loops, with numba-compiled and pure-numpy variants.

The numba path is the default.  Set the environment variable
``FAVLAB_NO_NUMBA=1`` (before import) to force the pure-numpy fallback,
e.g. for debugging or on platforms where numba is unavailable.  Both
paths compute identical results; ``benchmarks/bench_kernels.py`` compares
their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("FAVLAB_NO_NUMBA", "").strip() not in ("", "0")

if not _DISABLED:
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        _DISABLED = True

NUMBA_ENABLED = not _DISABLED


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def union_measure_np(lo: np.ndarray, hi: np.ndarray, tol: float) -> float:
    """Total length of the union of closed intervals [lo_i, hi_i].

    Intervals whose gap is <= tol are treated as touching.
    """
    if lo.size == 0:
        return 0.0
    order = np.argsort(lo, kind="stable")
    lo = lo[order]
    hi = hi[order]
    # running maximum of right endpoints seen before each interval
    run = np.maximum.accumulate(hi)
    starts = np.empty(lo.size, dtype=bool)
    starts[0] = True
    starts[1:] = lo[1:] > run[:-1] + tol
    idx = np.flatnonzero(starts)
    seg_lo = lo[idx]
    seg_hi = np.empty(idx.size)
    seg_hi[:-1] = run[idx[1:] - 1]
    seg_hi[-1] = run[-1]
    return float(np.sum(seg_hi - seg_lo))


def merge_intervals_np(lo: np.ndarray, hi: np.ndarray, tol: float):
    """Merge intervals into a disjoint sorted family; returns (lo, hi) arrays."""
    if lo.size == 0:
        return lo.copy(), hi.copy()
    order = np.argsort(lo, kind="stable")
    lo = lo[order]
    hi = hi[order]
    run = np.maximum.accumulate(hi)
    starts = np.empty(lo.size, dtype=bool)
    starts[0] = True
    starts[1:] = lo[1:] > run[:-1] + tol
    idx = np.flatnonzero(starts)
    seg_lo = lo[idx]
    seg_hi = np.empty(idx.size)
    seg_hi[:-1] = run[idx[1:] - 1]
    seg_hi[-1] = run[-1]
    return seg_lo, seg_hi


def projection_measures_np(x0, y0, side, thetas, tol) -> np.ndarray:
    """Union measure of the theta-projections of axis-aligned squares.

    x0, y0: lower-left corners; side: common side length.
    Returns one measure per angle.
    """
    out = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        c = np.cos(th)
        s = np.sin(th)
        lo = x0 * c + y0 * s + side * (min(c, 0.0) + min(s, 0.0))
        hi = lo + side * (abs(c) + abs(s))
        out[i] = union_measure_np(lo, hi, tol)
    return out


def riesz_energy_np(px, py, w, s, floor) -> float:
    """Sum_{i != j} w_i w_j max(|p_i - p_j|, floor)^(-s), blocked."""
    m = px.size
    total = 0.0
    block = 2048
    for a in range(0, m, block):
        b = min(a + block, m)
        dx = px[a:b, None] - px[None, :]
        dy = py[a:b, None] - py[None, :]
        d = np.sqrt(dx * dx + dy * dy)
        np.maximum(d, floor, out=d)
        kern = d ** (-s)
        kern[np.arange(a, b) - a, np.arange(a, b)] = 0.0
        total += float(np.sum((w[a:b, None] * w[None, :]) * kern))
    return total


def _k2_windows(t, delta, reach, k2min, k2max):
    """Integer k2 ranges [a, b] with |t - k2*delta| <= reach, clipped."""
    a = np.ceil((t - reach) / delta).astype(np.int64)
    b = np.floor((t + reach) / delta).astype(np.int64)
    np.clip(a, k2min, k2max + 1, out=a)
    np.clip(b, k2min - 1, k2max, out=b)
    return a, b


def f_delta_stats_np(px, py, delta, c_mult, dir_mask, k2min, k2max):
    """Per-line richness sweep over the whole line family.

    For every direction k1 with dir_mask[k1], counts points within
    c_mult*delta of each line ell_{k1,k2} and accumulates the sum of
    squared counts plus a dyadic histogram of the counts
    (hist[j] = number of lines with 2^(j-1) < f <= 2^j, f >= 1).
    """
    n_dir = dir_mask.size
    nk2 = k2max - k2min + 1
    reach = c_mult * delta
    sum_sq = 0.0
    nlevels = max(1, int(np.ceil(np.log2(max(px.size, 2)))) + 2)
    hist = np.zeros(nlevels, dtype=np.int64)
    diff = np.empty(nk2 + 1, dtype=np.int64)
    for k1 in range(n_dir):
        if not dir_mask[k1]:
            continue
        th = k1 * delta
        t = -np.sin(th) * px + np.cos(th) * py
        a, b = _k2_windows(t, delta, reach, k2min, k2max)
        ok = a <= b
        diff[:] = 0
        np.add.at(diff, a[ok] - k2min, 1)
        np.add.at(diff, b[ok] - k2min + 1, -1)
        cnt = np.cumsum(diff[:-1])
        sum_sq += float(np.sum(cnt.astype(np.float64) ** 2))
        pos = cnt[cnt > 0]
        if pos.size:
            lev = np.ceil(np.log2(pos)).astype(np.int64)
            np.add.at(hist, np.clip(lev, 0, nlevels - 1), 1)
    return sum_sq, hist


def line_counts_table_np(px, py, delta, c_mult, n_dir, k2min, k2max):
    """Dense table cnt[k1, k2-k2min] of point counts near each family line."""
    nk2 = k2max - k2min + 1
    out = np.zeros((n_dir, nk2), dtype=np.int32)
    reach = c_mult * delta
    diff = np.empty(nk2 + 1, dtype=np.int32)
    for k1 in range(n_dir):
        th = k1 * delta
        t = -np.sin(th) * px + np.cos(th) * py
        a, b = _k2_windows(t, delta, reach, k2min, k2max)
        ok = a <= b
        diff[:] = 0
        np.add.at(diff, a[ok] - k2min, 1)
        np.add.at(diff, b[ok] - k2min + 1, -1)
        out[k1] = np.cumsum(diff[:-1])
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _union_measure_sorted_nb(lo, hi, tol):
        total = 0.0
        cur_lo = lo[0]
        cur_hi = hi[0]
        for i in range(1, lo.size):
            if lo[i] > cur_hi + tol:
                total += cur_hi - cur_lo
                cur_lo = lo[i]
                cur_hi = hi[i]
            elif hi[i] > cur_hi:
                cur_hi = hi[i]
        total += cur_hi - cur_lo
        return total

    @njit(cache=True)
    def union_measure_nb(lo, hi, tol):
        if lo.size == 0:
            return 0.0
        order = np.argsort(lo)
        return _union_measure_sorted_nb(lo[order], hi[order], tol)

    @njit(parallel=True, cache=True)
    def projection_measures_nb(x0, y0, side, thetas, tol):
        out = np.empty(thetas.size)
        for i in prange(thetas.size):
            c = np.cos(thetas[i])
            s = np.sin(thetas[i])
            lo = x0 * c + y0 * s + side * (min(c, 0.0) + min(s, 0.0))
            hi = lo + side * (abs(c) + abs(s))
            order = np.argsort(lo)
            out[i] = _union_measure_sorted_nb(lo[order], hi[order], tol)
        return out

    @njit(parallel=True, cache=True)
    def riesz_energy_nb(px, py, w, s, floor):
        m = px.size
        total = 0.0
        for i in prange(m):
            acc = 0.0
            for j in range(m):
                if j == i:
                    continue
                dx = px[i] - px[j]
                dy = py[i] - py[j]
                d = np.sqrt(dx * dx + dy * dy)
                if d < floor:
                    d = floor
                acc += w[j] * d ** (-s)
            total += w[i] * acc
        return total

    @njit(cache=True)
    def f_delta_stats_nb(px, py, delta, c_mult, dir_mask, k2min, k2max):
        n_dir = dir_mask.size
        nk2 = k2max - k2min + 1
        reach = c_mult * delta
        sum_sq = 0.0
        nlevels = max(1, int(np.ceil(np.log2(max(px.size, 2)))) + 2)
        hist = np.zeros(nlevels, dtype=np.int64)
        diff = np.zeros(nk2 + 1, dtype=np.int64)
        for k1 in range(n_dir):
            if not dir_mask[k1]:
                continue
            th = k1 * delta
            sn = np.sin(th)
            cs = np.cos(th)
            for i in range(nk2 + 1):
                diff[i] = 0
            for p in range(px.size):
                t = -sn * px[p] + cs * py[p]
                a = int(np.ceil((t - reach) / delta))
                b = int(np.floor((t + reach) / delta))
                if a < k2min:
                    a = k2min
                if b > k2max:
                    b = k2max
                if a <= b:
                    diff[a - k2min] += 1
                    diff[b - k2min + 1] -= 1
            cnt = 0
            for i in range(nk2):
                cnt += diff[i]
                if cnt > 0:
                    sum_sq += float(cnt) * float(cnt)
                    lev = int(np.ceil(np.log2(cnt)))
                    if lev < 0:
                        lev = 0
                    if lev > nlevels - 1:
                        lev = nlevels - 1
                    hist[lev] += 1
        return sum_sq, hist

    @njit(cache=True)
    def line_counts_table_nb(px, py, delta, c_mult, n_dir, k2min, k2max):
        nk2 = k2max - k2min + 1
        out = np.zeros((n_dir, nk2), dtype=np.int32)
        reach = c_mult * delta
        diff = np.zeros(nk2 + 1, dtype=np.int32)
        for k1 in range(n_dir):
            th = k1 * delta
            sn = np.sin(th)
            cs = np.cos(th)
            for i in range(nk2 + 1):
                diff[i] = 0
            for p in range(px.size):
                t = -sn * px[p] + cs * py[p]
                a = int(np.ceil((t - reach) / delta))
                b = int(np.floor((t + reach) / delta))
                if a < k2min:
                    a = k2min
                if b > k2max:
                    b = k2max
                if a <= b:
                    diff[a - k2min] += 1
                    diff[b - k2min + 1] -= 1
            cnt = 0
            for i in range(nk2):
                cnt += diff[i]
                out[k1, i] = cnt
        return out

    projection_measures = projection_measures_nb
    riesz_energy_sum = riesz_energy_nb
    f_delta_stats = f_delta_stats_nb
    line_counts_table = line_counts_table_nb
else:
    projection_measures = projection_measures_np
    riesz_energy_sum = riesz_energy_np
    f_delta_stats = f_delta_stats_np
    line_counts_table = line_counts_table_np

union_measure = union_measure_np
merge_intervals = merge_intervals_np
