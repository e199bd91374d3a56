"""Homothety iterated function systems: word enumeration, generation-n
squares, similarity dimension, presets, and the generic-word census.

Generations are enumerated in stable lexicographic word order so disk
indices are reproducible across runs.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .geometry import Point2, Square

#: hard cap on the number of generation squares materialized at once
DEFAULT_NODE_BUDGET = 4 ** 10

Word = tuple[int, ...]


class ResourceBudgetError(RuntimeError):
    """A requested computation exceeds the configured size budget."""


class DimensionError(ValueError):
    """Similarity dimension has no root in (0, 2]."""


@dataclass(frozen=True)
class Similitude:
    """Homothety x -> lam * x + z (no rotation); lam = 1 only for the
    identity obtained by composing the empty word."""

    lam: float
    z: tuple[float, float]

    def __post_init__(self):
        if not (0 < self.lam <= 1):
            raise ValueError(f"contraction ratio must be in (0, 1], got {self.lam}")

    def apply(self, p: Point2) -> Point2:
        return Point2(self.lam * p.x + self.z[0], self.lam * p.y + self.z[1])


IDENTITY = Similitude(1.0, (0.0, 0.0))


@dataclass(frozen=True)
class IFSystem:
    maps: tuple[Similitude, ...]
    hull: Square
    osc_asserted: bool = True

    def __post_init__(self):
        if len(self.maps) < 2:
            raise ValueError("an IFS needs at least 2 maps")

    @property
    def s(self) -> int:
        return len(self.maps)

    @property
    def equal_ratios(self) -> bool:
        lams = [m.lam for m in self.maps]
        return all(abs(l - lams[0]) < 1e-15 for l in lams)


@dataclass(frozen=True)
class DiskNode:
    word: Word
    square: Square


class Generation(Sequence):
    """The s^n stage-n squares T_w(J0), in lexicographic word order.

    Stored as corner arrays for bulk geometry; indexing yields DiskNode.
    """

    def __init__(self, sys: IFSystem, n: int, corner_x: np.ndarray,
                 corner_y: np.ndarray, sides: np.ndarray):
        self.sys = sys
        self.n = n
        self.corner_x = corner_x
        self.corner_y = corner_y
        self.sides = sides

    @property
    def side(self) -> float:
        """Common side length (equal-ratio systems)."""
        return float(self.sides[0])

    def __len__(self) -> int:
        return len(self.corner_x)

    def word_of(self, i: int) -> Word:
        s = self.sys.s
        letters = []
        for _ in range(self.n):
            i, r = divmod(i, s)
            letters.append(r + 1)
        return tuple(reversed(letters))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        sq = Square(Point2(float(self.corner_x[i]), float(self.corner_y[i])),
                    float(self.sides[i]))
        return DiskNode(self.word_of(i), sq)

    def centers(self) -> np.ndarray:
        return np.stack([self.corner_x + self.sides / 2,
                         self.corner_y + self.sides / 2], axis=1)


def similarity_dimension(sys: IFSystem, tol: float = 1e-12) -> float:
    """Unique alpha in (0, 2] with sum(lam_i^alpha) = 1, by bisection."""
    lams = np.array([m.lam for m in sys.maps])

    def g(a):
        return float(np.sum(lams ** a)) - 1.0

    if g(2.0) > tol:
        raise DimensionError(
            "sum lam_i^2 > 1: similarity dimension exceeds 2")
    lo, hi = 1e-9, 2.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    if abs(g(alpha)) > 1e-9:
        raise DimensionError("no root of sum lam_i^alpha = 1 in (0, 2]")
    return alpha


def compose_word(sys: IFSystem, w: Word) -> Similitude:
    """T_w = T_{w_n} o ... o T_{w_1} (first letter applied first)."""
    lam = 1.0
    zx = zy = 0.0
    for letter in w:
        if not 1 <= letter <= sys.s:
            raise ValueError(f"letter {letter} outside 1..{sys.s}")
        m = sys.maps[letter - 1]
        lam, zx, zy = m.lam * lam, m.lam * zx + m.z[0], m.lam * zy + m.z[1]
    return Similitude(lam, (zx, zy))


def generate_generation(sys: IFSystem, n: int,
                        budget: int = DEFAULT_NODE_BUDGET) -> Generation:
    """All s^n stage-n squares, lexicographic in the word."""
    if n < 0:
        raise ValueError("generation index must be >= 0")
    count = sys.s ** n
    if count > budget:
        raise ResourceBudgetError(
            f"generation {n} needs {count} nodes; budget is {budget} "
            f"(raise the cap to at least {count} to proceed)")
    lam_arr = np.array([m.lam for m in sys.maps])
    zx_arr = np.array([m.z[0] for m in sys.maps])
    zy_arr = np.array([m.z[1] for m in sys.maps])
    # composed maps over all words, extending by the last letter
    lam = np.ones(1)
    zx = np.zeros(1)
    zy = np.zeros(1)
    for _ in range(n):
        lam = (lam[:, None] * lam_arr[None, :]).ravel()
        zx = (zx[:, None] * lam_arr[None, :] + zx_arr[None, :]).ravel()
        zy = (zy[:, None] * lam_arr[None, :] + zy_arr[None, :]).ravel()
    cx = lam * sys.hull.corner.x + zx
    cy = lam * sys.hull.corner.y + zy
    sides = lam * sys.hull.side
    return Generation(sys, n, cx, cy, sides)


def subword_census(sys: IFSystem, N: int, L: int, samples: int = 100_000,
                   seed: int = 0) -> float:
    """Fraction of words in W_N that do NOT contain every word of W_L as a
    contiguous subword (the non-generic fraction).

    Exact enumeration when s^N <= 4^6; otherwise a fixed-seed Monte-Carlo
    estimate over `samples` uniform words.
    """
    if not (N >= L >= 1):
        raise ValueError("need N >= L >= 1")
    s = sys.s
    needed = s ** L

    def is_generic(word) -> bool:
        if N - L + 1 < needed:
            return False
        seen = {tuple(word[i:i + L]) for i in range(N - L + 1)}
        return len(seen) == needed

    if s ** N <= 4 ** 6:
        total = s ** N
        bad = sum(not is_generic(w)
                  for w in itertools.product(range(s), repeat=N))
        return bad / total
    rng = np.random.default_rng(seed)
    words = rng.integers(0, s, size=(samples, N))
    bad = sum(not is_generic(tuple(row)) for row in words)
    return bad / samples


# ---------------------------------------------------------------------------
# presets and the JSON description format
# ---------------------------------------------------------------------------

def four_corner(corner: tuple[float, float] = (0.0, 0.0),
                side: float = 1.0) -> IFSystem:
    """The 4-corner Cantor system: ratio-1/4 homotheties keeping the four
    corner squares of the hull."""
    cx, cy = corner
    q = 3.0 * side / 4.0
    maps = []
    for dy in (0.0, q):
        for dx in (0.0, q):
            # z places T_i(hull) at the corner offsets; solve z from
            # corner/4 + z = corner + offset
            maps.append(Similitude(0.25, (0.75 * cx + dx, 0.75 * cy + dy)))
    # reorder to lexicographic by (dx, dy) blocks: keep (0,0),(q,0),(0,q),(q,q)
    return IFSystem(tuple(maps), Square(Point2(cx, cy), side), True)


PRESETS = {
    # unit-square 4-corner set
    "fourcorner": lambda: four_corner(),
    # translated copy inside the annulus B(0,100) \ B(0,1/100), center (2,2)
    "fourcorner-annulus": lambda: four_corner(corner=(1.5, 1.5)),
    # dilated copy filling [1,20]^2, for the projective-bridge fixtures
    "fourcorner-wide": lambda: four_corner(corner=(1.0, 1.0), side=19.0),
}


def preset(name: str) -> IFSystem:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def ifs_from_dict(d: dict) -> IFSystem:
    maps = tuple(Similitude(m["lambda"], tuple(m["z"])) for m in d["maps"])
    h = d["hull"]
    hull = Square(Point2(*h["corner"]), h["side"])
    return IFSystem(maps, hull, bool(d.get("osc", True)))


def load_ifs(path: str) -> IFSystem:
    with open(path) as fh:
        return ifs_from_dict(json.load(fh))


def resolve_ifs(spec: str) -> IFSystem:
    """Preset name or path to a JSON description file."""
    if spec in PRESETS:
        return preset(spec)
    return load_ifs(spec)
