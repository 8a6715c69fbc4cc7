"""Instance pools: the relation instances visible from a finite set of points.

Every S_{x,y} is the image of a 5-tuple (0, ∞, 1, x, y), and its five terms are
the images of the five faces.  So for a point set P containing 0, ∞ and 1, the
instances ⟨φ⟩·S_{z1,z2} obtained by canonicalizing ordered 5-tuples of P form a
family closed under the argument maps of S (inversion, 1 - x, and the ratios).
Growing P is the "depth" knob.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from ..bloch import s_relation
from ..configurations import INFINITY, phi, point
from ..fields import ONE_CLASS, square_class

DEFAULT_MAX_COLUMNS = 60000
DEFAULT_MAX_POINTS = 11


class PoolTooLarge(RuntimeError):
    def __init__(self, columns: int, bound: int):
        super().__init__(f"instance pool has {columns} columns, above the configured bound {bound}")
        self.columns = columns
        self.bound = bound


def _zero_one(like):
    one = like / like
    return one - one, one


@dataclass
class InstancePool:
    """Points (with 0, ∞, 1 always present) and optional multiplier classes."""

    points: tuple
    multipliers: tuple = (ONE_CLASS,)
    depth: int = 0
    max_columns: int = DEFAULT_MAX_COLUMNS
    _keys: list | None = field(default=None, repr=False)
    _origins: list | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, values, like=None, **kw) -> "InstancePool":
        vals = [v for v in values if v is not None]
        like = like if like is not None else (vals[0] if vals else None)
        if like is None:
            from fractions import Fraction

            like = Fraction(1)
        zero, one = _zero_one(like)
        pts = [point(zero), INFINITY, point(one)]
        for v in values:
            p = point(v)
            if p not in pts:
                pts.append(p)
        return cls(tuple(pts), **kw)

    def column_count_bound(self) -> int:
        n = len(self.points)
        return n * (n - 1) * (n - 2) * (n - 3) * (n - 4) * len(self.multipliers) if n >= 5 else 0

    def keys(self):
        """Distinct (class, z1, z2) triples, in a deterministic order."""
        if self._keys is not None:
            return self._keys
        bound = self.column_count_bound()
        if bound > self.max_columns:
            raise PoolTooLarge(bound, self.max_columns)
        pts = self.points
        n = len(pts)
        phis = {}
        classes = {}
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for k in range(n):
                    if k != i and k != j:
                        phis[i, j, k] = phi(pts[i], pts[j], pts[k])
        seen = {}
        for t in permutations(range(n), 5):
            i, j, k, a, b = t
            p2 = phis[i, j, k]
            c = classes.get((i, j, k))
            if c is None:
                c = classes[i, j, k] = square_class(p2)
            z1 = phis[i, j, a] / p2
            z2 = phis[i, j, b] / p2
            for m, h in enumerate(self.multipliers):
                key = (c * h, z1, z2)
                if key not in seen:
                    seen[key] = (t, m)
        self._keys = list(seen)
        self._origins = list(seen.values())
        return self._keys

    def origins(self):
        """For each key, the first (5-tuple of point indices, multiplier index) producing it."""
        self.keys()
        return self._origins

    def columns(self):
        """Flat RP vectors ⟨c⟩ S_{z1,z2} for each key."""
        cache = {}
        out = []
        for c, z1, z2 in self.keys():
            s = cache.get((z1, z2))
            if s is None:
                s = cache[z1, z2] = s_relation(z1, z2).flat
            out.append({(g, c * k): n for (g, k), n in s.items()})
        return out

    def describe(self) -> dict:
        return {
            "depth": self.depth,
            "points": [repr(p) for p in self.points],
            "multipliers": len(self.multipliers),
            "column_bound": self.max_columns,
        }


def candidate_points(seeds, depth: int):
    """Priority-ordered points for a direct search at the given depth.

    depth 1: the seeds and -1; depth 2: adds negatives and inverses;
    depth 3: adds the remaining images under x ↦ 1 - x, 1/(1 - x), x/(x - 1), (x - 1)/x.
    """
    seeds = [s for s in seeds if s is not None]
    like = seeds[0] if seeds else None
    out = []

    def push(v):
        if v is None:
            return
        if v == 0 or v == 1:
            return
        if all(v != w for w in out):
            out.append(v)

    for s in seeds:
        push(s)
    if like is not None:
        push(-(like / like))
    if depth >= 2:
        for s in list(seeds):
            push(-s)
            push(1 / s)
    if depth >= 3:
        for s in list(seeds):
            one = s / s
            push(one - s)
            push(one / (one - s))
            push(s / (s - one))
            push((s - one) / s)
    return out
