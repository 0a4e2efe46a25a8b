"""The skeletal category of finite pointed sets.

Objects are ``n_+ = {*, 1, ..., n}``, morphisms are basepoint-preserving
maps.  A map is *active* when only the basepoint hits the basepoint and
*inert* when every non-basepoint target has exactly one preimage.  Every
map factors essentially uniquely as an inert followed by an active map;
we fix the canonical factorization whose inert part preserves the
relative order of surviving elements.

Maps are stored as the image vector ``(f(1), ..., f(n))`` with ``0``
encoding the basepoint, so composition and enumeration are plain tuple
arithmetic.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from enum import Enum


class MapKind(Enum):
    ACTIVE = "active"
    INERT = "inert"
    NEITHER = "neither"


@dataclass(frozen=True)
class PointedMap:
    """A basepoint-preserving map n_+ -> m_+.

    ``image[i-1]`` is f(i); 0 stands for the basepoint.  The basepoint of
    the source is never stored (it always maps to the basepoint).
    """

    source: int
    target: int
    image: tuple[int, ...]

    def __post_init__(self):
        if self.source < 0 or self.target < 0:
            raise ValueError("pointed objects need n >= 0")
        if len(self.image) != self.source:
            raise ValueError("image vector length must equal the source size")
        for v in self.image:
            if not 0 <= v <= self.target:
                raise ValueError(f"image value {v} outside 0..{self.target}")

    def __call__(self, i: int) -> int:
        """Apply to an element; 0 is the basepoint."""
        if i == 0:
            return 0
        return self.image[i - 1]

    def preimage(self, j: int) -> tuple[int, ...]:
        """Non-basepoint preimages of j, in increasing order."""
        return _preimages(self)[j]

    @property
    def is_active(self) -> bool:
        return 0 not in self.image

    @property
    def is_inert(self) -> bool:
        return all(self.image.count(j) == 1 for j in range(1, self.target + 1))

    @property
    def is_identity(self) -> bool:
        return self.source == self.target and self.image == tuple(range(1, self.source + 1))

    def survivors(self) -> tuple[int, ...]:
        """Source elements not killed by the map, in increasing order."""
        return tuple(i for i in range(1, self.source + 1) if self.image[i - 1] != 0)

    def __repr__(self):
        img = ",".join("*" if v == 0 else str(v) for v in self.image)
        return f"PointedMap({self.source}->{self.target}: [{img}])"


@functools.lru_cache(maxsize=None)
def _preimages(f: PointedMap) -> dict[int, tuple[int, ...]]:
    out: dict[int, tuple[int, ...]] = {j: () for j in range(f.target + 1)}
    for i, v in enumerate(f.image, start=1):
        out[v] += (i,)
    return out


def identity(n: int) -> PointedMap:
    return PointedMap(n, n, tuple(range(1, n + 1)))


@functools.lru_cache(maxsize=None)
def compose(g: PointedMap, f: PointedMap) -> PointedMap:
    """g after f."""
    if f.target != g.source:
        raise ValueError(f"cannot compose {g!r} after {f!r}")
    img = f.image
    gimg = (0,) + g.image
    return PointedMap(f.source, g.target, tuple(gimg[v] for v in img))


@functools.lru_cache(maxsize=None)
def beta(n: int) -> PointedMap:
    """The unique active map n_+ -> 1_+."""
    return PointedMap(n, 1, (1,) * n)


@functools.lru_cache(maxsize=None)
def projection(n: int, i: int) -> PointedMap:
    """The inert map rho^i: n_+ -> 1_+ keeping only the element i."""
    if not 1 <= i <= n:
        raise IndexError(f"projection index {i} outside 1..{n}")
    return PointedMap(n, 1, tuple(1 if j == i else 0 for j in range(1, n + 1)))


def classify(f: PointedMap) -> MapKind:
    """Active wins when a map is both active and inert (a bijection)."""
    if f.is_active:
        return MapKind.ACTIVE
    if f.is_inert:
        return MapKind.INERT
    return MapKind.NEITHER


def factorize(f: PointedMap) -> tuple[PointedMap, PointedMap]:
    """Canonical inert-then-active factorization f = active . inert.

    The inert part maps the i-th surviving element of f to i, so it
    preserves relative order; the active part sends i to the value f
    takes on that survivor.
    """
    surv = f.survivors()
    k = len(surv)
    rank = {s: r + 1 for r, s in enumerate(surv)}
    inert = PointedMap(f.source, k, tuple(rank.get(i, 0) for i in range(1, f.source + 1)))
    active = PointedMap(k, f.target, tuple(f(s) for s in surv))
    return inert, active


def enumerate_maps(n: int, m: int) -> list[PointedMap]:
    """All (m+1)^n pointed maps n_+ -> m_+, lexicographic in the image
    vector with * < 1 < ... < m."""
    return [PointedMap(n, m, img) for img in itertools.product(range(m + 1), repeat=n)]


def enumerate_all_maps(horizon: int) -> list[PointedMap]:
    """Every map between objects 0_+ .. horizon_+, deterministic order."""
    out = []
    for n in range(horizon + 1):
        for m in range(horizon + 1):
            out.extend(enumerate_maps(n, m))
    return out
