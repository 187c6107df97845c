"""Finitely supported probability measures and the embeddings into M(X)."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .spaces import SystemSpec, point_str

FLOAT_TOL = 1e-12


class DiscreteMeasure:
    """Probability measure with finite support.

    Weights are exact :class:`~fractions.Fraction` by default; passing
    ``exact=False`` keeps floats (sum checked to 1e-12).
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, weights: Mapping | Iterable, exact: bool = True):
        items = dict(weights.items() if isinstance(weights, Mapping) else weights)
        clean = {}
        for p, w in items.items():
            w = Fraction(w) if exact else float(w)
            if w < 0:
                raise ValueError(f"negative weight at {p!r}")
            if w > 0:
                clean[p] = w
        if not clean:
            raise ValueError("measure has empty support")
        total = sum(clean.values())
        if exact and total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        if not exact and abs(total - 1) > FLOAT_TOL:
            raise ValueError(f"weights sum to {total}, not 1")
        self._items = tuple(sorted(clean.items()))
        self._hash = None

    @classmethod
    def dirac(cls, p) -> DiscreteMeasure:
        return cls({p: 1})

    @classmethod
    def uniform(cls, points: Iterable) -> DiscreteMeasure:
        points = list(points)
        return cls({p: Fraction(1, len(points)) for p in points})

    @property
    def support(self) -> tuple:
        return tuple(p for p, _ in self._items)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self._items)

    def items(self):
        return self._items

    def __getitem__(self, p):
        for q, w in self._items:
            if q == p:
                return w
        return 0

    def __len__(self):
        return len(self._items)

    def mass(self, points) -> Fraction:
        points = set(points)
        return sum((w for p, w in self._items if p in points), Fraction(0))

    @property
    def is_exact(self) -> bool:
        return isinstance(self._items[0][1], Fraction)

    def __eq__(self, other):
        return isinstance(other, DiscreteMeasure) and self._items == other._items

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{point_str(p)}: {w}" for p, w in self._items)
        return f"DiscreteMeasure({{{body}}})"

    def mix(self, other: DiscreteMeasure, lam) -> DiscreteMeasure:
        """``lam * self + (1 - lam) * other``."""
        lam = Fraction(lam)
        out: dict = {}
        for p, w in self._items:
            out[p] = out.get(p, 0) + lam * w
        for p, w in other._items:
            out[p] = out.get(p, 0) + (1 - lam) * w
        return DiscreteMeasure(out)

    def to_json(self) -> dict:
        return {"support": [point_str(p) for p in self.support],
                "weights": [str(w) for w in self.weights]}

    @classmethod
    def from_json(cls, obj: dict | str, spec: SystemSpec | None = None) -> DiscreteMeasure:
        if isinstance(obj, str):
            obj = json.loads(obj)
        for key in ("support", "weights"):
            if key not in obj:
                raise KeyError(key)
        support, weights = obj["support"], obj["weights"]
        if len(support) != len(weights):
            raise ValueError("support and weights differ in length")
        if len(set(support)) != len(support):
            raise ValueError("support ids must be distinct")
        conv = spec.grid_point if spec is not None else str
        return cls({conv(p): Fraction(str(w)) for p, w in zip(support, weights)})


def load_measure(path, spec: SystemSpec | None = None) -> DiscreteMeasure:
    with open(path) as fh:
        return DiscreteMeasure.from_json(json.load(fh), spec)


# ---------------------------------------------------------------------------
# push-forward
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def pushforward(spec: SystemSpec, mu: DiscreteMeasure, times: int = 1) -> DiscreteMeasure:
    """Image of ``mu`` under ``times`` applications of the system map.

    Colliding images have their weights summed.
    """
    if times == 0:
        return mu
    out: dict = {}
    for p, w in mu.items():
        q = spec.iterate(p, times)
        out[q] = out.get(q, 0) + w
    return DiscreteMeasure(out, exact=mu.is_exact)


# ---------------------------------------------------------------------------
# pi: products of X into M(X)
# ---------------------------------------------------------------------------


def subset_sum_collision(k: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Two distinct index subsets with equal sums, or None."""
    seen: dict[int, tuple[int, ...]] = {}
    for r in range(len(k) + 1):
        for sub in itertools.combinations(range(len(k)), r):
            s = sum(k[i] for i in sub)
            if s in seen:
                return seen[s], sub
            seen[s] = sub
    return None


def dirac_embedding(points: Sequence, k: Sequence[int] | None = None) -> DiscreteMeasure:
    """``sum k_i delta_{x_i} / sum k_i`` with default weights ``k_i = 2**(i-1)``."""
    n = len(points)
    if n == 0:
        raise ValueError("need at least one point")
    if k is None:
        k = [2 ** i for i in range(n)]
    if len(k) != n:
        raise ValueError("one weight per point required")
    if any(int(x) != x or x <= 0 for x in k):
        raise ValueError("weights must be positive integers")
    if n <= 20:
        clash = subset_sum_collision(k)
        if clash is not None:
            raise ValueError(f"subset sums collide: {clash[0]} and {clash[1]}")
    elif any(k[i] <= sum(k[:i]) for i in range(1, n)):
        raise ValueError("for n > 20 the weights must be superincreasing")
    total = sum(k)
    out: dict = {}
    for p, ki in zip(points, k):
        out[p] = out.get(p, 0) + Fraction(ki, total)
    return DiscreteMeasure(out)


# ---------------------------------------------------------------------------
# f_m: sequences of block distributions into M(A^N)
# ---------------------------------------------------------------------------


def block_words(alphabet: Sequence[str], m: int) -> list[str]:
    return ["".join(t) for t in itertools.product(alphabet, repeat=m)]


def block_product_embedding(spec: SystemSpec, a: Sequence[Sequence], depth: int | None = None) -> DiscreteMeasure:
    """Product measure on words of ``depth`` blocks whose block marginals are ``a``.

    Each ``a[j]`` is a probability vector over the length-m words, ordered
    lexicographically; ``m`` is inferred from the vector length.
    """
    if spec.kind != "full-shift":
        raise TypeError("block product embedding is defined on full shifts")
    if depth is None:
        depth = len(a)
    if depth < 1 or depth > len(a):
        raise ValueError("depth must be between 1 and the number of blocks")
    A = len(spec.alphabet)
    size = len(a[0])
    m = 0
    while A ** m < size:
        m += 1
    if A ** m != size or m == 0:
        raise ValueError(f"block vector length {size} is not a power of {A}")
    if depth * m > spec.depth:
        raise ValueError(f"{depth} blocks of length {m} exceed truncation depth {spec.depth}")
    words = block_words(spec.alphabet, m)
    vecs = []
    for j in range(depth):
        v = [Fraction(x) for x in a[j]]
        if len(v) != size:
            raise ValueError(f"block {j} has dimension {len(v)}, expected {size}")
        if any(x < 0 for x in v) or sum(v) != 1:
            raise ValueError(f"block {j} is not a probability vector")
        vecs.append(v)
    out = {}
    for combo in itertools.product(range(size), repeat=depth):
        w = Fraction(1)
        for j, c in enumerate(combo):
            w *= vecs[j][c]
            if not w:
                break
        if w:
            out["".join(words[c] for c in combo)] = w
    return DiscreteMeasure(out)


# ---------------------------------------------------------------------------
# simplices, generalized cubes, Theta, Xi
# ---------------------------------------------------------------------------


def simplex_point(coords: Iterable) -> tuple[Fraction, ...]:
    t = tuple(Fraction(x) for x in coords)
    if not t or any(x < 0 for x in t) or sum(t) != 1:
        raise ValueError(f"{t} is not a point of the simplex")
    return t


def cube_point(factors: Iterable[Iterable]) -> tuple[tuple[Fraction, ...], ...]:
    t = tuple(simplex_point(f) for f in factors)
    if not t:
        raise ValueError("a cube point needs at least one factor")
    if len({len(f) for f in t}) != 1:
        raise ValueError("all factors must live in the same simplex")
    return t


def vertex(k: int, i: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(j == i)) for j in range(k))


def center(k: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, k) for _ in range(k))


def theta(t: Sequence[Sequence]) -> tuple[Fraction, ...]:
    """Coordinate products ``t_I = prod_m t[m][I_m]`` over multi-indices in
    lexicographic order: a multi-affine embedding of the cube into one simplex."""
    t = cube_point(t)
    out = []
    for idx in itertools.product(range(len(t[0])), repeat=len(t)):
        w = Fraction(1)
        for m, i in enumerate(idx):
            w *= t[m][i]
        out.append(w)
    return tuple(out)


@dataclass(frozen=True)
class AnchorFamily:
    """Points ``x_I`` indexed by ``I in [2**q] ** blocks``.

    ``blocks`` are the block indices k (the set I^m_n) in increasing order;
    ``anchors`` maps each index tuple to its word.
    """

    q: int
    m: int
    n: int
    blocks: tuple[int, ...]
    E: tuple[tuple[int, ...], ...]
    anchors: Mapping

    @property
    def k(self) -> int:
        return 2 ** self.q

    def index_set(self):
        return itertools.product(range(self.k), repeat=len(self.blocks))

    def __getitem__(self, idx):
        return self.anchors[tuple(idx)]

    def __len__(self):
        return len(self.anchors)

    def points_with(self, slot: int, face: Iterable[int]) -> set:
        """Anchors whose ``slot``-th index lies in ``face``."""
        face = set(face)
        return {x for idx, x in self.anchors.items() if idx[slot] in face}


def xi(t: Sequence[Sequence], anchors: AnchorFamily) -> DiscreteMeasure:
    """``sum_I (prod_m t[m][I_m]) delta_{x_I}``."""
    t = cube_point(t)
    if len(t) != len(anchors.blocks) or len(t[0]) != anchors.k:
        raise ValueError(
            f"cube point in Delta_{len(t[0])}^{len(t)} does not match anchors "
            f"indexed by [{anchors.k}]^{len(anchors.blocks)}"
        )
    out = {}
    for idx, w in zip(itertools.product(range(anchors.k), repeat=len(t)), theta(t)):
        if w:
            x = anchors[idx]
            out[x] = out.get(x, 0) + w
    return DiscreteMeasure(out)


def face_mass(t: Sequence[Sequence], slot: int, face: Iterable[int]) -> Fraction:
    """``Xi(t)`` mass of the anchors whose ``slot`` index lies in ``face``."""
    return sum((Fraction(t[slot][j]) for j in set(face)), Fraction(0))


def split_along_face(t, slot: int, face: Iterable[int]):
    """Write ``t = lam * t1 + (1 - lam) * t2`` with ``t1`` on the face in
    ``slot`` and ``t2`` on the opposite face.

    When ``lam`` is 0 or 1 the unused part is an arbitrary vertex of its face.
    """
    t = cube_point(t)
    k = len(t[0])
    face = sorted(set(face))
    opp = [j for j in range(k) if j not in face]
    if not face or not opp:
        raise ValueError("face must be a nonempty proper index subset")
    lam = face_mass(t, slot, face)
    row = t[slot]

    def part(idx, total):
        if total:
            return tuple(row[j] / total if j in idx else Fraction(0) for j in range(k))
        return vertex(k, idx[0])

    t1 = t[:slot] + (part(face, lam),) + t[slot + 1:]
    t2 = t[:slot] + (part(opp, 1 - lam),) + t[slot + 1:]
    return lam, t1, t2


def h_family(q: int) -> list[tuple[Fraction, ...]]:
    """Uniform vectors on the nonempty subsets of ``[2**q]``, by size then lexicographically."""
    if q < 0:
        raise ValueError("q must be >= 0")
    k = 2 ** q
    out = []
    for size in range(1, k + 1):
        for sub in itertools.combinations(range(k), size):
            out.append(tuple(Fraction(1, size) if j in sub else Fraction(0) for j in range(k)))
    return out


def h_measures(anchors: AnchorFamily) -> list[DiscreteMeasure]:
    """``Xi(t)`` for every ``t`` whose factors all come from :func:`h_family`.

    There are ``(2**(2**q) - 1) ** len(blocks)`` of them, listed in
    lexicographic order of the factor choices.
    """
    H = h_family(anchors.q)
    if not anchors.blocks:
        return [xi_empty(anchors)]
    return [xi(t, anchors) for t in itertools.product(H, repeat=len(anchors.blocks))]


def xi_empty(anchors: AnchorFamily) -> DiscreteMeasure:
    """With no blocks the index set is a single empty tuple."""
    return DiscreteMeasure.dirac(anchors[()])
