"""Faces of simplices, box covers of generalized cubes, order and separation.

A point of the cube ``Delta_k^n`` is ``n`` probability vectors of length
``k``. Cover elements are boxes: one interval per (factor, coordinate), each
end open or closed. Everything is decided exactly: a box meets the cube iff in
every factor the Minkowski sum of its clipped coordinate intervals contains 1.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

ZERO, ONE = Fraction(0), Fraction(1)


class Interval(NamedTuple):
    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    @classmethod
    def closed(cls, lo, hi) -> Interval:
        return cls(Fraction(lo), Fraction(hi))

    @classmethod
    def open(cls, lo, hi) -> Interval:
        return cls(Fraction(lo), Fraction(hi), True, True)

    @classmethod
    def parse(cls, text: str) -> Interval:
        """``"[0,3/5)"`` style notation."""
        text = text.strip()
        lo, hi = text[1:-1].split(",")
        return cls(Fraction(lo.strip()), Fraction(hi.strip()), text[0] == "(", text[-1] == ")")

    def __str__(self):
        return f"{'(' if self.lo_open else '['}{self.lo},{self.hi}{')' if self.hi_open else ']'}"

    @property
    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and (self.lo_open or self.hi_open))

    def contains(self, x) -> bool:
        above = x > self.lo or (x == self.lo and not self.lo_open)
        below = x < self.hi or (x == self.hi and not self.hi_open)
        return above and below

    def meet(self, other: Interval) -> Interval:
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif self.lo < other.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif self.hi > other.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    def clip(self) -> Interval:
        return self.meet(Interval(ZERO, ONE))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


UNIT = Interval(ZERO, ONE)
POINT_ZERO = Interval(ZERO, ZERO)


def sum_contains_one(intervals: Iterable[Interval]) -> bool:
    """Whether some choice ``x_c in I_c`` has ``sum x_c == 1``.

    The Minkowski sum of intervals is an interval whose infimum is the sum of
    infima, attained iff every infimum is (likewise for suprema).
    """
    lo = hi = ZERO
    lo_open = hi_open = False
    for iv in intervals:
        if iv.empty:
            return False
        lo += iv.lo
        hi += iv.hi
        lo_open |= iv.lo_open
        hi_open |= iv.hi_open
    return Interval(lo, hi, lo_open, hi_open).contains(ONE)


# ---------------------------------------------------------------------------
# faces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaceId:
    """Face ``{t : t_j = 0 for j not in indices}`` of the ``slot``-th factor.

    An empty index set is the empty face; its opposite is the whole simplex.
    """

    indices: frozenset
    k: int
    slot: int = 0

    def __post_init__(self):
        idx = frozenset(int(i) for i in self.indices)
        if not idx <= set(range(self.k)):
            raise ValueError(f"face indices {sorted(idx)} not inside [0, {self.k})")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def missing(cls, v: int, k: int, slot: int = 0) -> FaceId:
        """The (k-1)-face opposite to vertex ``v``."""
        return cls(frozenset(range(k)) - {v}, k, slot)

    @property
    def is_empty(self) -> bool:
        return not self.indices

    @property
    def dimension(self) -> int:
        return len(self.indices) - 1

    def __str__(self):
        return f"F{self.slot}{{{','.join(map(str, sorted(self.indices)))}}}"


def opposite(face: FaceId) -> FaceId:
    return FaceId(frozenset(range(face.k)) - face.indices, face.k, face.slot)


def face_meet(faces: Sequence[FaceId]) -> FaceId:
    """Intersection of faces sharing a slot, as index-set intersection."""
    faces = list(faces)
    if not faces:
        raise ValueError("need at least one face")
    if len({(f.slot, f.k) for f in faces}) != 1:
        raise ValueError("faces must share the slot and the simplex")
    idx = frozenset.intersection(*(f.indices for f in faces))
    return FaceId(idx, faces[0].k, faces[0].slot)


# ---------------------------------------------------------------------------
# boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """``factors[m][j]`` is the interval allowed for coordinate ``j`` of factor ``m``."""

    factors: tuple

    def __post_init__(self):
        fac = tuple(tuple(iv if isinstance(iv, Interval) else Interval(*iv) for iv in f) for f in self.factors)
        if not fac or len({len(f) for f in fac}) != 1:
            raise ValueError("a box needs n >= 1 factors of equal dimension")
        object.__setattr__(self, "factors", fac)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def k(self) -> int:
        return len(self.factors[0])

    @classmethod
    def barycentric(cls, *intervals: Interval) -> Box:
        """Box on ``Delta_2^n`` constraining the first coordinate in each factor."""
        return cls(tuple((iv, UNIT) for iv in intervals))

    def meet(self, other: Box) -> Box:
        return Box(tuple(tuple(a.meet(b) for a, b in zip(f, g)) for f, g in zip(self.factors, other.factors)))

    def factor_feasible(self, m: int, zeros: Iterable[int] = ()) -> bool:
        """Factor ``m`` holds a probability vector vanishing on ``zeros``."""
        zeros = set(zeros)
        ivs = []
        for j, iv in enumerate(self.factors[m]):
            if j in zeros:
                if not iv.contains(ZERO):
                    return False
                ivs.append(POINT_ZERO)
            else:
                ivs.append(iv.clip())
        return sum_contains_one(ivs)

    def meets_cube(self) -> bool:
        return all(self.factor_feasible(m) for m in range(self.n))

    def meets_face(self, face: FaceId) -> bool:
        zeros = set(range(self.k)) - face.indices
        if face.is_empty:
            return False
        return all(self.factor_feasible(m, zeros if m == face.slot else ()) for m in range(self.n))

    def contains(self, t: Sequence[Sequence]) -> bool:
        return all(iv.contains(Fraction(x)) for f, row in zip(self.factors, t) for iv, x in zip(f, row))

    def to_json(self) -> list:
        return [[str(iv) for iv in f] for f in self.factors]

    @classmethod
    def from_json(cls, obj) -> Box:
        return cls(tuple(tuple(Interval.parse(s) for s in f) for f in obj))


def meet_all(boxes: Sequence[Box]) -> Box:
    out = boxes[0]
    for b in boxes[1:]:
        out = out.meet(b)
    return out


def simplex_grid(k: int, D: int) -> list[tuple[Fraction, ...]]:
    """Points of ``Delta_k`` with coordinates in ``(1/D) Z``."""
    out = []
    for cuts in itertools.combinations_with_replacement(range(D + 1), k - 1):
        b = (0,) + cuts + (D,)
        out.append(tuple(Fraction(b[i + 1] - b[i], D) for i in range(k)))
    return out


@dataclass
class BoxCover:
    boxes: list
    k: int
    n: int
    certification: str = ""

    def __post_init__(self):
        for b in self.boxes:
            if (b.k, b.n) != (self.k, self.n):
                raise ValueError("box dimensions disagree with the cover")

    def uncovered(self, D: int) -> tuple | None:
        """First point of the ``1/D`` grid of the cube outside every box."""
        per = simplex_grid(self.k, D)
        for t in itertools.product(per, repeat=self.n):
            if not any(b.contains(t) for b in self.boxes):
                return t
        return None

    def certify(self, D: int | None = None) -> bool:
        """Grid-based covering certificate, recorded in ``certification``."""
        D = D or grid_denominator(self)
        miss = self.uncovered(D)
        empties = [i for i, b in enumerate(self.boxes) if not b.meets_cube()]
        self.certification = (
            f"grid 1/{D}: {'covered' if miss is None else 'uncovered point ' + _tstr(miss)}; "
            f"boxes missing the cube: {empties}"
        )
        return miss is None

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "boxes": [b.to_json() for b in self.boxes],
                "certification": self.certification}

    @classmethod
    def from_json(cls, obj) -> BoxCover:
        return cls([Box.from_json(b) for b in obj["boxes"]], obj["k"], obj["n"], obj.get("certification", ""))


def _tstr(t):
    return "(" + ";".join(",".join(str(x) for x in row) for row in t) + ")"


def grid_denominator(cover: BoxCover) -> int:
    """Twice the lcm of all endpoint denominators, so every gap has a grid point inside."""
    lcm = 1
    for b in cover.boxes:
        for f in b.factors:
            for iv in f:
                for x in (iv.lo, iv.hi):
                    lcm = lcm * x.denominator // _gcd(lcm, x.denominator)
    return 2 * lcm


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# order and separation
# ---------------------------------------------------------------------------


def _cliques(boxes: Sequence[Box], members: Sequence[int]):
    """Yield ``(subfamily, common box)`` for every subfamily of ``members``
    whose common intersection meets the cube. Depth-first, pruned by monotonicity."""

    def rec(start, chosen, common):
        for pos in range(start, len(members)):
            b = boxes[members[pos]]
            nxt = b if common is None else common.meet(b)
            if nxt.meets_cube():
                fam = chosen + (members[pos],)
                yield fam, nxt
                yield from rec(pos + 1, fam, nxt)

    yield from rec(0, (), None)


def max_multiplicity(boxes: Sequence[Box]) -> tuple[int, tuple[int, ...]]:
    """Largest subfamily with a common point in the cube (branch and bound)."""
    best = [0, ()]
    total = len(boxes)

    def rec(start, chosen, common):
        if len(chosen) > best[0]:
            best[0], best[1] = len(chosen), chosen
        for pos in range(start, total):
            if len(chosen) + total - pos <= best[0]:
                return
            nxt = boxes[pos] if common is None else common.meet(boxes[pos])
            if nxt.meets_cube():
                rec(pos + 1, chosen + (pos,), nxt)

    rec(0, (), None)
    return best[0], best[1]


def cover_order(cover: BoxCover) -> int:
    """Maximal number of elements sharing a point of the cube, minus one."""
    return max_multiplicity(cover.boxes)[0] - 1


@dataclass(frozen=True)
class Violation:
    slot: int
    family: tuple
    faces: tuple  # FaceId per member
    meet: FaceId
    opposite: FaceId

    def to_json(self) -> dict:
        return {"slot": self.slot, "family": list(self.family), "faces": [str(f) for f in self.faces],
                "meet": str(self.meet), "opposite": str(opposite(self.meet))}


def is_separating(cover: BoxCover) -> Violation | None:
    """None when the cover is separating, else the first violation found.

    For each slot, every subfamily whose members each meet some (k-1)-face of
    that slot is paired with every achievable choice of such faces; the
    common intersection must miss the opposite of the faces' meet. Empty
    meets have the whole simplex as opposite.
    """
    k, n = cover.k, cover.n
    boxes = cover.boxes
    for slot in range(n):
        touch = {}
        for i, b in enumerate(boxes):
            M = tuple(v for v in range(k) if b.meets_face(FaceId.missing(v, k, slot)))
            if M:
                touch[i] = M
        members = sorted(touch)
        for fam, common in _cliques(boxes, members):
            # sets V of missing vertices reachable by picking one face per member
            choices = {(): frozenset()}
            for i in fam:
                nxt = {}
                for path, V in choices.items():
                    for v in touch[i]:
                        W = V | {v}
                        nxt.setdefault(W, path + (v,))
                choices = {p: W for W, p in nxt.items()}
            for path, V in sorted(choices.items()):
                met = face_meet([FaceId.missing(v, k, slot) for v in path])
                opp = opposite(met)
                if common.meets_face(opp):
                    return Violation(slot, fam, tuple(FaceId.missing(v, k, slot) for v in path), met, opp)
    return None


def epsilon_m(gamma, q: int, diam) -> Fraction:
    """``gamma**2 / (diam * 2**(q + 1))``."""
    gamma, diam = Fraction(gamma), Fraction(diam)
    if gamma <= 0 or diam <= 0:
        raise ValueError("gamma and diam must be positive")
    return gamma * gamma / (diam * 2 ** (q + 1))


# ---------------------------------------------------------------------------
# search for low-order separating covers
# ---------------------------------------------------------------------------


def grid_cover(k: int, n: int, N: int | None = None) -> BoxCover:
    """Product cover by boxes ``((a-1)/N, (a+1)/N)`` per coordinate.

    With ``N > 2k`` every element has coordinate widths below ``1/k``, which
    makes the cover separating. Each factor's cover is thinned first by
    dropping boxes whose removal keeps the ``1/(4N)`` grid of ``Delta_k``
    covered; sub-covers of a separating cover stay separating, and products
    of separating factor covers are separating.
    """
    N = N or 2 * k + 1
    cells = [Interval(Fraction(a - 1, N), Fraction(a + 1, N), True, True).clip() for a in range(N + 1)]
    per = []
    for combo in itertools.product(range(N + 1), repeat=k):
        fac = tuple(cells[a] for a in combo)
        if sum_contains_one(fac):
            per.append(fac)
    grid = simplex_grid(k, 4 * N)
    for fac in list(per):
        rest = [f for f in per if f is not fac]
        if all(any(all(iv.contains(x) for iv, x in zip(f, t)) for f in rest) for t in grid):
            per = rest
    boxes = [Box(f) for f in itertools.product(per, repeat=n)]
    return BoxCover(boxes, k, n)


@dataclass
class SearchResult:
    order: int
    cover: BoxCover
    separating: bool
    exhausted: bool
    trace: list = field(default_factory=list)  # (iteration, order, separating or None, accepted)
    candidates: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"order": self.order, "separating": self.separating, "budget_exhausted": self.exhausted,
                "candidate_constants": self.candidates, "cover": self.cover.to_json()}


def _hull(a: Interval, b: Interval) -> Interval:
    lo = min(a.lo, b.lo)
    hi = max(a.hi, b.hi)
    lo_open = (a.lo_open if a.lo == lo else True) and (b.lo_open if b.lo == lo else True)
    hi_open = (a.hi_open if a.hi == hi else True) and (b.hi_open if b.hi == hi else True)
    return Interval(lo, hi, lo_open, hi_open)


def _propose(cover: BoxCover, rng: random.Random, step: Fraction) -> BoxCover:
    boxes = list(cover.boxes)
    move = rng.random()
    if move < 0.4 and len(boxes) > 1:
        del boxes[rng.randrange(len(boxes))]
    elif move < 0.7 and len(boxes) > 1:
        i, j = sorted(rng.sample(range(len(boxes)), 2))
        a, b = boxes[i], boxes[j]
        merged = Box(tuple(tuple(_hull(x, y) for x, y in zip(f, g)) for f, g in zip(a.factors, b.factors)))
        del boxes[j]
        boxes[i] = merged
    else:
        i = rng.randrange(len(boxes))
        m, j = rng.randrange(cover.n), rng.randrange(cover.k)
        iv = boxes[i].factors[m][j]
        d = step if rng.random() < 0.5 else -step
        if rng.random() < 0.5:
            iv = Interval(iv.lo + d, iv.hi, iv.lo_open, iv.hi_open)
        else:
            iv = Interval(iv.lo, iv.hi + d, iv.lo_open, iv.hi_open)
        fac = list(boxes[i].factors)
        row = list(fac[m])
        row[j] = iv
        fac[m] = tuple(row)
        boxes[i] = Box(tuple(fac))
    return BoxCover(boxes, cover.k, cover.n)


def search_min_separating_order(k: int, n: int, budget: int, seed: int = 0, N: int | None = None,
                                start: BoxCover | None = None) -> SearchResult:
    """Local search for separating covers of ``Delta_k^n`` with small order.

    Moves delete a box, merge two boxes into their hull, or shift one
    endpoint by ``1/(2N)``. A proposal is accepted when it stays separating,
    stays grid-covering and does not raise the order. The result is an
    upper bound on the least order of a separating cover, never a lower bound.
    """
    if k < 2 or n < 1 or k * n > 8:
        raise ValueError("search supports k >= 2, n >= 1 and k*n <= 8")
    rng = random.Random(seed)
    N = N or 2 * k + 1
    cover = start or grid_cover(k, n, N)
    D = 4 * N
    if not cover.certify(D):
        raise ValueError(f"starting cover does not cover: {cover.certification}")
    if is_separating(cover) is not None:
        raise ValueError("starting cover is not separating")
    order = cover_order(cover)
    trace = [(0, order, True, True)]
    step = Fraction(1, 2 * N)
    for it in range(1, budget + 1):
        cand = _propose(cover, rng, step)
        accepted = False
        sep = None  # not evaluated when the proposal stops covering
        o = None
        if all(b.meets_cube() for b in cand.boxes) and cand.uncovered(D) is None:
            sep = is_separating(cand) is None
            if sep:
                o = cover_order(cand)
                if o <= order:
                    cover, order, accepted = cand, o, True
        trace.append((it, order if o is None else o, sep, accepted))
    cover.certify(D)
    return SearchResult(order, cover, True, exhausted=budget > 0, trace=trace,
                        candidates={"n*k": n * k, "n*(k-1)": n * (k - 1)})
