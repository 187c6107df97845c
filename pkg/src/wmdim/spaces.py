"""Finite metric spaces and truncated dynamical systems.

Three families of systems are represented:

* ``full-shift``: words of length ``depth`` over an alphabet, with the
  metric ``d(x, y) = 2 ** -min{i : x_i != y_i}``.
* ``sft``: the same, restricted to right-extendable words avoiding a list
  of forbidden factors.
* ``circle``: the grid ``{j/Q}`` with arc length and the map ``x -> a*x mod 1``.

Shift points are plain strings, circle points are :class:`fractions.Fraction`.
All distances are exact rationals.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Hashable, Iterable, Sequence

Point = Hashable

SHIFT_KINDS = ("full-shift", "sft")


class DepthError(ValueError):
    """A truncated shift point cannot support the requested number of steps."""

    def __init__(self, message: str, required_depth: int | None = None):
        super().__init__(message)
        self.required_depth = required_depth


class EmptySystemError(ValueError):
    pass


# ---------------------------------------------------------------------------
# shift languages
# ---------------------------------------------------------------------------


class ShiftLanguage:
    """Right-extendable words of a shift of finite type.

    A word belongs to the language when it has no forbidden factor and can be
    continued to an infinite admissible sequence.
    """

    def __init__(self, alphabet: Sequence[str], forbidden: Sequence[str] = ()):
        self.alphabet = tuple(alphabet)
        self.forbidden = tuple(forbidden)
        self.window = max((len(w) for w in self.forbidden), default=1)

    def step(self, tail: str, symbol: str) -> str | None:
        """Append ``symbol`` to a word ending in ``tail``; None if forbidden."""
        ext = tail + symbol
        for f in self.forbidden:
            if ext.endswith(f):
                return None
        if self.window == 1:
            return ""
        return ext[-(self.window - 1):]

    @cached_property
    def essential_states(self) -> frozenset[str]:
        w = self.window - 1
        states = set()
        for t in itertools.product(self.alphabet, repeat=w):
            s = "".join(t)
            if all(f not in s for f in self.forbidden):
                states.add(s)
        changed = True
        while changed:
            changed = False
            for s in list(states):
                if not any(self.step(s, c) in states for c in self.alphabet if self.step(s, c) is not None):
                    states.discard(s)
                    changed = True
        return frozenset(states)

    @lru_cache(maxsize=None)
    def _good(self, tail: str) -> bool:
        if len(tail) == self.window - 1:
            return tail in self.essential_states
        for c in self.alphabet:
            nxt = self.step(tail, c)
            if nxt is not None and self._good(nxt):
                return True
        return False

    def admissible(self, word: str) -> bool:
        tail = ""
        for c in word:
            if c not in self.alphabet:
                return False
            tail = self.step(tail, c)
            if tail is None:
                return False
        return self._good(tail)

    def _feasible(self, length: int, constraints: dict[int, str]):
        @lru_cache(maxsize=None)
        def feasible(pos: int, tail: str) -> bool:
            if pos == length:
                return self._good(tail)
            for c in self.alphabet:
                if pos in constraints and constraints[pos] != c:
                    continue
                nxt = self.step(tail, c)
                if nxt is not None and feasible(pos + 1, nxt):
                    return True
            return False

        return feasible

    def words(self, length: int) -> list[str]:
        """All language words of the given length, in lexicographic order."""
        feasible = self._feasible(length, {})
        out: list[str] = []

        def rec(prefix: str, tail: str) -> None:
            if len(prefix) == length:
                out.append(prefix)
                return
            for c in self.alphabet:
                nxt = self.step(tail, c)
                if nxt is not None and feasible(len(prefix) + 1, nxt):
                    rec(prefix + c, nxt)

        if feasible(0, ""):
            rec("", "")
        return out

    def smallest_word(self, length: int, constraints: dict[int, str] | None = None) -> str | None:
        """Lexicographically smallest language word honouring ``constraints``
        (position -> symbol), or None when no such word exists."""
        constraints = dict(constraints or {})
        if any(p < 0 or p >= length for p in constraints):
            raise ValueError("constraint position outside the word")
        feasible = self._feasible(length, constraints)
        if not feasible(0, ""):
            return None
        word, tail = "", ""
        for pos in range(length):
            for c in self.alphabet:
                if pos in constraints and constraints[pos] != c:
                    continue
                nxt = self.step(tail, c)
                if nxt is not None and feasible(pos + 1, nxt):
                    word, tail = word + c, nxt
                    break
        return word


# ---------------------------------------------------------------------------
# system specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    alphabet: tuple[str, ...] = ()
    depth: int = 0
    forbidden: tuple[str, ...] = ()
    a: int = 0
    Q: int = 0
    lipschitz: Fraction | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.kind in SHIFT_KINDS:
            object.__setattr__(self, "alphabet", tuple(self.alphabet))
            object.__setattr__(self, "forbidden", tuple(self.forbidden))
            if len(self.alphabet) < 2:
                raise ValueError("alphabet size must be at least 2")
            if len(set(self.alphabet)) != len(self.alphabet):
                raise ValueError("alphabet symbols must be distinct")
            if any(len(s) != 1 for s in self.alphabet):
                raise ValueError("alphabet symbols must be single characters")
            if self.depth < 1:
                raise ValueError("depth must be >= 1")
            if self.kind == "full-shift" and self.forbidden:
                raise ValueError("full-shift takes no forbidden words")
            for w in self.forbidden:
                if not w or any(c not in self.alphabet for c in w):
                    raise ValueError(f"forbidden word {w!r} is not over the alphabet")
        elif self.kind == "circle":
            if self.Q < 2:
                raise ValueError("circle grid size Q must be >= 2")
            if self.a < 1:
                raise ValueError("circle multiplier a must be >= 1")
        else:
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.lipschitz is not None:
            K = Fraction(self.lipschitz)
            if K <= 0:
                raise ValueError("lipschitz constant must be positive")
            object.__setattr__(self, "lipschitz", K)

    # constructors ---------------------------------------------------------

    @classmethod
    def full_shift(cls, alphabet: Iterable[str] = ("0", "1"), depth: int = 8) -> SystemSpec:
        return cls("full-shift", alphabet=tuple(alphabet), depth=depth)

    @classmethod
    def sft(cls, alphabet: Iterable[str], forbidden: Iterable[str], depth: int = 8) -> SystemSpec:
        return cls("sft", alphabet=tuple(alphabet), forbidden=tuple(forbidden), depth=depth)

    @classmethod
    def circle(cls, a: int, Q: int) -> SystemSpec:
        return cls("circle", a=a, Q=Q)

    def with_depth(self, depth: int) -> SystemSpec:
        if not self.is_shift:
            return self
        return SystemSpec(self.kind, self.alphabet, depth, self.forbidden, lipschitz=self.lipschitz)

    @classmethod
    def from_json(cls, obj: dict | str) -> SystemSpec:
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict):
            raise ValueError("system spec must be a JSON object")
        if "kind" not in obj:
            raise KeyError("kind")
        kind = obj["kind"]
        K = obj.get("lipschitz")
        K = Fraction(str(K)) if K is not None else None
        if kind in SHIFT_KINDS:
            for key in ("alphabet", "depth"):
                if key not in obj:
                    raise KeyError(key)
            return cls(kind, alphabet=tuple(obj["alphabet"]), depth=int(obj["depth"]),
                       forbidden=tuple(obj.get("forbidden", ())), lipschitz=K)
        if kind == "circle":
            for key in ("a", "Q"):
                if key not in obj:
                    raise KeyError(key)
            return cls("circle", a=int(obj["a"]), Q=int(obj["Q"]), lipschitz=K)
        raise ValueError(f"unknown system kind {kind!r}")

    def to_json(self) -> dict:
        if self.is_shift:
            out = {"kind": self.kind, "alphabet": list(self.alphabet), "depth": self.depth}
            if self.kind == "sft":
                out["forbidden"] = list(self.forbidden)
        else:
            out = {"kind": "circle", "a": self.a, "Q": self.Q}
        if self.lipschitz is not None:
            out["lipschitz"] = str(self.lipschitz)
        return out

    # basic data -----------------------------------------------------------

    @property
    def is_shift(self) -> bool:
        return self.kind in SHIFT_KINDS

    @property
    def K(self) -> Fraction:
        """Declared Lipschitz constant of the map."""
        if self.lipschitz is not None:
            return self.lipschitz
        return Fraction(2) if self.is_shift else Fraction(self.a)

    @cached_property
    def language(self) -> ShiftLanguage:
        if not self.is_shift:
            raise TypeError("circle systems have no symbolic language")
        return ShiftLanguage(self.alphabet, self.forbidden)

    def points(self) -> tuple:
        return self._points

    @cached_property
    def _points(self) -> tuple:
        if self.is_shift:
            words = self.language.words(self.depth)
            if not words:
                raise EmptySystemError(f"empty system: no admissible words of length {self.depth}")
            return tuple(words)
        return tuple(Fraction(j, self.Q) for j in range(self.Q))

    def contains(self, p) -> bool:
        if self.is_shift:
            return isinstance(p, str) and len(p) <= self.depth and self.language.admissible(p)
        return isinstance(p, Fraction) and 0 <= p < 1 and (p * self.Q).denominator == 1

    def distance(self, x, y) -> Fraction:
        if self.is_shift:
            return shift_distance(x, y)
        return arc_distance(x, y)

    def apply(self, p):
        """One application of the system map."""
        if self.is_shift:
            if len(p) < 2:
                raise DepthError(f"depth exhausted: word {p!r} cannot be shifted", required_depth=2)
            return p[1:]
        return (self.a * p) % 1

    def iterate(self, p, times: int):
        if self.is_shift:
            if times and len(p) - times < 1:
                raise DepthError(
                    f"depth exhausted: {times} shifts need words of length >= {times + 1}, got {len(p)}",
                    required_depth=times + 1,
                )
            return p[times:]
        return (self.a ** times * p) % 1

    @cached_property
    def diameter(self) -> Fraction:
        """Diameter of the underlying (untruncated) phase space."""
        if not self.is_shift:
            return Fraction(1, 2)
        firsts = {w[0] for w in self.language.words(1)}
        if len(firsts) > 1:
            return Fraction(1)
        # single admissible first symbol: fall back to the truncated table
        return build_space(self).diameter

    def grid_point(self, text: str):
        """Parse a point id from its JSON/CSV form."""
        if self.is_shift:
            return str(text)
        p = Fraction(str(text))
        if not self.contains(p):
            raise ValueError(f"{text!r} is not a point of the Q={self.Q} grid")
        return p


def shift_distance(x: str, y: str) -> Fraction:
    if len(x) != len(y):
        raise ValueError(f"words of different depth: {x!r} vs {y!r}")
    for i, (a, b) in enumerate(zip(x, y)):
        if a != b:
            return Fraction(1, 2 ** i)
    return Fraction(0)


def arc_distance(x: Fraction, y: Fraction) -> Fraction:
    dx = (x - y) % 1
    return min(dx, 1 - dx)


def point_str(p) -> str:
    return p if isinstance(p, str) else f"{p.numerator}/{p.denominator}"


# ---------------------------------------------------------------------------
# metric spaces
# ---------------------------------------------------------------------------


class MetricSpace:
    """A finite point set with an exact distance oracle.

    The full distance table is only materialised on demand.
    """

    def __init__(self, points: Iterable, metric: Callable):
        self.points = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct")
        self._metric = metric
        self._index = {p: i for i, p in enumerate(self.points)}

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self._index

    def __iter__(self):
        return iter(self.points)

    def distance(self, p, q) -> Fraction:
        return self._metric(p, q)

    @property
    def metric(self) -> Callable:
        return self._metric

    @cached_property
    def table(self) -> list[list[Fraction]]:
        pts = self.points
        n = len(pts)
        t = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                t[i][j] = t[j][i] = self._metric(pts[i], pts[j])
        return t

    @cached_property
    def diameter(self) -> Fraction:
        if len(self.points) < 2:
            return Fraction(0)
        return max(max(row) for row in self.table)

    def restrict(self, points: Iterable) -> MetricSpace:
        points = list(points)
        missing = [p for p in points if p not in self._index]
        if missing:
            raise KeyError(f"point {missing[0]!r} not in space")
        return MetricSpace(points, self._metric)

    def check_axioms(self) -> None:
        """Exhaustive metric axiom check; raises AssertionError on failure."""
        t = self.table
        n = len(t)
        for i in range(n):
            if t[i][i] != 0:
                raise AssertionError(f"d(p,p) != 0 at {self.points[i]!r}")
            for j in range(n):
                if t[i][j] != t[j][i] or t[i][j] < 0:
                    raise AssertionError("asymmetric or negative distance")
                if i != j and t[i][j] == 0:
                    raise AssertionError("distinct points at distance 0")
                for k in range(n):
                    if t[i][k] > t[i][j] + t[j][k]:
                        raise AssertionError("triangle inequality violated")


def build_space(spec: SystemSpec) -> MetricSpace:
    return MetricSpace(spec.points(), spec.distance)


def apply_map(spec: SystemSpec, p):
    return spec.apply(p)


def bowen_distance(spec: SystemSpec, x, y, n: int, resolution: int = 1) -> Fraction:
    """``max_{0 <= i < n} d(T^i x, T^i y)``.

    For shifts the last iterate must keep ``resolution`` symbols, so words
    need length at least ``n - 1 + resolution``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if spec.is_shift:
        need = n - 1 + resolution
        if min(len(x), len(y)) < need:
            raise DepthError(f"bowen distance for n={n} needs depth >= {need}", required_depth=need)
    best = Fraction(0)
    for _ in range(n):
        best = max(best, spec.distance(x, y))
        if _ < n - 1:
            x, y = spec.apply(x), spec.apply(y)
    return best


def bowen_metric(spec: SystemSpec, n: int, resolution: int = 1) -> Callable:
    return lambda x, y: bowen_distance(spec, x, y, n, resolution)


def certify_lipschitz(spec: SystemSpec) -> Fraction:
    """Largest ratio d(Tx,Ty)/d(x,y) over represented pairs; must be <= K."""
    pts = spec.points()
    if spec.is_shift and spec.depth < 2:
        raise DepthError("lipschitz certification needs depth >= 2", required_depth=2)
    worst = Fraction(0)
    images = [spec.apply(p) for p in pts]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = spec.distance(pts[i], pts[j])
            if d == 0:
                continue
            dt = spec.distance(images[i], images[j])
            worst = max(worst, dt / d)
    return worst


# ---------------------------------------------------------------------------
# IE-pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IePair:
    """Two disjoint open sets.

    For shifts ``U0``/``U1`` hold cylinder prefixes (a point lies in the set
    when it starts with one of them); for the circle they hold grid points.
    """

    U0: tuple
    U1: tuple

    def __post_init__(self):
        object.__setattr__(self, "U0", tuple(self.U0))
        object.__setattr__(self, "U1", tuple(self.U1))
        if not self.U0 or not self.U1:
            raise ValueError("IE-pair sets must be nonempty")

    def side(self, j: int) -> tuple:
        return self.U1 if j else self.U0

    def contains(self, spec: SystemSpec, p, j: int) -> bool:
        if spec.is_shift:
            return any(p.startswith(c) for c in self.side(j))
        return p in self.side(j)

    def separation(self, spec: SystemSpec) -> Fraction:
        """``d(U0, U1)``; raises if the closures touch."""
        if spec.is_shift:
            best = None
            for c0 in self.U0:
                for c1 in self.U1:
                    f = next((i for i, (a, b) in enumerate(zip(c0, c1)) if a != b), None)
                    if f is None:
                        raise ValueError(f"cylinders [{c0}] and [{c1}] overlap")
                    d = Fraction(1, 2 ** f)
                    best = d if best is None else min(best, d)
            return best
        d = min(spec.distance(x, y) for x in self.U0 for y in self.U1)
        if d <= 0:
            raise ValueError("IE-pair sets overlap")
        return d

    @classmethod
    def from_json(cls, obj: dict | str, spec: SystemSpec) -> IePair:
        if isinstance(obj, str):
            obj = json.loads(obj)
        for key in ("U0", "U1"):
            if key not in obj:
                raise KeyError(key)
        conv = (lambda s: str(s)) if spec.is_shift else spec.grid_point
        return cls(tuple(conv(s) for s in obj["U0"]), tuple(conv(s) for s in obj["U1"]))

    def to_json(self) -> dict:
        return {"U0": [point_str(p) for p in self.U0], "U1": [point_str(p) for p in self.U1]}


def gamma_m(spec: SystemSpec, pair: IePair, m: int, exact: bool = False) -> Fraction:
    """A scale below which ``m`` steps of the orbit stay closer than d(U0,U1).

    The default is the Lipschitz closed form ``K**-m * d(U0,U1) / 2``. With
    ``exact=True`` the largest distance-table value satisfying the implication
    over all represented pairs is returned instead.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    sep = pair.separation(spec)
    if not exact:
        return sep / (2 * spec.K ** m)
    if spec.is_shift and spec.depth < m:
        raise DepthError(f"exact gamma_{m} needs depth >= {m}", required_depth=m)
    pts = spec.points()
    if spec.is_shift:
        # separation within m steps is decided by the first m - 1 + r symbols,
        # r = #{j : 2**-j >= sep}; pairs agreeing there never separate, and a
        # pair differing inside that prefix keeps its distance on any
        # representatives of the two prefix classes
        r = 0
        while Fraction(1, 2 ** r) >= sep:
            r += 1
        width = min(spec.depth, m - 1 + r)
        pts = tuple({p[:width]: p for p in reversed(pts)}.values())
    orbits = [[p] for p in pts]
    for orb in orbits:
        for _ in range(m - 1):
            orb.append(spec.apply(orb[-1]))
    best = None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if any(spec.distance(a, b) >= sep for a, b in zip(orbits[i], orbits[j])):
                d = spec.distance(pts[i], pts[j])
                best = d if best is None else min(best, d)
    if best is None:
        # no pair ever reaches the separation: every table scale works
        return build_space(spec).diameter
    return best


def load_system(path) -> SystemSpec:
    with open(path) as fh:
        return SystemSpec.from_json(json.load(fh))
