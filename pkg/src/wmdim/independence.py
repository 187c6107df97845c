"""Independence sets for IE-pairs, block bookkeeping and anchor selection."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .measures import AnchorFamily
from .spaces import IePair, SystemSpec, point_str

DEFAULT_BOUND = 12


class UnrealizablePattern(ValueError):
    def __init__(self, message, pattern=None):
        super().__init__(message)
        self.pattern = pattern


@dataclass(frozen=True)
class IndependenceWindow:
    """Finite window ``I ∩ [0, horizon)`` of an independence set."""

    indices: tuple[int, ...]
    horizon: int
    pair: IePair | None = None

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if any(i < 0 or i >= self.horizon for i in idx):
            raise ValueError("indices must lie in [0, horizon)")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def naturals(cls, horizon: int, pair: IePair | None = None) -> IndependenceWindow:
        return cls(tuple(range(horizon)), horizon, pair)

    @classmethod
    def evens(cls, horizon: int, pair: IePair | None = None) -> IndependenceWindow:
        return cls(tuple(range(0, horizon, 2)), horizon, pair)

    def count_below(self, n: int) -> int:
        """``#(I ∩ [0, n))``."""
        return sum(1 for i in self.indices if i < n)

    def density_record(self) -> list[int]:
        out, c, s = [], 0, set(self.indices)
        for n in range(1, self.horizon + 1):
            c += (n - 1) in s
            out.append(c)
        return out


@dataclass
class IndependenceResult:
    verdict: str  # "certificate" | "counterexample"
    J: tuple[int, ...]
    zeta: tuple[int, ...] | None = None
    witnesses: dict = field(default_factory=dict)
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "certificate"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "J": list(self.J)}
        if self.zeta is not None:
            out["zeta"] = list(self.zeta)
        if self.witnesses:
            out["witnesses"] = {"".join(map(str, z)): point_str(w) for z, w in self.witnesses.items()}
        if self.note:
            out["note"] = self.note
        return out


def _shift_constraints(pair: IePair, visits: dict[int, int]):
    """Position -> symbol constraints for ``T^l x in U_{visits[l]}``.

    Only single-cylinder sides are supported; returns None on a clash.
    """
    cons: dict[int, str] = {}
    for l, j in visits.items():
        side = pair.side(j)
        if len(side) != 1:
            raise ValueError("shift IE-pair sides must be single cylinders")
        for r, c in enumerate(side[0]):
            if cons.get(l + r, c) != c:
                return None
            cons[l + r] = c
    return cons


def realize(spec: SystemSpec, pair: IePair, visits: dict[int, int], length: int | None = None):
    """A point whose orbit visits ``U_{visits[l]}`` at time ``l``, or None.

    For shifts this is the lexicographically smallest such word; its length
    defaults to the last constrained position plus one.
    """
    if spec.is_shift:
        cons = _shift_constraints(pair, visits)
        if cons is None:
            return None
        need = max(cons, default=-1) + 1
        length = max(length or 0, need, 1)
        return spec.language.smallest_word(length, cons)
    for p in spec.points():
        if all(pair.contains(spec, spec.iterate(p, l), j) for l, j in visits.items()):
            return p
    return None


def verify_independence(spec: SystemSpec, pair: IePair, J: Iterable[int], bound: int = DEFAULT_BOUND) -> IndependenceResult:
    """Check every 0/1 pattern along ``J`` is realised by some orbit.

    Exhaustive over the ``2**|J|`` patterns in lexicographic order; the first
    unrealisable one is returned as a counterexample. On the circle only grid
    points are searched, so a miss is reported as a counterexample with a note.
    """
    J = tuple(sorted(set(int(j) for j in J)))
    if any(j < 0 for j in J):
        raise ValueError("J must contain nonnegative times")
    if len(J) > bound:
        raise ValueError(f"|J| = {len(J)} exceeds the exhaustive bound {bound}; refusing to sample")
    if spec.is_shift:
        top = max(J, default=0) + max(len(c) for c in pair.U0 + pair.U1)
        if top > spec.depth:
            raise ValueError(f"J reaches position {top - 1}, beyond truncation depth {spec.depth}")
    witnesses = {}
    for zeta in itertools.product((0, 1), repeat=len(J)):
        x = realize(spec, pair, dict(zip(J, zeta)))
        if x is None:
            note = "no grid point realises the pattern" if not spec.is_shift else ""
            return IndependenceResult("counterexample", J, zeta=zeta, note=note)
        witnesses[zeta] = x
    return IndependenceResult("certificate", J, witnesses=witnesses)


# ---------------------------------------------------------------------------
# block bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSummary:
    m: int
    density: Fraction
    q: int
    block_counts: tuple[int, ...]
    blocks: tuple[int, ...]  # I^m: blocks with more than q elements of I
    window: IndependenceWindow

    @property
    def num_blocks(self) -> int:
        return len(self.block_counts)

    def blocks_below(self, n: int) -> tuple[int, ...]:
        """``I^m_n`` as the blocks ``k < n`` of ``I^m``."""
        return tuple(k for k in self.blocks if k < n)

    def counting_identity(self, n: int) -> tuple[int, int]:
        """``(#I_{mn}, m #I^m_n + q (n - #I^m_n))``; the first never exceeds the second."""
        if n > self.num_blocks:
            raise ValueError(f"n={n} exceeds the {self.num_blocks} blocks in the window")
        c = len(self.blocks_below(n))
        return self.window.count_below(self.m * n), self.m * c + self.q * (n - c)

    def window_density(self, n: int | None = None) -> Fraction:
        n = self.num_blocks if n is None else n
        return Fraction(len(self.blocks_below(n)), n)

    def first_indices(self, k: int) -> tuple[int, ...]:
        """``E_k``: the first ``q`` elements of ``I`` in block ``k``."""
        inside = [i for i in self.window.indices if self.m * k <= i < self.m * (k + 1)]
        return tuple(inside[: self.q])


def q_of(m: int, density) -> int:
    return math.floor(m * Fraction(density) / 2)


def block_summary(window: IndependenceWindow, m: int, density) -> BlockSummary:
    density = Fraction(density)
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    if window.horizon < m:
        raise ValueError("horizon shorter than one block")
    q = q_of(m, density)
    nb = window.horizon // m
    counts = [0] * nb
    for i in window.indices:
        if i // m < nb:
            counts[i // m] += 1
    blocks = tuple(k for k, c in enumerate(counts) if c > q)
    return BlockSummary(m, density, q, tuple(counts), blocks, window)


# ---------------------------------------------------------------------------
# anchors
# ---------------------------------------------------------------------------


def encode(i: int, q: int) -> tuple[int, ...]:
    """Binary digits of ``i`` over ``q`` positions, most significant first."""
    return tuple((i >> (q - 1 - r)) & 1 for r in range(q))


def pick_anchors(spec: SystemSpec, summary: BlockSummary, n: int, pair: IePair | None = None) -> AnchorFamily:
    """One point ``x_I`` per ``I in [2**q] ** I^m_n`` realising the prescribed visits.

    In block ``k`` the index ``I_k`` is written in binary over ``E_k`` and the
    point must satisfy ``T^l x in U_bit`` for each ``l in E_k``. Shift anchors
    are words of length ``n * m`` (longer if a cylinder overhangs).
    """
    pair = pair or summary.window.pair
    if pair is None:
        raise ValueError("an IE-pair is required")
    if n * summary.m > summary.window.horizon:
        raise ValueError(f"n*m = {n * summary.m} exceeds the window horizon {summary.window.horizon}")
    q, m = summary.q, summary.m
    blocks = summary.blocks_below(n)
    E = tuple(summary.first_indices(k) for k in blocks)
    for k, e in zip(blocks, E):
        if len(e) < q:
            raise ValueError(f"block {k} has fewer than q={q} indices")
    anchors = {}
    length = n * m
    if spec.is_shift:
        length = max(length, max((l for e in E for l in e), default=0) + max(len(c) for c in pair.U0 + pair.U1))
        if length > spec.depth:
            raise ValueError(f"anchors need depth {length}, system truncated at {spec.depth}")
    for idx in itertools.product(range(2 ** q), repeat=len(blocks)):
        visits = {}
        for e, i in zip(E, idx):
            visits.update(zip(e, encode(i, q)))
        x = realize(spec, pair, visits, length if spec.is_shift else None)
        if x is None:
            raise UnrealizablePattern(f"pattern {visits} is not realisable", pattern=visits)
        for l, j in visits.items():
            if not pair.contains(spec, spec.iterate(x, l), j):
                raise AssertionError(f"anchor {x!r} misses U_{j} at time {l}")
        anchors[idx] = x
    if len(set(anchors.values())) != len(anchors):
        raise UnrealizablePattern("anchors are not pairwise distinct")
    return AnchorFamily(q=q, m=m, n=n, blocks=blocks, E=E, anchors=anchors)


def standard_anchors(spec: SystemSpec, pair: IePair, m: int, n: int, window: IndependenceWindow | None = None,
                     density=1) -> AnchorFamily:
    """Anchors for ``I`` = all naturals (or the given window) with ``n*m`` horizon."""
    window = window or IndependenceWindow.naturals(n * m, pair)
    summary = block_summary(window, m, density)
    return pick_anchors(spec, summary, n, pair)
