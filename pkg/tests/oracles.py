"""Independent reference computations used only by the test-suite."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import lcm


def _scale(values):
    den = 1
    for v in values:
        den = lcm(den, Fraction(v).denominator)
    return den, [int(Fraction(v) * den) for v in values]


def transport_vertex_min(a, b, C):
    """Minimum cost over all vertices of the transportation polytope.

    Every vertex has a forest support, hence a leaf row or column whose only
    cell carries ``min(a_i, b_j)`` of the residual masses. Saturating any cell
    and recursing therefore visits every vertex; memoising on the residual
    masses (scaled to integers) keeps 5 x 5 problems under a second.
    """
    m, n = len(a), len(b)
    wden, ints = _scale(list(a) + list(b))
    ia, ib = ints[:m], ints[m:]
    cden, flat = _scale([c for row in C for c in row])
    IC = [flat[i * n:(i + 1) * n] for i in range(m)]

    @lru_cache(maxsize=None)
    def best(rows, cols):
        out = None
        for i in range(m):
            ai = rows[i]
            if not ai:
                continue
            Ci = IC[i]
            for j in range(n):
                bj = cols[j]
                if not bj:
                    continue
                if ai <= bj:
                    x = ai
                    nr = rows[:i] + (0,) + rows[i + 1:]
                    nc = cols[:j] + (bj - x,) + cols[j + 1:]
                else:
                    x = bj
                    nr = rows[:i] + (ai - x,) + rows[i + 1:]
                    nc = cols[:j] + (0,) + cols[j + 1:]
                v = x * Ci[j] + best(nr, nc)
                if out is None or v < out:
                    out = v
        return 0 if out is None else out

    return Fraction(best(tuple(ia), tuple(ib)), wden * cden)


def transport_vertices(a, b):
    """All vertices (as frozensets of (i, j, mass)) of the transportation polytope."""
    out = set()

    def rec(rows, cols, acc):
        if not rows:
            out.add(frozenset(acc))
            return
        for ri, (i, ai) in enumerate(rows):
            for cj, (j, bj) in enumerate(cols):
                x = min(ai, bj)
                nr = tuple(r if k != ri else (i, ai - x) for k, r in enumerate(rows) if k != ri or ai - x)
                nc = tuple(c if k != cj else (j, bj - x) for k, c in enumerate(cols) if k != cj or bj - x)
                rec(nr, nc, acc + ((i, j, x),))

    rec(tuple(enumerate(a)), tuple(enumerate(b)), ())
    # merge repeated cells produced by degenerate paths
    merged = set()
    for v in out:
        d = {}
        for i, j, x in v:
            d[(i, j)] = d.get((i, j), 0) + x
        merged.add(frozenset((k, x) for k, x in d.items() if x))
    return merged


def max_separated_bruteforce(points, metric, eps):
    n = len(points)
    for r in range(n, 0, -1):
        for sub in itertools.combinations(range(n), r):
            if all(metric(points[i], points[j]) > eps for i, j in itertools.combinations(sub, 2)):
                return r
    return 0


def min_cover_bruteforce(points, metric, eps):
    n = len(points)
    for r in range(1, n + 1):
        for centers in itertools.combinations(points, r):
            if all(any(metric(p, c) <= eps for c in centers) for p in points):
                return r
    return n


def sft_word_count(alphabet, forbidden, length):
    """Transfer-matrix count of right-extendable admissible words."""
    w = max((len(f) for f in forbidden), default=1)
    states = ["".join(t) for t in itertools.product(alphabet, repeat=w - 1)]
    states = [s for s in states if not any(f in s for f in forbidden)]

    def ok(s):
        return not any(f in s for f in forbidden)

    succ = {s: [(s + c)[1:] if w > 1 else "" for c in alphabet if ok(s + c)] for s in states}
    alive = set(states)
    changed = True
    while changed:
        changed = False
        for s in list(alive):
            if not any(t in alive for t in succ[s]):
                alive.discard(s)
                changed = True
    if length >= w - 1:
        # vector of counts of extendable words ending in each state
        counts = {s: 1 for s in alive}
        for _ in range(length - (w - 1)):
            nxt = {s: 0 for s in alive}
            for s, c in counts.items():
                for t in succ[s]:
                    if t in alive:
                        nxt[t] += c
            counts = nxt
        return sum(counts.values())
    return len({s[:length] for s in alive})


def _inside(lo, hi, lo_open, hi_open, x):
    return (lo < x or (lo == x and not lo_open)) and (x < hi or (x == hi and not hi_open))


def simplex_points(k, D):
    """All points of the k-simplex with coordinates in (1/D)Z, by stars and bars."""
    out = []
    for bars in itertools.combinations(range(D + k - 1), k - 1):
        prev, coords = -1, []
        for b in bars:
            coords.append(b - prev - 1)
            prev = b
        coords.append(D + k - 2 - prev)
        out.append(tuple(Fraction(c, D) for c in coords))
    return out


def cover_order_oracle(raw_boxes, k, n, d):
    """Order of a box cover from sampled points of every arrangement cell.

    ``raw_boxes[b][m][j] = (lo, hi, lo_open, hi_open)`` with endpoints in
    ``(1/d)Z``. The arrangement of hyperplanes ``t_j = c`` inside one simplex
    factor has vertices in ``(1/d)Z``; every relatively open cell contains the
    barycentre of at most ``k`` of its vertices, so the ``1/(d * lcm(1..k))``
    grid meets every cell. Multiplicity factors over the cube's slots: a
    point lies in box ``b`` iff each factor lies in ``b``'s factor.
    Returns ``(order, covered)``.
    """
    D = d * lcm(*range(1, k + 1))
    pts = simplex_points(k, D)
    per_factor = []
    for m in range(n):
        sigs = set()
        for t in pts:
            sigs.add(frozenset(b for b, box in enumerate(raw_boxes)
                               if all(_inside(*box[m][j], t[j]) for j in range(k))))
        per_factor.append(sigs)
    best = 0
    covered = True
    for combo in itertools.product(*per_factor):
        common = frozenset.intersection(*combo)
        best = max(best, len(common))
        covered &= bool(common)
    return best - 1, covered
