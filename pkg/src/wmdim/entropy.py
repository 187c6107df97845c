"""Separated and spanning counts, entropy at a scale, and power-law fits."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .independence import IndependenceWindow, block_summary, standard_anchors
from .measures import DiscreteMeasure, h_measures
from .spaces import DepthError, IePair, MetricSpace, SystemSpec, bowen_metric, build_space, gamma_m
from .transport import w1_cost, w_bowen, wnm

EXACT_LIMIT = 64


# ---------------------------------------------------------------------------
# counts
# ---------------------------------------------------------------------------


def _conflicts(points, metric, eps):
    n = len(points)
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if metric(points[i], points[j]) <= eps:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def _max_independent(adj: list[int]) -> int:
    """Maximum independent set size by branch and bound on bitmasks."""
    n = len(adj)
    best = 0

    def rec(cand: int, size: int):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        # branch on the candidate with most conflicts: take it or drop it
        v = max((i for i in range(n) if cand >> i & 1), key=lambda i: bin(adj[i] & cand).count("1"))
        if adj[v] & cand == 0:
            rec(cand & ~(1 << v), size + 1)
            return
        rec(cand & ~(1 << v) & ~adj[v], size + 1)
        rec(cand & ~(1 << v), size)

    rec((1 << n) - 1, 0)
    return best


def separated_count(points: Sequence, metric: Callable, eps, mode: str = "greedy") -> int:
    """Size of an ``eps``-separated subset (pairwise distance strictly above ``eps``).

    ``greedy`` scans points in order and keeps any point separated from the
    ones kept so far: a maximal set, hence a lower bound. ``exact`` solves
    maximum independent set on the conflict graph and is limited to 64 points.
    """
    points = list(points)
    if not points:
        return 0
    if mode == "greedy":
        kept = []
        for p in points:
            if all(metric(p, q) > eps for q in kept):
                kept.append(p)
        return len(kept)
    if mode == "exact":
        if len(points) > EXACT_LIMIT:
            raise ValueError(f"exact mode handles at most {EXACT_LIMIT} points, got {len(points)}")
        return _max_independent(_conflicts(points, metric, eps))
    raise ValueError(f"unknown mode {mode!r}")


def spanning_count(points: Sequence, metric: Callable, eps) -> int:
    """Greedy set cover of ``points`` by closed ``eps``-balls centred on them.

    At most ``H(N)`` times the optimum, with ``H`` the harmonic number and
    ``N`` the largest ball size.
    """
    points = list(points)
    balls = [frozenset(j for j, q in enumerate(points) if metric(p, q) <= eps) for p in points]
    left = set(range(len(points)))
    used = 0
    while left:
        best = max(range(len(points)), key=lambda i: (len(balls[i] & left), -i))
        left -= balls[best]
        used += 1
    return used


# ---------------------------------------------------------------------------
# entropy of the base system
# ---------------------------------------------------------------------------


@dataclass
class SeparationReport:
    metric: str
    eps: Fraction
    counts: list  # (n, greedy, exact or None)
    slope: float
    subadditivity: list = field(default_factory=list)  # (k, n, s_k(T^n), s_kn(T), ok)

    @property
    def ok(self) -> bool:
        return all(row[-1] for row in self.subadditivity)


def _radius(eps) -> int:
    """Number of ``j >= 0`` with ``2**-j > eps``."""
    eps = Fraction(eps)
    r = 0
    while Fraction(1, 2 ** r) > eps:
        r += 1
    return r


def _shift_classes(spec: SystemSpec, positions) -> int:
    """Number of distinct restrictions of represented words to ``positions``.

    Bowen-type metrics built from the shift metric are ultrametrics, so a
    maximal separated set has exactly one point per class.
    """
    positions = sorted(positions)
    if not positions:
        return 1
    if positions[-1] >= spec.depth:
        raise DepthError(f"needs depth >= {positions[-1] + 1}", required_depth=positions[-1] + 1)
    return len({tuple(w[p] for p in positions) for w in spec.points()})


def shift_bowen_count(spec: SystemSpec, eps, n: int, power: int = 1) -> int:
    """``s_n(d, T^power, eps)`` on the represented words of a shift."""
    r = _radius(eps)
    pos = set()
    for i in range(n):
        pos.update(range(i * power, i * power + r))
    return _shift_classes(spec, pos)


def _fit_slope(xs, ys) -> float:
    if len(xs) < 2:
        return 0.0
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def entropy_estimate(spec: SystemSpec, eps, n_range: Sequence[int], exact_upto: int = 0) -> SeparationReport:
    """``s_n(d, T, eps)`` for ``n`` in ``n_range`` and the slope of ``log s_n``.

    Shifts use the prefix-class count (exact); the circle uses greedy
    separated sets over the grid. For ``n <= exact_upto`` the exact
    maximum is also computed when the family is small enough.
    """
    eps = Fraction(eps)
    n_range = sorted(n_range)
    counts = []
    for n in n_range:
        if spec.is_shift:
            g = shift_bowen_count(spec, eps, n)
            counts.append((n, g, g))
            continue
        metric = bowen_metric(spec, n)
        pts = spec.points()
        g = separated_count(pts, metric, eps)
        e = separated_count(pts, metric, eps, "exact") if n <= exact_upto and len(pts) <= EXACT_LIMIT else None
        counts.append((n, g, e))
    slope = _fit_slope([c[0] for c in counts], [math.log(c[1]) for c in counts])
    sub = []
    if spec.is_shift:
        for power in (2, 3):
            for k in range(1, max(n_range) // power + 1):
                a = shift_bowen_count(spec, eps, k, power)
                b = shift_bowen_count(spec, eps, k * power)
                sub.append((k, power, a, b, a <= b))
    return SeparationReport("bowen", eps, counts, slope, sub)


# ---------------------------------------------------------------------------
# measure grids and the induced system
# ---------------------------------------------------------------------------


def cylinder_representatives(spec: SystemSpec, L: int) -> list:
    """Smallest represented word in each admissible length-``L`` cylinder."""
    if not spec.is_shift:
        return list(spec.points())
    if L > spec.depth:
        raise DepthError(f"cylinder depth {L} exceeds truncation depth {spec.depth}", required_depth=L)
    lang = spec.language
    return [lang.smallest_word(spec.depth, dict(enumerate(w))) for w in lang.words(L)]


def grid_size(points: int, g: int) -> int:
    return math.comb(points + g - 1, g)


def measure_grid(points: Sequence, g: int, limit: int = 5000) -> list[DiscreteMeasure]:
    """All probability vectors with weights in ``(1/g) Z`` on ``points``."""
    points = list(points)
    size = grid_size(len(points), g)
    if size > limit:
        raise ValueError(f"measure grid has {size} elements, above the limit {limit}")
    out = []
    for combo in itertools.combinations_with_replacement(range(len(points)), g):
        w: dict = {}
        for i in combo:
            w[points[i]] = w.get(points[i], 0) + Fraction(1, g)
        out.append(DiscreteMeasure(w))
    return out


def _pairwise(measures, dist):
    n = len(measures)
    table = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            table[i][j] = table[j][i] = dist(measures[i], measures[j])
    return table


def _count_from_table(table, eps, mode):
    idx = list(range(len(table)))
    return separated_count(idx, lambda i, j: table[i][j], eps, mode)


@dataclass
class InducedReport:
    eps: Fraction
    n: int
    m: int
    grid_size: int
    grid_count: int
    h_size: int
    h_min_distance: Fraction | None
    h_certified: int  # size of H if separated above eps, else 0


def induced_separated(spec: SystemSpec, g: int, L: int, eps, n: int, m: int, mode: str = "greedy",
                      pair: IePair | None = None, limit: int = 400) -> InducedReport:
    """Separated count of a measure grid under ``W_n^m``, plus the H family.

    The grid holds every measure with weights in ``(1/g) Z`` on the
    representatives of depth-``L`` cylinders. When ``pair`` is given the
    H family built from anchors of that pair is measured too.
    """
    eps = Fraction(eps)
    reps = cylinder_representatives(spec, L)
    size = grid_size(len(reps), g)
    if size > limit:
        raise ValueError(f"measure grid has {size} elements, above the limit {limit}")
    grid = measure_grid(reps, g, limit)
    table = _pairwise(grid, lambda a, b: wnm(spec, a, b, n, m))
    count = _count_from_table(table, eps, mode if size <= EXACT_LIMIT else "greedy")
    h_size, h_min, cert = 0, None, 0
    if pair is not None:
        fam = h_measures(standard_anchors(spec, pair, m, n))
        h_size = len(fam)
        if h_size > 1:
            h_min = min(wnm(spec, a, b, n, m) for a, b in itertools.combinations(fam, 2))
            cert = h_size if h_min > eps else 0
        else:
            cert = 1
    return InducedReport(eps, n, m, size, count, h_size, h_min, cert)


def covering_upper_bound(space: MetricSpace | SystemSpec, eps) -> tuple[Fraction, int]:
    """``((1/eps) ** s_hat, s_hat)`` with ``s_hat`` the greedy spanning count at ``eps/2``."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if isinstance(space, SystemSpec):
        space = build_space(space)
    s_hat = spanning_count(space.points, space.distance, eps / 2)
    return (1 / eps) ** s_hat, s_hat


def spanning_count_at(spec: SystemSpec, r) -> int:
    """Spanning count of the base space at radius ``r``.

    On shifts the closed ``r``-balls are the cylinders of length ``j`` with
    ``2**-j <= r``, so one representative per such cylinder suffices.
    """
    r = Fraction(r)
    if spec.is_shift:
        reps = cylinder_representatives(spec, min(spec.depth, _radius(r)))
        return spanning_count(reps, spec.distance, r)
    return spanning_count(spec.points(), spec.distance, r)


def grid_packing(space: MetricSpace, g: int, eps, mode: str = "greedy", limit: int = 400) -> int:
    """Separated count of the ``1/g`` measure grid on ``space`` under ``W1``."""
    grid = measure_grid(space.points, g, limit)
    table = _pairwise(grid, lambda a, b: w1_cost(space.distance, a, b))
    return _count_from_table(table, Fraction(eps), mode if len(grid) <= EXACT_LIMIT else "greedy")


def entropy_order_estimate(spec: SystemSpec, g: int, L: int, eps, n_range: Sequence[int],
                           limit: int = 400) -> tuple[float | None, list]:
    """Slope of ``log log s_n`` against ``n`` over a measure grid under ``W_{d_n}``.

    Grids truncate the true supremum; rows with a count of 1 are skipped.
    """
    eps = Fraction(eps)
    grid = measure_grid(cylinder_representatives(spec, L), g, limit)
    rows = []
    for n in sorted(n_range):
        table = _pairwise(grid, lambda a, b: w_bowen(spec, a, b, n))
        c = _count_from_table(table, eps, "greedy")
        rows.append((n, c))
    usable = [(n, math.log(math.log(c))) for n, c in rows if c > 1]
    if len(usable) < len(rows):
        warnings.warn("separated count of 1 at some n: log log undefined, row skipped")
    if len(usable) < 2:
        return None, rows
    return _fit_slope([u[0] for u in usable], [u[1] for u in usable]), rows


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


@dataclass
class RateFit:
    samples: list
    C: float
    alpha: float
    residuals: list

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residuals))


def rate_fit(samples: Sequence[tuple]) -> RateFit:
    """Least squares fit of ``log value = log C - alpha * log eps``."""
    samples = [(float(e), float(v)) for e, v in samples]
    if len(samples) < 3:
        raise ValueError("rate_fit needs at least 3 samples")
    if any(e <= 0 or v <= 0 for e, v in samples):
        raise ValueError("scales and values must be positive")
    x = np.log([e for e, _ in samples])
    y = np.log([v for _, v in samples])
    A = np.vstack([np.ones_like(x), -x]).T
    (logC, alpha), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([logC, alpha])
    return RateFit(samples, float(math.exp(logC)), float(alpha), [float(r) for r in res])


class PowerLawRegressor:
    """Estimator-style wrapper around :func:`rate_fit`: ``value ~ C * eps**-alpha``."""

    def __init__(self, min_samples: int = 3):
        self.min_samples = min_samples

    def get_params(self, deep: bool = True) -> dict:
        return {"min_samples": self.min_samples}

    def set_params(self, **params) -> PowerLawRegressor:
        for k, v in params.items():
            if k not in self.get_params():
                raise ValueError(f"unknown parameter {k!r}")
            setattr(self, k, v)
        return self

    def fit(self, X, y) -> PowerLawRegressor:
        X = np.asarray(X, float).reshape(-1)
        if len(X) < self.min_samples:
            raise ValueError(f"need at least {self.min_samples} samples")
        fit = rate_fit(list(zip(X, np.asarray(y, float))))
        self.C_, self.alpha_, self.residuals_ = fit.C, fit.alpha, np.asarray(fit.residuals)
        return self

    def predict(self, X):
        if not hasattr(self, "alpha_"):
            raise RuntimeError("call fit first")
        return self.C_ * np.asarray(X, float) ** -self.alpha_

    def score(self, X, y) -> float:
        """R^2 in log space."""
        ly = np.log(np.asarray(y, float))
        lp = np.log(self.predict(X))
        ss = float(((ly - ly.mean()) ** 2).sum())
        return 1.0 - float(((ly - lp) ** 2).sum()) / ss if ss else 1.0


@dataclass
class CurveRow:
    m: int
    q: int
    gamma: Fraction
    scale: Fraction
    blocks: int
    bound: float
    h_size: int
    certified: bool | None

    def as_tuple(self):
        return (self.m, self.q, self.gamma, self.scale, self.bound)


def lower_bound(m: int, n: int, q: int, blocks: int) -> float:
    """``(1/(n m)) * blocks * log(2**(2**q) - 1)``."""
    return blocks * math.log(2 ** (2 ** q) - 1) / (n * m)


def lower_bound_curve(spec: SystemSpec, pair: IePair, m_range: Sequence[int], n: int, density=1,
                      window: IndependenceWindow | None = None, certify_n: int | None = 1) -> list[CurveRow]:
    """Per ``m``: scale ``gamma_m / 2**q_m`` and the H-family entropy bound.

    With ``certify_n`` set, the H family for ``min(n, certify_n)`` blocks is
    built and its pairwise ``W_n^m`` separation above the scale is checked
    exactly; ``certified`` records the outcome.
    """
    rows = []
    for m in sorted(m_range):
        w = window or IndependenceWindow.naturals(n * m, pair)
        summ = block_summary(w, m, density)
        c = len(summ.blocks_below(n))
        gam = gamma_m(spec, pair, m)
        scale = gam / 2 ** summ.q
        cert = None
        h_size = (2 ** (2 ** summ.q) - 1) ** c
        if certify_n:
            nn = min(n, certify_n)
            fam = h_measures(standard_anchors(spec, pair, m, nn, density=density))
            cert = all(wnm(spec, a, b, nn, m) > scale for a, b in itertools.combinations(fam, 2))
        rows.append(CurveRow(m, summ.q, gam, scale, c, lower_bound(m, n, summ.q, c), h_size, cert))
    return rows
