"""Exact 1-Wasserstein transport between finitely supported measures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from .measures import DiscreteMeasure, pushforward
from .spaces import DepthError, MetricSpace, SystemSpec, bowen_metric

FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    entries: tuple  # (source, target, mass), sorted
    cost: Fraction | float

    def as_rows(self):
        return list(self.entries)


@dataclass(frozen=True)
class DualCertificate:
    potential: dict

    def value(self, mu: DiscreteMeasure, nu: DiscreteMeasure):
        f = self.potential
        return sum(w * f[p] for p, w in mu.items()) - sum(w * f[p] for p, w in nu.items())

    def lipschitz_violation(self, metric: Callable, tol=0):
        """First pair with ``|f(p) - f(q)| > d(p, q)``, or None."""
        pts = sorted(self.potential)
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                if abs(self.potential[p] - self.potential[q]) > metric(p, q) + tol:
                    return p, q
        return None

    def extend(self, points, metric: Callable) -> DualCertificate:
        """Tight 1-Lipschitz extension ``f(p) = min_q f(q) + d(p, q)`` to ``points``."""
        base = list(self.potential.items())
        out = dict(self.potential)
        for p in points:
            if p not in out:
                out[p] = min(v + metric(p, q) for q, v in base)
        return DualCertificate(out)


class Transport(NamedTuple):
    cost: Fraction | float
    plan: TransportPlan
    certificate: DualCertificate


# ---------------------------------------------------------------------------
# transportation simplex
# ---------------------------------------------------------------------------


def _northwest(a, b, zero):
    a, b = list(a), list(b)
    m, n = len(a), len(b)
    basis = {}
    i = j = 0
    while True:
        x = min(a[i], b[j])
        basis[(i, j)] = x
        a[i] -= x
        b[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if (a[i] <= zero and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1
    return basis


def _potentials(basis, C, m, n):
    # rows are nodes 0..m-1, columns m..m+n-1
    adj = [[] for _ in range(m + n)]
    for (i, j) in basis:
        adj[i].append(m + j)
        adj[m + j].append(i)
    u = [None] * m
    v = [None] * n
    u[0] = C[0][0] * 0
    stack = [0]
    while stack:
        node = stack.pop()
        for nb in adj[node]:
            if node < m:
                j = nb - m
                if v[j] is None:
                    v[j] = C[node][j] - u[node]
                    stack.append(nb)
            else:
                i = nb
                if u[i] is None:
                    u[i] = C[i][node - m] - v[node - m]
                    stack.append(nb)
    return u, v, adj


def _tree_path(adj, m, start, goal):
    """Node path from ``start`` to ``goal`` in the basis tree."""
    parent = {start: None}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == goal:
            break
        for nb in adj[node]:
            if nb not in parent:
                parent[nb] = node
                stack.append(nb)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]


def transportation_simplex(a: Sequence, b: Sequence, C: Sequence[Sequence], exact: bool = True):
    """Solve ``min <C, X>`` over couplings of ``a`` and ``b``.

    Bland's rule (smallest (i, j) enters, smallest (i, j) among tied
    candidates leaves) rules out cycling on degenerate bases.

    Returns ``(X as dict (i, j) -> mass, u, v)`` where ``u_i + v_j <= C_ij``
    with equality on the optimal basis.
    """
    m, n = len(a), len(b)
    tol = 0 if exact else FLOAT_TOL
    basis = _northwest(a, b, tol)
    while True:
        u, v, adj = _potentials(basis, C, m, n)
        enter = None
        for i in range(m):
            ui, row = u[i], C[i]
            for j in range(n):
                if (i, j) not in basis and row[j] - ui - v[j] < -tol:
                    enter = (i, j)
                    break
            if enter is not None:
                break
        if enter is None:
            return basis, u, v
        i0, j0 = enter
        # cycle: entering cell, then the tree path from column j0 back to row i0
        nodes = _tree_path(adj, m, m + j0, i0)
        cells = []
        for s in range(len(nodes) - 1):
            p, q = nodes[s], nodes[s + 1]
            cells.append((q, p - m) if p >= m else (p, q - m))
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(basis[c] for c in minus)
        leave = min(c for c in minus if basis[c] - theta <= tol)
        for c in minus:
            basis[c] -= theta
        for c in plus:
            basis[c] += theta
        del basis[leave]
        basis[enter] = theta


def _solve(metric: Callable, mu: DiscreteMeasure, nu: DiscreteMeasure, exact: bool, certify: bool):
    if exact and not (mu.is_exact and nu.is_exact):
        raise ValueError("exact mode needs rational weights")
    src, tgt = mu.support, nu.support
    if mu == nu:
        entries = tuple((p, p, w) for p, w in mu.items())
        zero = Fraction(0) if exact else 0.0
        cert = DualCertificate({p: zero for p in src}) if certify else None
        return Transport(zero, TransportPlan(entries, zero), cert)
    a = list(mu.weights) if exact else [float(w) for w in mu.weights]
    b = list(nu.weights) if exact else [float(w) for w in nu.weights]
    C = [[metric(p, q) if exact else float(metric(p, q)) for q in tgt] for p in src]
    if len(src) == 1 or len(tgt) == 1:
        plan = {(i, j): a[i] if len(tgt) == 1 else b[j] for i in range(len(src)) for j in range(len(tgt))}
        zero = C[0][0] * 0
        if len(src) == 1:
            u, v = [zero], [C[0][j] for j in range(len(tgt))]
        else:
            u, v = [C[i][0] for i in range(len(src))], [zero]
    else:
        plan, u, v = transportation_simplex(a, b, C, exact)
    cost = sum(x * C[i][j] for (i, j), x in plan.items())
    tol = 0 if exact else FLOAT_TOL
    entries = tuple(sorted((src[i], tgt[j], x) for (i, j), x in plan.items() if x > tol))
    cert = None
    if certify:
        # f = u on sources, -v on targets, then the tight 1-Lipschitz envelope
        # over the support union; keeps the dual value equal to the cost
        psi = {tgt[j]: -v[j] for j in range(len(tgt))}
        pts = sorted(set(src) | set(tgt))
        pot = {p: min(val + metric(p, q) if exact else val + float(metric(p, q))
                      for q, val in psi.items()) for p in pts}
        cert = DualCertificate(pot)
    return Transport(cost, TransportPlan(entries, cost), cert)


def _check_support(space: MetricSpace, mu: DiscreteMeasure):
    for p in mu.support:
        if p not in space:
            raise KeyError(f"support point {p!r} missing from space")


def w1(space: MetricSpace, mu: DiscreteMeasure, nu: DiscreteMeasure, exact: bool = True) -> Transport:
    """Optimal transport cost, plan and a 1-Lipschitz dual potential."""
    _check_support(space, mu)
    _check_support(space, nu)
    return _solve(space.distance, mu, nu, exact, certify=True)


def w1_cost(metric: Callable, mu: DiscreteMeasure, nu: DiscreteMeasure, exact: bool = True):
    """Cost only, with the ground metric given as a callable."""
    return _solve(metric, mu, nu, exact, certify=False).cost


# ---------------------------------------------------------------------------
# circle fast path
# ---------------------------------------------------------------------------


def w1_circle(mu: DiscreteMeasure, nu: DiscreteMeasure, Q: int) -> Fraction:
    """W1 on the grid ``{j/Q}`` with arc length, from cumulative masses.

    On the circle ``W1 = min_c sum_j |D_j - c| / Q`` where ``D_j`` is the
    cumulative mass difference up to grid point ``j``; a median attains it.
    """
    diff = [Fraction(0)] * Q
    for sign, meas in ((1, mu), (-1, nu)):
        for p, w in meas.items():
            if not isinstance(p, Fraction) or (p * Q).denominator != 1 or not 0 <= p < 1:
                raise ValueError(f"{p!r} is not a point of the Q={Q} circle grid")
            diff[int(p * Q)] += sign * Fraction(w)
    D, run = [], Fraction(0)
    for x in diff:
        run += x
        D.append(run)
    c = sorted(D)[Q // 2]
    return sum(abs(x - c) for x in D) / Q


# ---------------------------------------------------------------------------
# Support-based lower bound and dynamical Wasserstein metrics
# ---------------------------------------------------------------------------


def set_distance(metric: Callable, A, B) -> Fraction:
    return min(metric(p, q) for p in A for q in B)


def support_bound(space: MetricSpace, mu: DiscreteMeasure, nu: DiscreteMeasure, S, S2) -> Fraction:
    """``mu(S \\ S2) * d(S \\ S2, S2)``, a lower bound for ``W1(mu, nu)``."""
    S, S2 = set(S), set(S2)
    if not set(mu.support) <= S:
        raise ValueError("mu is not supported in S")
    if not set(nu.support) <= S2:
        raise ValueError("nu is not supported in S'")
    for p in S | S2:
        if p not in space:
            raise KeyError(f"point {p!r} missing from space")
    diff = S - S2
    if not diff:
        return Fraction(0)
    return mu.mass(diff) * set_distance(space.distance, diff, S2)


def _min_len(mu: DiscreteMeasure) -> int:
    return min(len(p) for p in mu.support)


def _check_depth(spec: SystemSpec, mus, steps: int, resolution: int = 1):
    if not spec.is_shift:
        return
    need = steps + resolution
    for mu in mus:
        if _min_len(mu) < need:
            raise DepthError(
                f"{steps} map applications need support words of length >= {need}, got {_min_len(mu)}",
                required_depth=need,
            )


def wnm(spec: SystemSpec, mu: DiscreteMeasure, nu: DiscreteMeasure, n: int, m: int, exact: bool = True):
    """``max_{0 <= k < n} W1(T_*^{km} mu, T_*^{km} nu)``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    _check_depth(spec, (mu, nu), (n - 1) * m)
    best = None
    for k in range(n):
        c = w1_cost(spec.distance, pushforward(spec, mu, k * m), pushforward(spec, nu, k * m), exact)
        best = c if best is None else max(best, c)
    return best


def w_bowen(spec: SystemSpec, mu: DiscreteMeasure, nu: DiscreteMeasure, n: int, exact: bool = True):
    """W1 for the ground metric d_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_depth(spec, (mu, nu), n - 1)
    return w1_cost(bowen_metric(spec, n), mu, nu, exact)
