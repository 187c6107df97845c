"""Runnable checkers for the finite statements behind the lower bounds.

Each checker returns a :class:`CheckReport` holding the exact margins; a
report passes iff every required inequality holds with its margin on the
right side of zero.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cubes import epsilon_m, simplex_grid
from .independence import IndependenceWindow, block_summary, pick_anchors
from .measures import AnchorFamily, DiscreteMeasure, h_measures, split_along_face, vertex, xi
from .spaces import IePair, SystemSpec, build_space, gamma_m
from .transport import support_bound, w1, wnm


@dataclass
class CheckReport:
    lemma: str
    params: dict
    trials: int
    worst_margin: Fraction | None
    verdict: bool
    skipped: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, dict):
                return {str(k): enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        return {"lemma": self.lemma, "params": enc(self.params), "trials": self.trials,
                "skipped": self.skipped, "worst_margin": enc(self.worst_margin),
                "verdict": "pass" if self.verdict else "fail", "details": enc(self.details)}

    def summary(self) -> str:
        tag = "PASS" if self.verdict else "FAIL"
        return (f"[{tag}] {self.lemma}: {self.trials} trials, {self.skipped} skipped, "
                f"worst margin {self.worst_margin}")


def _worst(a, b):
    if a is None:
        return b
    return a if b is None else min(a, b)


def random_weights(rng: random.Random, points: Sequence, top: int = 9) -> DiscreteMeasure:
    raw = {p: rng.randint(1, top) for p in points}
    total = sum(raw.values())
    return DiscreteMeasure({p: Fraction(w, total) for p, w in raw.items()})


def random_simplex(rng: random.Random, k: int, denom: int = 12) -> tuple[Fraction, ...]:
    """Uniform-ish rational point of ``Delta_k`` with the given denominator; sometimes on a face."""
    cuts = sorted(rng.randint(0, denom) for _ in range(k - 1))
    b = [0] + cuts + [denom]
    return tuple(Fraction(b[i + 1] - b[i], denom) for i in range(k))


def _setup(spec: SystemSpec, m: int, n: int, pair: IePair, density=1, window=None):
    window = window or IndependenceWindow.naturals(n * m, pair)
    summ = block_summary(window, m, density)
    anchors = pick_anchors(spec, summ, n, pair)
    gam = gamma_m(spec, pair, m)
    eps = epsilon_m(gam, summ.q, spec.diameter)
    params = {"system": spec.to_json(), "m": m, "n": n, "q_m": summ.q, "gamma_m": gam, "epsilon_m": eps,
              "blocks": list(anchors.blocks)}
    return anchors, gam, eps, params


def _default_pair(spec: SystemSpec) -> IePair:
    a = spec.alphabet
    return IePair((a[0],), (a[1],))


def _proper_faces(k: int):
    """Nonempty proper index subsets of ``[k]``."""
    return [frozenset(s) for r in range(1, k) for s in itertools.combinations(range(k), r)]


# ---------------------------------------------------------------------------
# support lower bound
# ---------------------------------------------------------------------------


def check_support_bound(spec: SystemSpec, trials: int = 1000, seed: int = 0, max_support: int = 4) -> CheckReport:
    """``W1(mu, nu) >= mu(S - S') d(S - S', S')`` on random instances."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    space = build_space(spec)
    pts = list(space.points)
    worst = None
    for _ in range(trials):
        A = rng.sample(pts, rng.randint(1, max_support))
        B = rng.sample(pts, rng.randint(1, max_support))
        mu, nu = random_weights(rng, A), random_weights(rng, B)
        S = set(A) | set(rng.sample(pts, rng.randint(0, 2)))
        S2 = set(B) | set(rng.sample(pts, rng.randint(0, 2)))
        margin = w1(space, mu, nu).cost - support_bound(space, mu, nu, S, S2)
        worst = _worst(worst, margin)
    x, y = pts[0], pts[-1]
    tight = w1(space, DiscreteMeasure.dirac(x), DiscreteMeasure.dirac(y)).cost - support_bound(
        space, DiscreteMeasure.dirac(x), DiscreteMeasure.dirac(y), {x}, {y})
    return CheckReport("ffact", {"system": spec.to_json(), "seed": seed}, trials, worst,
                       worst >= 0 and tight == 0, details={"dirac_tight_margin": tight})


# ---------------------------------------------------------------------------
# decomposition along a face
# ---------------------------------------------------------------------------


def _random_cube(rng, anchors: AnchorFamily):
    return tuple(random_simplex(rng, anchors.k) for _ in anchors.blocks)


def check_decomposition(spec: SystemSpec, m: int = 2, n: int = 2, trials: int = 200, seed: int = 0,
                        pair: IePair | None = None) -> CheckReport:
    """``Xi(t) = lam Xi(t') + (1 - lam) Xi(t'')`` with ``lam`` the mass on the face's anchors."""
    pair = pair or _default_pair(spec)
    anchors, gam, eps, params = _setup(spec, m, n, pair)
    params["seed"] = seed
    rng = random.Random(seed)
    faces = _proper_faces(anchors.k)
    if not anchors.blocks or not faces:
        return CheckReport("decomposition", params, 0, None, True, details={"note": "no faces to split"})
    bad = 0
    for trial in range(trials):
        t = _random_cube(rng, anchors)
        slot = rng.randrange(len(anchors.blocks))
        face = rng.choice(faces)
        lam, t1, t2 = split_along_face(t, slot, face)
        mu = xi(t, anchors)
        on = anchors.points_with(slot, face)
        off = anchors.points_with(slot, set(range(anchors.k)) - face)
        ok = (mu == xi(t1, anchors).mix(xi(t2, anchors), lam)
              and mu.mass(on) == lam and mu.mass(on) + mu.mass(off) == 1
              and xi(t1, anchors).mass(on) == 1 and xi(t2, anchors).mass(off) == 1)
        bad += not ok
    # closed-form cases: a vertex factor and a centre factor
    k = anchors.k
    face = faces[0]
    tv = (vertex(k, min(face)),) + tuple(vertex(k, 0) for _ in anchors.blocks[1:])
    tc = (tuple(Fraction(1, k) for _ in range(k)),) + tv[1:]
    lam_v = split_along_face(tv, 0, face)[0]
    lam_c = split_along_face(tc, 0, face)[0]
    special = lam_v == 1 and lam_c == Fraction(len(face), k)
    margin = Fraction(0) if not bad and special else Fraction(-1)
    return CheckReport("decomposition", params, trials, margin, margin >= 0,
                       details={"failures": bad, "vertex_lambda": lam_v, "centre_lambda": lam_c})


# ---------------------------------------------------------------------------
# distance to a face
# ---------------------------------------------------------------------------


def face_grid(anchors: AnchorFamily, slot: int, face, denom: int = 4):
    """Cube points with ``slot`` factor on ``face`` and coordinates in ``(1/denom) Z``."""
    k = anchors.k
    per = simplex_grid(k, denom)
    on = [p for p in per if all(p[j] == 0 for j in range(k) if j not in face)]
    factors = [on if s == slot else per for s in range(len(anchors.blocks))]
    return list(itertools.product(*factors))


def check_tech(spec: SystemSpec, m: int = 2, n: int = 2, trials: int = 100, seed: int = 0,
               pair: IePair | None = None, grid_denom: int = 4) -> CheckReport:
    """Distance from ``Xi(t)`` to ``Xi(F_i)`` against the mass off the face.

    Upper: the witness ``Xi(t')`` is within ``diam * mu(S_opp)``. Lower: every
    face-grid point and the witness are at least ``gamma_m * mu(S_opp)`` away.
    """
    pair = pair or _default_pair(spec)
    anchors, gam, eps, params = _setup(spec, m, n, pair)
    params.update(seed=seed, grid_denom=grid_denom)
    rng = random.Random(seed)
    faces = _proper_faces(anchors.k)
    diam = spec.diameter
    worst_lo = worst_hi = None
    grids = {}
    for trial in range(trials):
        t = _random_cube(rng, anchors)
        slot = rng.randrange(len(anchors.blocks))
        face = rng.choice(faces)
        if trial == 1:
            # t on the opposite face: distance at least gamma_m
            opp = min(set(range(anchors.k)) - face)
            t = t[:slot] + (vertex(anchors.k, opp),) + t[slot + 1:]
        lam, t1, _ = split_along_face(t, slot, face)
        mu = xi(t, anchors)
        off = 1 - lam
        witness = wnm(spec, mu, xi(t1, anchors), n, m)
        worst_hi = _worst(worst_hi, diam * off - witness)
        key = (slot, face)
        if key not in grids:
            grids[key] = [xi(s, anchors) for s in face_grid(anchors, slot, face, grid_denom)]
        dmin = min([witness] + [wnm(spec, mu, nu, n, m) for nu in grids[key]])
        worst_lo = _worst(worst_lo, dmin - gam * off)
    worst = _worst(worst_lo, worst_hi)
    return CheckReport("tech", params, trials, worst, worst >= 0,
                       details={"worst_lower_margin": worst_lo, "worst_upper_margin": worst_hi,
                                "lower_bound_is": "face-grid relative"})


def check_inter(spec: SystemSpec, m: int = 2, n: int = 2, trials: int = 100, seed: int = 0,
                pair: IePair | None = None) -> CheckReport:
    """Close to every face of a family implies within ``gamma_m / 2`` of their meet.

    Sampling continues until ``trials`` instances satisfy the hypothesis (as
    certified by witness distances); the others are counted as skipped.
    """
    pair = pair or _default_pair(spec)
    anchors, gam, eps, params = _setup(spec, m, n, pair)
    params["seed"] = seed
    rng = random.Random(seed)
    k = anchors.k
    faces = _proper_faces(k)
    worst, skipped, done = None, 0, 0
    while done < trials and skipped < 20 * trials:
        slot = rng.randrange(len(anchors.blocks))
        fam = rng.sample(faces, rng.randint(1, min(3, len(faces))))
        meet = frozenset.intersection(*fam)
        t = list(_random_cube(rng, anchors))
        if meet and rng.random() < 0.8:
            # concentrate the slot factor near the meet so the hypothesis can hold
            j = rng.choice(sorted(meet))
            tiny = eps / (2 * k * spec.diameter)
            row = [tiny * Fraction(rng.randint(0, 1)) for _ in range(k)]
            row[j] = 1 - sum(row[i] for i in range(k) if i != j)
            t[slot] = tuple(row)
        t = tuple(t)
        mu = xi(t, anchors)
        if not all(wnm(spec, mu, xi(split_along_face(t, slot, F)[1], anchors), n, m) < eps for F in fam):
            skipped += 1
            continue
        done += 1
        if not meet:
            worst = _worst(worst, Fraction(-1))
            continue
        d = wnm(spec, mu, xi(split_along_face(t, slot, meet)[1], anchors), n, m)
        worst = _worst(worst, gam / 2 - d)
    verdict = worst is None or worst >= 0
    return CheckReport("inter", params, done, worst, verdict, skipped=skipped)


# ---------------------------------------------------------------------------
# covers of the sampled L_n family
# ---------------------------------------------------------------------------


def sample_family(anchors: AnchorFamily, denom: int = 2):
    per = simplex_grid(anchors.k, denom)
    ts = list(itertools.product(per, repeat=len(anchors.blocks)))
    return ts, [xi(t, anchors) for t in ts]


def ball_cover(spec, measures, centers, radius, n, m):
    """Open ``W_n^m`` balls of ``radius`` around the chosen centres, as index sets."""
    dist = {}

    def d(i, j):
        key = (min(i, j), max(i, j))
        if key not in dist:
            dist[key] = wnm(spec, measures[i], measures[j], n, m)
        return dist[key]

    cover = [frozenset(i for i in range(len(measures)) if d(c, i) < radius) for c in centers]
    missed = set(range(len(measures))) - set().union(*cover)
    if missed:
        raise ValueError(f"net too coarse: samples {sorted(missed)[:5]} are uncovered")
    return cover


def finite_separation_violation(ts, cover, k: int):
    """First ``(slot, point, family)`` breaking the separating property, or None.

    A point ``p`` lying in the elements ``E_p`` witnesses a violation in
    ``slot`` exactly when every vertex in the support of ``p``'s slot factor
    is the missing vertex of a (k-1)-face met by some element of ``E_p``:
    then those elements, paired with those faces, have a common point on
    the opposite of the faces' meet.
    """
    n_slots = len(ts[0])
    for slot in range(n_slots):
        meets = [set(v for v in range(k) if any(ts[p][slot][v] == 0 for p in U)) for U in cover]
        for p in range(len(ts)):
            E = [j for j, U in enumerate(cover) if p in U]
            supp = [v for v in range(k) if ts[p][slot][v] != 0]
            fam = []
            for v in supp:
                owner = next((j for j in E if v in meets[j]), None)
                if owner is None:
                    break
                fam.append((owner, v))
            else:
                return slot, p, fam
    return None


def check_coversep(spec: SystemSpec, m: int = 2, n: int = 2, pair: IePair | None = None, denom: int = 2,
                   radius=None, control: bool = True) -> CheckReport:
    """Covers by ``W_n^m`` balls of radius below ``epsilon_m / 2`` are separating.

    The negative control fattens the balls to ``2 gamma_m`` with the exact
    table value of ``gamma_m`` and must be rejected.
    """
    pair = pair or _default_pair(spec)
    anchors, gam, eps, params = _setup(spec, m, n, pair)
    radius = Fraction(radius) if radius is not None else eps / 4
    if radius >= eps / 2:
        raise ValueError("radius must stay below epsilon_m / 2")
    ts, mus = sample_family(anchors, denom)
    params.update(radius=radius, samples=len(ts))
    centers = list(range(len(ts)))
    cover = ball_cover(spec, mus, centers, radius, n, m)
    bad = finite_separation_violation(ts, cover, anchors.k)
    details = {"violation": bad}
    ok = bad is None
    if control:
        fat = 2 * gamma_m(spec, pair, m, exact=True)
        cov2 = ball_cover(spec, mus, centers, fat, n, m)
        neg = finite_separation_violation(ts, cov2, anchors.k)
        details["control_radius"] = fat
        details["control_violation"] = neg
        details["control_rejected"] = neg is not None
        ok = ok and neg is not None
    return CheckReport("coversep", params, len(ts), Fraction(0) if bad is None else Fraction(-1), ok,
                       details=details)


# ---------------------------------------------------------------------------
# the separated H family
# ---------------------------------------------------------------------------


def separation_margin(spec, family, n, m, threshold):
    """``min pairwise W_n^m - threshold`` and the arg-min pair."""
    best, arg = None, None
    for (i, a), (j, b) in itertools.combinations(enumerate(family), 2):
        d = wnm(spec, a, b, n, m)
        if best is None or d < best:
            best, arg = d, (i, j)
    return (None if best is None else best - threshold), arg


def check_sn(spec: SystemSpec, m: int = 2, n: int = 2, pair: IePair | None = None,
             control: bool = True) -> CheckReport:
    """Every distinct pair of the H family is more than ``gamma_m / 2**q_m`` apart.

    The margin is strict: the report passes iff it is positive.
    """
    pair = pair or _default_pair(spec)
    anchors, gam, eps, params = _setup(spec, m, n, pair)
    thr = gam / 2 ** anchors.q
    fam = h_measures(anchors)
    margin, arg = separation_margin(spec, fam, n, m, thr)
    size = len(fam)
    params.update(threshold=thr, family_size=size,
                  certified_cardinality=(2 ** (2 ** anchors.q) - 1) ** len(anchors.blocks))
    ok = margin is None or margin > 0
    details = {"closest_pair": arg, "pairs": size * (size - 1) // 2}
    if control and size >= 2:
        # a near-duplicate member must break the separation
        eta = thr / (2 * spec.diameter)
        extra = fam[0].mix(fam[1], 1 - eta)
        neg, _ = separation_margin(spec, fam[:2] + [extra], n, m, thr)
        details["control_margin"] = neg
        details["control_rejected"] = neg <= 0
        ok = ok and neg <= 0
    return CheckReport("sn", params, size * (size - 1) // 2, margin, ok, details=details)


LEMMAS = {
    "ffact": check_support_bound,
    "decomposition": check_decomposition,
    "tech": check_tech,
    "inter": check_inter,
    "coversep": check_coversep,
    "sn": check_sn,
}


def run_check(lemma: str, spec: SystemSpec, m: int = 2, n: int = 2, trials: int = 100, seed: int = 0) -> CheckReport:
    if lemma not in LEMMAS:
        raise KeyError(lemma)
    if lemma == "ffact":
        return check_support_bound(spec, trials, seed)
    if lemma in ("coversep", "sn"):
        return LEMMAS[lemma](spec, m, n)
    return LEMMAS[lemma](spec, m, n, trials, seed)


def run_all(spec: SystemSpec, m: int = 2, n: int = 2, trials: int = 100, seed: int = 0) -> list[CheckReport]:
    return [run_check(name, spec, m, n, trials, seed) for name in LEMMAS]
