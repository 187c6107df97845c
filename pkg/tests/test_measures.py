import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmdim import SystemSpec
from wmdim.measures import (
    DiscreteMeasure,
    block_product_embedding,
    block_words,
    center,
    dirac_embedding,
    face_mass,
    h_family,
    pushforward,
    split_along_face,
    theta,
    vertex,
)

fractions01 = st.fractions(min_value=0, max_value=1, max_denominator=24)


def simplex2():
    return fractions01.map(lambda t: (t, 1 - t))


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        DiscreteMeasure({"0": F(1, 3)})
    DiscreteMeasure({"0": 0.25, "1": 0.75}, exact=False)
    assert DiscreteMeasure({"0": F(1), "1": 0}).support == ("0",)


def test_json_format():
    mu = DiscreteMeasure.from_json({"support": ["010", "110"], "weights": ["1/3", "2/3"]})
    assert mu["110"] == F(2, 3)
    assert DiscreteMeasure.from_json(mu.to_json()) == mu


def test_pushforward_examples(circle):
    assert pushforward(circle, DiscreteMeasure.dirac(F(1, 8))) == DiscreteMeasure.dirac(F(1, 4))
    c4 = SystemSpec.circle(2, 4)
    mu = DiscreteMeasure({F(1, 4): F(1, 2), F(3, 4): F(1, 2)})
    assert pushforward(c4, mu) == DiscreteMeasure.dirac(F(1, 2))
    s = SystemSpec.full_shift(("0", "1"), 3)
    img = pushforward(s, DiscreteMeasure.uniform(["000", "001", "010", "011"]))
    assert img == DiscreteMeasure.uniform(["00", "01", "10", "11"])


def test_pushforward_commutes_with_mixtures(shift4):
    rng = random.Random(3)
    pts = shift4.points()
    for _ in range(50):
        mu = DiscreteMeasure.uniform(rng.sample(pts, 3))
        nu = DiscreteMeasure.uniform(rng.sample(pts, 2))
        lam = F(rng.randint(0, 6), 6)
        assert pushforward(shift4, mu.mix(nu, lam)) == pushforward(shift4, mu).mix(pushforward(shift4, nu), lam)


def test_dirac_embedding():
    assert dirac_embedding(["x"], [5]) == DiscreteMeasure.dirac("x")
    assert dirac_embedding(["x", "y"], [1, 2]) == DiscreteMeasure({"x": F(1, 3), "y": F(2, 3)})
    assert dirac_embedding(["a", "b", "c"]).weights == (F(1, 7), F(2, 7), F(4, 7))
    with pytest.raises(ValueError, match="collide"):
        dirac_embedding(["a", "b", "c"], [1, 2, 3])


def test_dirac_embedding_is_injective_on_tuples(shift4):
    pts = shift4.points()[:5]
    seen = {}
    for tup in itertools.permutations(pts, 3):
        mu = dirac_embedding(tup)
        assert mu not in seen
        seen[mu] = tup


def test_block_product_examples():
    s = SystemSpec.full_shift(("0", "1"), 4)
    assert block_product_embedding(s, [(1, 0), (1, 0)]) == DiscreteMeasure.dirac("00")
    half = (F(1, 2), F(1, 2))
    assert block_product_embedding(s, [half, half]) == DiscreteMeasure.uniform(["00", "01", "10", "11"])
    with pytest.raises(ValueError):
        block_product_embedding(s, [(1, 0, 0)])


def test_block_product_equivariance():
    """f_m(shifted blocks) equals the m-fold pushforward of f_m(blocks)."""
    s = SystemSpec.full_shift(("0", "1"), 6)
    rng = random.Random(11)
    for _ in range(20):
        a = []
        for _ in range(3):
            raw = [rng.randint(0, 4) for _ in range(4)]
            raw[rng.randrange(4)] += 1
            a.append(tuple(F(x, sum(raw)) for x in raw))
        lhs = block_product_embedding(s, a[1:])
        rhs = pushforward(s, block_product_embedding(s, a), 2)
        assert lhs == rhs
    assert block_words("01", 2) == ["00", "01", "10", "11"]


def test_theta_closed_form():
    t, s = F(1, 3), F(1, 5)
    assert theta(((t, 1 - t), (s, 1 - s))) == (t * s, t * (1 - s), (1 - t) * s, (1 - t) * (1 - s))
    assert theta((vertex(3, 2), vertex(3, 0))) == vertex(9, 6)


@settings(max_examples=60, deadline=None)
@given(simplex2(), simplex2(), simplex2(), fractions01)
def test_theta_is_multi_affine(u, v, w, lam):
    mixed = tuple(lam * a + (1 - lam) * b for a, b in zip(u, v))
    lhs = theta((mixed, w))
    rhs = tuple(lam * a + (1 - lam) * b for a, b in zip(theta((u, w)), theta((v, w))))
    assert lhs == rhs
    assert sum(lhs) == 1


@settings(max_examples=60, deadline=None)
@given(simplex2(), simplex2(), simplex2(), simplex2())
def test_theta_is_injective(a, b, c, d):
    if (a, b) != (c, d):
        assert theta((a, b)) != theta((c, d))


def test_h_family_sizes():
    assert h_family(1) == [(1, 0), (0, 1), (F(1, 2), F(1, 2))]
    assert len(h_family(2)) == 15
    assert all(sum(t) == 1 and min(t) >= 0 for t in h_family(2))


def test_split_along_face():
    t = ((F(1, 6), F(1, 3), F(1, 2)), center(3))
    lam, t1, t2 = split_along_face(t, 0, {0, 1})
    assert lam == F(1, 2) == face_mass(t, 0, {0, 1})
    assert t1[0] == (F(1, 3), F(2, 3), 0) and t2[0] == (0, 0, 1)
    assert t1[1] == t2[1] == center(3)
