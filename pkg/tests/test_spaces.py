import itertools
from fractions import Fraction as F

import pytest

from oracles import sft_word_count
from wmdim import DepthError, IePair, SystemSpec, bowen_distance, build_space, gamma_m
from wmdim.spaces import certify_lipschitz, shift_distance


def test_full_shift_points_and_distances(shift4):
    space = build_space(SystemSpec.full_shift(("0", "1"), 3))
    assert len(space) == 8
    assert space.distance("010", "011") == F(1, 4)
    assert space.diameter == 1
    space.check_axioms()


def test_golden_mean_word_counts():
    for depth in range(1, 11):
        spec = SystemSpec.sft(("0", "1"), ["11"], depth)
        assert len(spec.points()) == sft_word_count(("0", "1"), ["11"], depth)
    assert len(SystemSpec.sft(("0", "1"), ["11"], 8).points()) == 55


def test_sft_with_dead_ends_keeps_only_extendable_words():
    # after "1" only "10" may follow, and "00" is forbidden: strictly alternating words
    spec = SystemSpec.sft(("0", "1"), ["11", "00"], 5)
    assert spec.points() == ("01010", "10101")


def test_shift_map_and_depth_exhaustion(shift4):
    assert shift4.apply("0110") == "110"
    assert shift4.iterate("0110", 3) == "0"
    with pytest.raises(DepthError) as err:
        shift4.apply("1")
    assert err.value.required_depth == 2


def test_circle_map_and_metric(circle):
    assert circle.apply(F(3, 8)) == F(3, 4)
    assert circle.distance(F(1, 8), F(7, 8)) == F(1, 4)
    assert SystemSpec.circle(3, 5).apply(F(4, 5)) == F(2, 5)
    assert circle.diameter == F(1, 2)


def test_bowen_distance_examples(shift4):
    assert bowen_distance(shift4, "0011", "0010", 3) == F(1, 2)
    c = SystemSpec.circle(2, 8)
    assert bowen_distance(c, F(0), F(1, 8), 2) == F(1, 4)
    with pytest.raises(DepthError):
        bowen_distance(shift4, "0011", "0010", 5)


def test_lipschitz_certificates():
    assert certify_lipschitz(SystemSpec.full_shift(("0", "1"), 5)) == 2
    assert certify_lipschitz(SystemSpec.circle(2, 16)) == 2
    assert certify_lipschitz(SystemSpec.circle(3, 9)) <= 3


def test_gamma_closed_form_and_exact(pair01):
    spec = SystemSpec.full_shift(("0", "1"), 5)
    for m in range(1, 5):
        assert gamma_m(spec, pair01, m) == F(1, 2 ** (m + 1))
    for m in range(1, 4):
        assert gamma_m(spec, pair01, m, exact=True) >= gamma_m(spec, pair01, m)


def test_pair_separation_rejects_overlap(shift4):
    assert IePair(("0",), ("1",)).separation(shift4) == 1
    assert IePair(("00",), ("01",)).separation(shift4) == F(1, 2)
    with pytest.raises(ValueError):
        IePair(("0",), ("01",)).separation(shift4)


def test_json_round_trip_and_missing_key():
    spec = SystemSpec.sft(("a", "b"), ["bb"], 6)
    assert SystemSpec.from_json(spec.to_json()) == spec
    with pytest.raises(KeyError, match="depth"):
        SystemSpec.from_json({"kind": "full-shift", "alphabet": ["0", "1"]})


def test_shift_distance_needs_equal_lengths():
    with pytest.raises(ValueError):
        shift_distance("01", "011")


def _gamma_bruteforce(spec, pair, m):
    sep = pair.separation(spec)
    pts = list(spec.points())
    orbits = []
    for p in pts:
        orb = [p]
        for _ in range(m - 1):
            orb.append(spec.apply(orb[-1]))
        orbits.append(orb)
    vals = [spec.distance(pts[i], pts[j]) for i, j in itertools.combinations(range(len(pts)), 2)
            if any(spec.distance(a, b) >= sep for a, b in zip(orbits[i], orbits[j]))]
    return min(vals)


@pytest.mark.parametrize("spec", [SystemSpec.full_shift(("0", "1"), 7), SystemSpec.sft(("0", "1"), ["11"], 8),
                                  SystemSpec.full_shift(("0", "1", "2"), 5)])
def test_exact_gamma_matches_all_pairs(spec):
    for pair in (IePair(("0",), ("1",)), IePair(("0",), ("10",))):
        for m in (1, 2, 3, 4):
            assert gamma_m(spec, pair, m, exact=True) == _gamma_bruteforce(spec, pair, m)
