from fractions import Fraction as F

import pytest

from oracles import sft_word_count
from wmdim import IePair, SystemSpec
from wmdim.independence import (
    IndependenceWindow,
    block_summary,
    encode,
    pick_anchors,
    standard_anchors,
    verify_independence,
)


def test_full_shift_certificate(pair01):
    spec = SystemSpec.full_shift(("0", "1"), 4)
    res = verify_independence(spec, pair01, [0, 1, 2])
    assert res.ok and len(res.witnesses) == 8


def test_golden_mean_counterexample(pair01):
    spec = SystemSpec.sft(("0", "1"), ["11"], 4)
    res = verify_independence(spec, pair01, [0, 1])
    assert res.verdict == "counterexample" and res.zeta == (1, 1)


def test_golden_mean_spaced_certificate():
    spec = SystemSpec.sft(("0", "1"), ["11"], 4)
    res = verify_independence(spec, IePair(("0",), ("10",)), [0, 2])
    assert res.ok
    # witnesses are the shortest realising words and each extends to a point
    assert sft_word_count(("0", "1"), ["11"], 4) == len(spec.points())
    assert all(any(p.startswith(w) for p in spec.points()) for w in res.witnesses.values())


def test_refusals(pair01):
    spec = SystemSpec.full_shift(("0", "1"), 20)
    with pytest.raises(ValueError, match="exhaustive bound"):
        verify_independence(spec, pair01, range(13), bound=12)
    with pytest.raises(ValueError, match="depth"):
        verify_independence(SystemSpec.full_shift(("0", "1"), 3), pair01, [0, 5])


def test_circle_grid_witnesses():
    c = SystemSpec.circle(2, 8)
    assert verify_independence(c, IePair((F(0), F(1, 4)), (F(1, 2), F(3, 4))), [0, 1]).ok
    # doubling never carries {0, 1/8} into {1/2, 5/8}
    res = verify_independence(c, IePair((F(0), F(1, 8)), (F(1, 2), F(5, 8))), [0, 1])
    assert res.verdict == "counterexample"


def test_block_summary_examples():
    nat = block_summary(IndependenceWindow.naturals(20), 2, 1)
    assert nat.q == 1 and nat.blocks == tuple(range(10))
    ev = block_summary(IndependenceWindow.evens(40), 4, F(1, 2))
    assert ev.q == 1 and ev.blocks == tuple(range(10))
    assert ev.counting_identity(10) == (20, 40)
    with pytest.raises(ValueError):
        block_summary(IndependenceWindow.naturals(8), 2, 0)


def test_density_record():
    w = IndependenceWindow.evens(6)
    assert w.density_record() == [1, 1, 2, 2, 3, 3]
    summ = block_summary(IndependenceWindow.evens(40), 3, F(1, 2))
    assert summ.window_density() >= 0


def test_encode_msb_first():
    assert encode(2, 3) == (0, 1, 0)
    assert [encode(i, 2) for i in range(4)] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_anchor_examples(pair01):
    spec = SystemSpec.full_shift(("0", "1"), 6)
    one = standard_anchors(spec, pair01, 2, 1)
    assert one.anchors == {(0,): "00", (1,): "10"}
    two = standard_anchors(spec, pair01, 2, 2)
    assert len(two) == 4 and len(set(two.anchors.values())) == 4


def test_anchor_count_and_visits(pair01):
    spec = SystemSpec.full_shift(("0", "1"), 12)
    fam = standard_anchors(spec, pair01, 4, 3)
    assert len(fam) == (2 ** fam.q) ** len(fam.blocks) == 64
    for idx, x in fam.anchors.items():
        for e, i in zip(fam.E, idx):
            for l, bit in zip(e, encode(i, fam.q)):
                assert pair01.contains(spec, spec.iterate(x, l), bit)


def test_anchor_errors(pair01):
    spec = SystemSpec.full_shift(("0", "1"), 3)
    with pytest.raises(ValueError, match="depth"):
        standard_anchors(spec, pair01, 2, 2)
    summ = block_summary(IndependenceWindow.evens(8, pair01), 4, F(1, 2))
    with pytest.raises(ValueError, match="horizon"):
        pick_anchors(SystemSpec.full_shift(("0", "1"), 16), summ, 3)
