import io
import random

import pytest

from binstretch.evasive import (
    Evasive,
    EvasiveError,
    Phase,
    adaptive_sequence,
    assert_analysis_invariants,
    iter_trace,
    random_check,
    random_feasible_sequence,
    read_sequence,
    replay,
)
from binstretch.feasibility import brute_force_feasible
from binstretch.goodsits import GsId


def test_fresh_state():
    s = Evasive(1)
    assert s.loads == [0, 0, 0]
    assert s.phase is Phase.INITIAL
    assert (s.capacity, s.opt) == (22, 16)
    assert s._entries() == [(0, 4), (1, 4)]
    s2 = Evasive(2)
    assert (s2.capacity, s2.opt) == (44, 32)
    assert s2._entries() == [(0, 8), (1, 8)]
    with pytest.raises(ValueError):
        Evasive(0)


def test_item_16_reaches_gs3():
    s = Evasive(1)
    assert s.step(16) == 0
    assert s.phase is Phase.GS_DELEGATED
    assert s.match.gs is GsId.GS3


def test_two_threes_reach_gs2_on_a():
    s = Evasive(1)
    assert s.step(3) == 0
    assert s.step(3) == 0
    assert s.loads == [6, 0, 0]
    assert s.match.gs is GsId.GS2


def test_large_j_sets_p():
    s = Evasive(1)
    assert s.step(7) == 0
    assert s.phase is Phase.LARGE_P
    assert s.p == 13
    assert s.tracked["j"] == 7


def test_qstep_observation_bounds():
    items = [1, 1, 1, 1, 1, 1, 1, 6, 7]
    state, trace = replay(items, 2)
    assert state.phase is Phase.QSTEP
    assert state.loads == [7, 13, 0]
    assert state.tracked["j"] == 7
    a = state.load_of("A")
    assert 3 * 2 < a < 4 * 2
    assert assert_analysis_invariants(state) == []
    assert len(trace) == len(items)


def test_overpack_raises_on_infeasible_input():
    s = Evasive(1)
    with pytest.raises(EvasiveError):
        for _ in range(5):
            s.step(16)


def test_item_range_checked():
    with pytest.raises(ValueError):
        Evasive(1).step(17)


def test_determinism():
    rng = random.Random(3)
    for _ in range(200):
        items = random_feasible_sequence(2, rng)
        a = Evasive(2).run(items)
        b = Evasive(2).run(items)
        assert a == b


def test_scaling_preserves_placements():
    rng = random.Random(9)
    for _ in range(300):
        items = random_feasible_sequence(1, rng)
        base = [p.bin for p in Evasive(1).run(items)]
        for k in (2, 3):
            assert [p.bin for p in Evasive(k).run([k * i for i in items])] == base


def test_copy_is_independent():
    s = Evasive(1)
    s.step(7)
    c = s.copy()
    c.step(9)
    assert s.loads == [7, 0, 0]
    assert c.signature() != s.signature()


def test_random_sequences_are_packable():
    rng = random.Random(4)
    for _ in range(200):
        items = random_feasible_sequence(1, rng)
        assert brute_force_feasible(items, 3, 16)


def test_adaptive_adversary_stays_feasible():
    rng = random.Random(5)
    for _ in range(40):
        state = Evasive(1)
        items = adaptive_sequence(state, rng)
        assert brute_force_feasible(items, 3, 16)
        assert max(state.loads) <= 22


def test_random_check_small():
    report = random_check(2, 300, seed=2, assert_analysis=True)
    assert report.safe
    assert report.analysis_violations == []
    assert report.max_load <= 44
    assert report.phases[Phase.LARGE_P] > 0


def test_read_sequence_checks_feasibility():
    assert read_sequence(io.StringIO("3\n# comment\n4 5\n"), 1) == [3, 4, 5]
    with pytest.raises(ValueError):
        read_sequence(["16 16 16 16"], 1)
    with pytest.raises(ValueError):
        read_sequence(["17"], 1)


def test_trace_lines():
    _, trace = replay([7, 9], 1)
    lines = list(iter_trace(trace))
    assert len(lines) == 2 and "7" in lines[0]


def crafted(k, phase, loads):
    s = Evasive(k)
    s.phase = phase
    s.loads = list(loads)
    s.bin_items = [[x] if x else [] for x in loads]
    return s


def test_qstep_halt_enters_b1():
    # q = 18 + (7 + 4)/2 = 23.5 at k=2, so x = 10 does not fit on B at 14
    s = crafted(2, Phase.QSTEP, (7, 14, 4))
    assert s.step(10) == 1
    assert s.phase is Phase.B1 and s.player is None
    assert s.tracked["x"] == 10
    assert s.loads == [7, 24, 4]


def test_b1_halt_enters_b2():
    # off the reachable path (s(A) = 0) only to drive the transition
    s = crafted(1, Phase.B1, (0, 7, 7))
    assert s.step(16) == 0
    assert s.phase is Phase.B2
    assert s.tracked["b2"] == 16
    assert s._entries() == [(0, 22), (1, 22), (2, 22)]
