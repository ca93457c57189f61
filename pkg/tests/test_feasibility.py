import random
from itertools import combinations_with_replacement

import pytest

from binstretch.core import ItemMultiset, SearchParams, config_from
from binstretch.feasibility import (
    FeasibilityStats,
    bfd_max_slack,
    brute_force_feasible,
    max_feasible_item,
    max_sendable,
    test_feasible,
    upper_bound_next_item,
)
from binstretch.hashing import EvictingCache


def multisets(opt, max_total, max_items):
    for n in range(max_items + 1):
        for combo in combinations_with_replacement(range(1, opt + 1), n):
            if sum(combo) <= max_total:
                yield combo


@pytest.mark.parametrize("bins,items,expected", [
    (3, [6, 6, 6], True),
    (2, [6, 6, 6], False),
    (3, [5, 5, 5, 5, 5, 5], True),
    (3, [5, 5, 5, 5, 5, 5, 1], False),
    (2, [4, 4, 3, 3, 3, 3], True),
    (2, [4, 4, 4, 4, 4], False),
    (2, [4, 4, 4, 3, 3, 2], True),
    (3, [], True),
    (3, [11], False),
])
def test_known_packings(backend, bins, items, expected):
    assert test_feasible(items, bins, 10, backend) is expected
    assert brute_force_feasible(items, bins, 10) is expected


def test_small_exhaustive_agreement(backend):
    for combo in multisets(6, 18, 8):
        assert test_feasible(combo, 3, 6, backend) == brute_force_feasible(combo, 3, 6), combo


def test_two_and_four_bins_random(backend):
    rng = random.Random(7)
    for bins, opt in ((2, 12), (4, 9)):
        for _ in range(400):
            items = [rng.randint(1, opt) for _ in range(rng.randint(0, 3 * bins))]
            assert test_feasible(items, bins, opt, backend) == brute_force_feasible(items, bins, opt)


def test_accepts_multiset_input():
    ms = ItemMultiset.from_items([5, 5, 5, 5, 5, 5], 10)
    assert test_feasible(ms, 3, 10)
    assert not test_feasible(ms.add(1).add(10), 3, 10)


def test_bfd_slack_is_a_feasible_item():
    rng = random.Random(11)
    for _ in range(500):
        items = [rng.randint(1, 12) for _ in range(rng.randint(0, 6))]
        slack = bfd_max_slack(items, 3, 12)
        if slack:
            assert brute_force_feasible(items + [slack], 3, 12)


def test_bfd_example():
    # BFD: 8+4 | 7 | 6 -> slacks 0, 5, 6
    assert bfd_max_slack([8, 7, 6, 4], 3, 12) == 6
    assert bfd_max_slack([12, 12, 12, 1], 3, 12) == 0


def test_upper_bound():
    p = SearchParams(3, 19, 14)
    assert upper_bound_next_item(config_from([14, 14, 10], [14, 14, 10], p), 3, 14) == 4
    assert upper_bound_next_item(config_from([0, 0, 0], [], p), 3, 14) == 14


def brute_max(items, bins, opt):
    best = 0
    for size in range(1, opt + 1):
        if brute_force_feasible(list(items) + [size], bins, opt):
            best = size
    return best


def test_max_feasible_item_matches_oracle(backend):
    p = SearchParams(3, 13, 9)
    rng = random.Random(5)
    cache = EvictingCache(8, 2)
    stats = FeasibilityStats()
    for _ in range(600):
        items = []
        for _ in range(rng.randint(0, 7)):
            items.append(rng.randint(1, 9))
            if not brute_force_feasible(items, 3, 9):
                items.pop()
                break
        loads = [sum(items), 0, 0]
        config = config_from(loads, items, SearchParams(3, max(13, sum(items) + 1), 9))
        want = brute_max(items, 3, 9)
        assert max_feasible_item(config, 3, 9, backend=backend) == want
        assert max_feasible_item(config, 3, 9, cache, p.zobrist, stats, backend) == want
        assert max_sendable(config.items.freq, 3, 9, backend) == want
    assert stats.test_calls > 0
    assert sum(stats.gap_histogram.values()) > 0


def test_sendable_sizes_are_downward_closed():
    rng = random.Random(2)
    for _ in range(200):
        items = [rng.randint(1, 8) for _ in range(rng.randint(0, 5))]
        if not brute_force_feasible(items, 3, 8):
            continue
        top = brute_max(items, 3, 8)
        for size in range(1, top + 1):
            assert brute_force_feasible(items + [size], 3, 8)
