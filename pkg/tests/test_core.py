import pytest

from binstretch.core import (
    BinConfig,
    GameOutcome,
    ItemMultiset,
    SearchParams,
    config_from,
    distinct_placements,
    new_root_config,
    place_item,
    sorted_insert,
)
from binstretch.hashing import hash_config


def test_params_validation():
    with pytest.raises(ValueError):
        SearchParams(3, 14, 14)
    with pytest.raises(ValueError):
        SearchParams(1, 19, 14)
    with pytest.raises(ValueError):
        SearchParams(3, 19, 0)
    with pytest.raises(ValueError):
        SearchParams(3, 19, 14, chain_length=0)


def test_pruning_forced_off_beyond_three_bins():
    assert SearchParams(3, 19, 14).gs_pruning
    assert not SearchParams(4, 19, 14, gs_pruning=True).gs_pruning


def test_test_cache_defaults_below_config_cache():
    assert SearchParams(3, 19, 14, cache_bits=20).test_cache_bits == 18
    assert SearchParams(3, 19, 14, cache_bits=20, test_cache_bits=5).test_cache_bits == 5


def test_multiset_totals():
    ms = ItemMultiset.from_items([3, 3, 5, 1], 8)
    assert ms.total_size == 12
    assert ms.count == len(ms) == 4
    assert list(ms.sizes()) == [5, 3, 3, 1]
    assert 3 in ms and 2 not in ms
    grown = ms.add(2)
    assert grown.total_size == 14 and 2 in grown
    assert ms.freq[2] == 0
    with pytest.raises(ValueError):
        ItemMultiset.from_items([9], 8)


def test_root_config():
    p = SearchParams(3, 19, 14)
    root = new_root_config(p)
    assert root.loads == (0, 0, 0)
    assert root.total == 0
    assert root.hash == hash_config(p.zobrist, root)


def test_place_item_keeps_loads_sorted():
    p = SearchParams(3, 19, 14)
    c = config_from([5, 3, 0], [5, 3], p)
    after = place_item(c, 2, 7, p.zobrist)
    assert after.loads == (7, 5, 3)
    assert after.items.freq[7] == 1
    assert sum(after.loads) == after.total
    assert after.hash == hash_config(p.zobrist, after)


def test_config_from_rejects_mismatch():
    p = SearchParams(3, 19, 14)
    with pytest.raises(ValueError):
        config_from([5, 3, 1], [5, 3], p)
    with pytest.raises(ValueError):
        config_from([5, 3], [5, 3], p)


def test_sorted_insert():
    assert sorted_insert((9, 4, 4, 0), 3, 6) == (9, 6, 4, 4)


def test_distinct_placements_dedupes_equal_loads():
    # equal loads give one placement; a load reaching S is illegal
    assert distinct_placements((4, 4, 0), 3, 19) == [(0, (7, 4, 0)), (2, (4, 4, 3))]
    assert distinct_placements((16, 4, 4), 3, 19) == [(1, (16, 7, 4))]
    assert distinct_placements((17, 17, 17), 2, 19) == []


def test_outcome_lower_bound_flag():
    assert GameOutcome.ADVERSARY_WINS.lower_bound
    assert not GameOutcome.ALGORITHM_WINS.lower_bound


def test_str_form():
    p = SearchParams(3, 19, 14)
    assert str(config_from([5, 3, 0], [3, 5], p)) == "(5,3,0,{5,3})"
    assert isinstance(new_root_config(p), BinConfig)
