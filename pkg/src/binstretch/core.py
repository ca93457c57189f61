"""Game instances, item multisets and sorted bin configurations.

All sizes and loads are integers in units of 1/T of an offline bin.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .hashing import DEFAULT_SEED, ZobristTable, hash_items, hash_loads, make_table

MAX_BINS = 8


class GameOutcome(enum.Enum):
    ADVERSARY_WINS = 0
    ALGORITHM_WINS = 1

    @property
    def lower_bound(self) -> bool:
        return self is GameOutcome.ADVERSARY_WINS


@dataclass(frozen=True)
class SearchParams:
    """One game instance Γ(S, T) on ``bins`` bins, plus solver knobs.

    ``gs_pruning`` is forced off for more than three bins. ``test_cache_bits``
    defaults to ``cache_bits - 2``; set ``caching=False`` to disable both caches.
    """

    bins: int
    stretched: int
    opt: int
    gs_pruning: bool = True
    cache_bits: int = 25
    chain_length: int = 4
    hash_seed: int = DEFAULT_SEED
    record_tree: bool = False
    caching: bool = True
    paranoid: bool = False
    test_cache_bits: int | None = None

    def __post_init__(self):
        if not 2 <= self.bins <= MAX_BINS:
            raise ValueError(f"bins must be in 2..{MAX_BINS}, got {self.bins}")
        if self.opt < 1:
            raise ValueError(f"offline capacity T must be >= 1, got {self.opt}")
        if self.stretched <= self.opt:
            raise ValueError(
                f"stretched capacity S={self.stretched} must exceed T={self.opt}")
        if not 1 <= self.cache_bits <= 34:
            raise ValueError(f"cache bits must be in 1..34, got {self.cache_bits}")
        if self.chain_length < 1:
            raise ValueError("chain length must be positive")
        if self.bins > 3 and self.gs_pruning:
            object.__setattr__(self, "gs_pruning", False)
        if self.test_cache_bits is None:
            object.__setattr__(self, "test_cache_bits", max(1, self.cache_bits - 2))

    @property
    def zobrist(self) -> ZobristTable:
        return make_table(self.bins, self.stretched, self.opt, self.hash_seed)


@dataclass(frozen=True)
class ItemMultiset:
    """Frequency table over item sizes 1..T; ``freq[0]`` is always 0."""

    freq: tuple[int, ...]
    total_size: int = field(default=-1, compare=False)

    def __post_init__(self):
        if self.freq and self.freq[0] != 0:
            raise ValueError("item size 0 is not a move")
        if self.total_size < 0:
            object.__setattr__(self, "total_size", sum(i * f for i, f in enumerate(self.freq)))

    @classmethod
    def empty(cls, opt: int) -> "ItemMultiset":
        return cls((0,) * (opt + 1), 0)

    @classmethod
    def from_items(cls, items: Iterable[int], opt: int) -> "ItemMultiset":
        freq = [0] * (opt + 1)
        for size in items:
            if not 1 <= size <= opt:
                raise ValueError(f"item size {size} outside 1..{opt}")
            freq[size] += 1
        return cls(tuple(freq))

    @property
    def opt(self) -> int:
        return len(self.freq) - 1

    @property
    def count(self) -> int:
        return sum(self.freq)

    def add(self, size: int) -> "ItemMultiset":
        freq = list(self.freq)
        freq[size] += 1
        return ItemMultiset(tuple(freq), self.total_size + size)

    def sizes(self) -> Iterator[int]:
        """Item sizes, largest first."""
        for size in range(len(self.freq) - 1, 0, -1):
            for _ in range(self.freq[size]):
                yield size

    def __contains__(self, size: int) -> bool:
        return 0 < size < len(self.freq) and self.freq[size] > 0

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True)
class BinConfig:
    """Adversary-to-move state: sorted loads, the items sent so far, and a fingerprint."""

    loads: tuple[int, ...]
    items: ItemMultiset
    hash: int = field(compare=False)

    @property
    def total(self) -> int:
        return self.items.total_size

    def __str__(self) -> str:
        inner = ",".join(str(s) for s in self.items.sizes())
        return f"({','.join(map(str, self.loads))},{{{inner}}})"


def new_root_config(params: SearchParams) -> BinConfig:
    table = params.zobrist
    loads = (0,) * params.bins
    items = ItemMultiset.empty(params.opt)
    return BinConfig(loads, items, table.empty_items_hash() ^ hash_loads(table, loads))


def config_from(loads: Iterable[int], items: Iterable[int], params: SearchParams) -> BinConfig:
    """Build a configuration directly (hash computed from scratch)."""
    table = params.zobrist
    loads = tuple(sorted(loads, reverse=True))
    if len(loads) != params.bins:
        raise ValueError(f"expected {params.bins} loads, got {len(loads)}")
    multiset = ItemMultiset.from_items(items, params.opt)
    if sum(loads) != multiset.total_size:
        raise ValueError("loads do not sum to the multiset total")
    return BinConfig(loads, multiset, hash_items(table, multiset.freq) ^ hash_loads(table, loads))


def sorted_insert(loads: tuple[int, ...], index: int, size: int) -> tuple[int, ...]:
    new = list(loads)
    new[index] += size
    new.sort(reverse=True)
    return tuple(new)


def place_item(config: BinConfig, bin_index: int, size: int, table: ZobristTable) -> BinConfig:
    """Pack ``size`` on the bin at sorted position ``bin_index``; legality is the caller's concern."""
    old_loads = config.loads
    new_loads = sorted_insert(old_loads, bin_index, size)
    f = config.items.freq[size]
    iv = table.item_values[size]
    h = config.hash ^ iv[f] ^ iv[f + 1]
    lv = table.load_values
    for pos, (a, b) in enumerate(zip(old_loads, new_loads)):
        if a != b:
            h ^= lv[pos][a] ^ lv[pos][b]
    return BinConfig(new_loads, config.items.add(size), h)


def distinct_placements(config, size: int, stretched: int) -> list[tuple[int, tuple[int, ...]]]:
    """One (position, resulting loads) per distinct outcome that stays below ``stretched``.

    ``config`` may be a :class:`BinConfig` or a sorted load tuple. An empty
    list means the item fits nowhere.
    """
    loads = config.loads if isinstance(config, BinConfig) else tuple(config)
    out = []
    seen = set()
    for pos, load in enumerate(loads):
        if load + size >= stretched:
            continue
        result = sorted_insert(loads, pos, size)
        if result not in seen:
            seen.add(result)
            out.append((pos, result))
    return out
