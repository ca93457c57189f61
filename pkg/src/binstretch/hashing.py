"""Zobrist fingerprints for bin configurations and the bounded evicting cache.

Random values come from a splitmix64 stream so that fingerprints are
reproducible across platforms and across the Python and compiled backends::

    state = seed
    repeat:
        state = (state + 0x9E3779B97F4A7C15) mod 2**64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
        emit z ^ (z >> 31)

The stream is consumed item pairs first (size 1..T, and for each size
frequency 0..m*T), then load slots (position 0..m-1, and for each
position load 0..S).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 0x5EED_B1A5_2016_0003


def splitmix64(seed: int):
    """Yield the splitmix64 stream for ``seed`` (see module docstring)."""
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


@dataclass(frozen=True)
class ZobristTable:
    """Random 64-bit values for (item size, frequency) pairs and (position, load) slots."""

    bins: int
    stretched: int
    opt: int
    seed: int
    # item_values[i][f] for i in 0..T (row 0 unused), f in 0..m*T
    item_values: tuple = field(repr=False)
    # load_values[pos][load] for pos in 0..m-1, load in 0..S
    load_values: tuple = field(repr=False)

    @property
    def max_frequency(self) -> int:
        return self.bins * self.opt

    def empty_items_hash(self) -> int:
        h = 0
        for i in range(1, self.opt + 1):
            h ^= self.item_values[i][0]
        return h


@lru_cache(maxsize=64)
def make_table(bins: int, stretched: int, opt: int, seed: int = DEFAULT_SEED) -> ZobristTable:
    """Build (or fetch the memoized) table for an (m, S, T, seed) instance."""
    stream = splitmix64(seed)
    fmax = bins * opt
    items = [(0,) * (fmax + 1)]
    for _ in range(opt):
        items.append(tuple(next(stream) for _ in range(fmax + 1)))
    loads = tuple(tuple(next(stream) for _ in range(stretched + 1)) for _ in range(bins))
    return ZobristTable(bins, stretched, opt, seed, tuple(items), loads)


def hash_items(table: ZobristTable, freq: Sequence[int]) -> int:
    """Multiset-only fingerprint: XOR of the (i, freq[i]) values for i in 1..T."""
    h = 0
    iv = table.item_values
    for i in range(1, table.opt + 1):
        h ^= iv[i][freq[i]]
    return h


def hash_loads(table: ZobristTable, loads: Iterable[int]) -> int:
    h = 0
    lv = table.load_values
    for pos, load in enumerate(sorted(loads, reverse=True)):
        h ^= lv[pos][load]
    return h


def hash_config(table: ZobristTable, config) -> int:
    """Fingerprint of a configuration computed from scratch.

    Loads are hashed in non-increasing order, so permuting equal (or any)
    loads never changes the value.
    """
    return hash_items(table, config.items.freq) ^ hash_loads(table, config.loads)


def update_hash(table: ZobristTable, old_hash: int, changes) -> int:
    """Apply ``(slot, old_index, new_index)`` changes to ``old_hash`` in O(len(changes)).

    ``slot`` is ``("item", size)`` for a frequency change or ``("load", pos)``
    for a load change at a sorted position.
    """
    h = old_hash
    for (kind, key), old, new in changes:
        row = table.item_values[key] if kind == "item" else table.load_values[key]
        h ^= row[old] ^ row[new]
    return h


def placement_changes(old_loads: Sequence[int], new_loads: Sequence[int], size: int,
                      old_freq: int) -> list:
    """Slot changes produced by placing one item of ``size`` (both load vectors sorted)."""
    changes = [(("item", size), old_freq, old_freq + 1)]
    for pos, (a, b) in enumerate(zip(old_loads, new_loads)):
        if a != b:
            changes.append((("load", pos), a, b))
    return changes


class CacheEntry:
    __slots__ = ("key", "payload", "accesses", "signature")

    def __init__(self, key: int, payload, signature=None):
        self.key = key
        self.payload = payload
        self.accesses = 1
        self.signature = signature


class EvictingCache:
    """Fixed-size chained hash table; a full chain evicts its least-accessed entry.

    ``2**bits`` buckets, each holding at most ``chain_length`` entries. The
    bucket is chosen by trimming the 64-bit key to its low ``bits`` bits. In
    paranoid mode every entry also keeps a full canonical signature and a hit
    on the fingerprint alone is reported as a miss if the signatures differ.
    """

    def __init__(self, bits: int, chain_length: int = 4, paranoid: bool = False):
        if bits < 1 or bits > 40:
            raise ValueError(f"cache bits must be in 1..40, got {bits}")
        if chain_length < 1:
            raise ValueError("chain length must be positive")
        self.bits = bits
        self.chain_length = chain_length
        self.paranoid = paranoid
        self._mask = (1 << bits) - 1
        self._buckets: dict[int, list[CacheEntry]] = {}
        self.hits = 0
        self.misses = 0
        self.evictions = 0
        self.collisions = 0

    @property
    def capacity(self) -> int:
        return (1 << self.bits) * self.chain_length

    def __len__(self) -> int:
        return sum(len(chain) for chain in self._buckets.values())

    def bucket_of(self, key: int) -> int:
        return key & self._mask

    def lookup(self, key: int, signature=None):
        chain = self._buckets.get(key & self._mask)
        if chain:
            for entry in chain:
                if entry.key == key:
                    if self.paranoid and entry.signature != signature:
                        self.collisions += 1
                        continue
                    entry.accesses += 1
                    self.hits += 1
                    return entry.payload
        self.misses += 1
        return None

    def store(self, key: int, payload, signature=None) -> None:
        chain = self._buckets.setdefault(key & self._mask, [])
        for entry in chain:
            if entry.key == key and (not self.paranoid or entry.signature == signature):
                entry.payload = payload
                return
        entry = CacheEntry(key, payload, signature if self.paranoid else None)
        if len(chain) < self.chain_length:
            chain.append(entry)
            return
        # replace in place: the first slot with the fewest accesses
        victim = min(range(len(chain)), key=lambda s: chain[s].accesses)
        chain[victim] = entry
        self.evictions += 1
