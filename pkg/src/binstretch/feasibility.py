"""Offline feasibility: can a multiset be packed into m bins of capacity T?

``test_feasible`` is the sparse queue dynamic program used by the search,
``brute_force_feasible`` an independent recursive oracle. The bounds
``bfd_max_slack`` and ``upper_bound_next_item`` bracket the largest item the
adversary may still send, which ``max_feasible_item`` finds by linear scan.
"""
from __future__ import annotations

from array import array
from collections import Counter
from functools import lru_cache
from typing import Iterable, Sequence

from . import _backend
from .core import BinConfig, ItemMultiset
from .hashing import EvictingCache, ZobristTable, hash_items, make_table

_STAMP_LIMIT = 1 << 27


def _freq_of(items, opt: int) -> Sequence[int]:
    if isinstance(items, ItemMultiset):
        if items.opt < opt:
            return tuple(items.freq) + (0,) * (opt - items.opt)
        return items.freq
    freq = [0] * (opt + 1)
    for size in items:
        if not 1 <= size <= opt:
            # an item larger than T can never be packed
            return None
        freq[size] += 1
    return freq


class FeasibilityContext:
    """Reusable state of the sparse DP for one (m, T).

    The marker array is indexed by the tuple code sum(coord[k] * (T+1)**k)
    and stamped with a per-step generation number, so it is never cleared.
    Not reentrant: use one context per thread.
    """

    def __init__(self, bins: int, opt: int, early_exit: bool = False):
        cells = (opt + 1) ** bins
        if cells > _STAMP_LIMIT:
            raise ValueError(f"(T+1)^m = {cells} marker cells is too large")
        self.bins = bins
        self.opt = opt
        self.early_exit = early_exit
        self.marks = array("I", bytes(4 * cells))
        self.generation = 0
        self.powers = [(opt + 1) ** k for k in range(bins)]
        self.calls = 0

    def _next_generation(self) -> int:
        self.generation += 1
        if self.generation >= 0xFFFFFFFF:
            self.marks = array("I", bytes(4 * len(self.marks)))
            self.generation = 1
        return self.generation

    def test(self, freq: Sequence[int]) -> bool:
        m, T = self.bins, self.opt
        self.calls += 1
        total = sum(i * f for i, f in enumerate(freq))
        if total > m * T:
            return False
        marks, powers = self.marks, self.powers
        queue = [(0,) * m]
        remaining = total
        for size in range(len(freq) - 1, 0, -1):
            for _ in range(freq[size]):
                remaining -= size
                gen = self._next_generation()
                nxt = []
                for tup in queue:
                    prev = -1
                    for k in range(m):
                        load = tup[k]
                        if load == prev:
                            continue
                        prev = load
                        if load + size > T:
                            continue
                        new = list(tup)
                        new[k] += size
                        j = k
                        while j > 0 and new[j] > new[j - 1]:
                            new[j], new[j - 1] = new[j - 1], new[j]
                            j -= 1
                        code = 0
                        for c, p in zip(new, powers):
                            code += c * p
                        if marks[code] != gen:
                            marks[code] = gen
                            if self.early_exit and T - new[m - 1] >= remaining:
                                return True
                            nxt.append(tuple(new))
                if not nxt:
                    return False
                queue = nxt
        return True


@lru_cache(maxsize=16)
def _context(bins: int, opt: int) -> FeasibilityContext:
    return FeasibilityContext(bins, opt)


def test_feasible(items, bins: int, opt: int, backend: str = "auto") -> bool:
    """True iff ``items`` (an ItemMultiset or iterable of sizes) packs into ``bins`` bins of ``opt``."""
    freq = _freq_of(items, opt)
    if freq is None:
        return False
    return _test_freq(freq, bins, opt, backend)


# keep pytest from collecting the name when tests import it
test_feasible.__test__ = False


def _test_freq(freq: Sequence[int], bins: int, opt: int, backend: str = "auto") -> bool:
    if _backend.use_compiled(backend):
        return _backend.feasibility_kernel(bins, opt).test_feasible(freq)
    return _context(bins, opt).test(freq)


def brute_force_feasible(items: Iterable[int], bins: int, opt: int) -> bool:
    """Exact answer by recursive placement, largest item first.

    Bins with equal load are interchangeable, so each item tries each
    distinct load once; identical consecutive items are placed into bins in
    non-increasing bin order. Independent of :func:`test_feasible`.
    """
    sizes = sorted(items, reverse=True)
    if any(s > opt or s < 0 for s in sizes):
        return False
    if sum(sizes) > bins * opt:
        return False
    n = len(sizes)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + sizes[i]
    loads = [0] * bins
    failed = set()

    def place(idx: int, min_bin: int) -> bool:
        if idx == n:
            return True
        slack = bins * opt - sum(loads)
        if suffix[idx] > slack:
            return False
        key = (idx, min_bin, tuple(loads))
        if key in failed:
            return False
        size = sizes[idx]
        tried = set()
        start = min_bin if idx > 0 and sizes[idx - 1] == size else 0
        for b in range(start, bins):
            if loads[b] in tried or loads[b] + size > opt:
                continue
            tried.add(loads[b])
            loads[b] += size
            ok = place(idx + 1, b)
            loads[b] -= size
            if ok:
                return True
        failed.add(key)
        return False

    return place(0, 0)


def bfd_max_slack(items, bins: int, opt: int) -> int:
    """Largest free space after Best-Fit-Decreasing into ``bins`` bins of ``opt``; 0 if BFD fails."""
    freq = _freq_of(items, opt)
    if freq is None:
        return 0
    loads = [0] * bins
    for size in range(len(freq) - 1, 0, -1):
        for _ in range(freq[size]):
            best = -1
            best_slack = opt + 1
            for b in range(bins):
                slack = opt - loads[b] - size
                if 0 <= slack < best_slack:
                    best, best_slack = b, slack
            if best < 0:
                return 0
            loads[best] += size
    return opt - min(loads)


def upper_bound_next_item(config: BinConfig, bins: int, opt: int) -> int:
    return max(0, min(opt, bins * opt - sum(config.loads)))


class FeasibilityStats:
    def __init__(self):
        self.test_calls = 0
        self.cache_hits = 0
        self.gap_histogram: Counter = Counter()

    def as_dict(self) -> dict:
        return {
            "test_calls": self.test_calls,
            "test_cache_hits": self.cache_hits,
            "ub_lb_gap": dict(sorted(self.gap_histogram.items())),
        }


def max_feasible_item(config: BinConfig, bins: int, opt: int,
                      test_cache: EvictingCache | None = None,
                      table: ZobristTable | None = None,
                      stats: FeasibilityStats | None = None,
                      backend: str = "auto") -> int:
    """Largest item size the adversary may send from ``config`` (0 if none).

    Scans down from the arithmetic upper bound and stops at the BFD lower
    bound, which is feasible by construction. Test results are cached by the
    multiset-only fingerprint when ``test_cache`` is given.
    """
    ub = upper_bound_next_item(config, bins, opt)
    if ub == 0:
        return 0
    lb = bfd_max_slack(config.items, bins, opt)
    if stats is not None:
        stats.gap_histogram[ub - min(lb, ub)] += 1
    if lb >= ub:
        return ub
    freq = list(config.items.freq)
    base = None
    if test_cache is not None:
        if table is None:
            table = make_table(bins, opt + 1, opt)
        base = hash_items(table, freq)
    for size in range(ub, lb, -1):
        key = None
        if test_cache is not None:
            iv = table.item_values[size]
            key = base ^ iv[freq[size]] ^ iv[freq[size] + 1]
            hit = test_cache.lookup(key)
            if hit is not None:
                if stats is not None:
                    stats.cache_hits += 1
                if hit:
                    return size
                continue
        freq[size] += 1
        if stats is not None:
            stats.test_calls += 1
        ok = _test_freq(freq, bins, opt, backend)
        freq[size] -= 1
        if test_cache is not None:
            test_cache.store(key, ok)
        if ok:
            return size
    return lb


def max_sendable(freq: Sequence[int], bins: int, opt: int, backend: str = "auto") -> int:
    """Largest size that can join the multiset ``freq`` and still pack (0 if none), uncached.

    ``freq[i]`` counts items of size i. Feasibility is downward closed in
    the item size, so every size from 1 to the returned value is also
    sendable.
    """
    if _backend.use_compiled(backend):
        return _backend.feasibility_kernel(bins, opt).max_feasible_item(freq)
    total = sum(i * f for i, f in enumerate(freq))
    ub = min(opt, bins * opt - total)
    if ub <= 0:
        return 0
    lb = bfd_max_slack(ItemMultiset(tuple(freq)), bins, opt)
    if lb >= ub:
        return ub
    freq = list(freq)
    for size in range(ub, lb, -1):
        freq[size] += 1
        ok = _context(bins, opt).test(freq)
        freq[size] -= 1
        if ok:
            return size
    return lb
