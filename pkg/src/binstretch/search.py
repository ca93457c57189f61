"""Minimax over the bin stretching game.

The adversary node is an OR over item sizes (largest first), the algorithm
node an AND over distinct placements. No alpha-beta: each node's value is
either a win or a loss, so the first winning move simply ends the loop.

Besides the caches and the optional good-situation pruning, both backends
use a finishing rule that is valid for any m, S and T: once the total
size still to come (at most ``m*T`` minus the current total) fits on the
least loaded bin below ``S``, the algorithm wins by packing everything
there.
"""
from __future__ import annotations

import sys
import time
from collections import Counter
from dataclasses import dataclass, field

from . import _backend
from .core import BinConfig, GameOutcome, SearchParams, new_root_config, place_item
from .feasibility import FeasibilityStats, max_feasible_item
from .goodsits import GsScale, gs_detect
from .hashing import EvictingCache
from .treeio import AdvNode, AlgEdge, GameTree, tree_from_nested


@dataclass
class SearchStats:
    nodes: int = 0
    alg_nodes: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    cache_evictions: int = 0
    test_calls: int = 0
    test_cache_hits: int = 0
    gs_prunes: int = 0
    finishes: int = 0
    max_depth: int = 0
    ub_lb_gap: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = []
        for key, value in self.__dict__.items():
            if isinstance(value, dict):
                value = ",".join(f"{g}:{n}" for g, n in sorted(value.items()))
            out.append(f"{key}={value}")
        return out


@dataclass
class SearchResult:
    outcome: GameOutcome
    tree: GameTree | None
    stats: SearchStats
    backend: str
    seconds: float


class SearchContext:
    """Pure-Python solver state for one game instance."""

    def __init__(self, params: SearchParams):
        self.params = params
        self.zobrist = params.zobrist
        self.config_cache = None
        self.test_cache = None
        if params.caching:
            self.config_cache = EvictingCache(params.cache_bits, params.chain_length,
                                              params.paranoid)
            self.test_cache = EvictingCache(params.test_cache_bits, params.chain_length)
        self.feas_stats = FeasibilityStats()
        self.gs_scale = None
        if params.gs_pruning and params.bins == 3 and GsScale.applicable(params.stretched,
                                                                        params.opt):
            self.gs_scale = GsScale.for_game(params.stretched, params.opt)
        self.stats = SearchStats()
        self.winning: dict = {}
        need = 4 * params.bins * params.opt + 200
        if sys.getrecursionlimit() < need:
            sys.setrecursionlimit(need)

    def _signature(self, config: BinConfig):
        if self.params.paranoid:
            return (config.loads, config.items.freq)
        return None

    def _algorithm_finishes(self, config: BinConfig) -> bool:
        p = self.params
        if self.gs_scale is not None and gs_detect(config.loads, self.gs_scale,
                                                   items=config.items.freq):
            self.stats.gs_prunes += 1
            return True
        if config.total - config.loads[-1] >= p.bins * p.opt - (p.stretched - 1):
            self.stats.finishes += 1
            return True
        return False

    def _max_item(self, config: BinConfig) -> int:
        p = self.params
        return max_feasible_item(config, p.bins, p.opt, self.test_cache, self.zobrist,
                                 self.feas_stats, backend="python")

    def eval_adv(self, config: BinConfig, depth: int = 0) -> GameOutcome:
        self.stats.nodes += 1
        if depth > self.stats.max_depth:
            self.stats.max_depth = depth
        if self._algorithm_finishes(config):
            return GameOutcome.ALGORITHM_WINS
        cache = self.config_cache
        if cache is not None:
            hit = cache.lookup(config.hash, self._signature(config))
            if hit is not None:
                return GameOutcome(hit)
        result = GameOutcome.ALGORITHM_WINS
        for item in range(self._max_item(config), 0, -1):
            if self.eval_alg(config, item, depth) is GameOutcome.ADVERSARY_WINS:
                result = GameOutcome.ADVERSARY_WINS
                break
        if cache is not None:
            cache.store(config.hash, result.value, self._signature(config))
        return result

    def eval_alg(self, config: BinConfig, item: int, depth: int = 0) -> GameOutcome:
        self.stats.alg_nodes += 1
        S = self.params.stretched
        loads = config.loads
        for pos in range(len(loads)):
            if pos > 0 and loads[pos] == loads[pos - 1]:
                continue
            if loads[pos] + item >= S:
                continue
            child = place_item(config, pos, item, self.zobrist)
            if self.eval_adv(child, depth + 1) is GameOutcome.ALGORITHM_WINS:
                return GameOutcome.ALGORITHM_WINS
        return GameOutcome.ADVERSARY_WINS

    def build_tree(self, config: BinConfig) -> AdvNode:
        """Expand the adversary's winning strategy below an adversary-won ``config``."""
        key = (config.loads, config.items.freq)
        chosen = self.winning.get(key)
        if chosen is None:
            for item in range(self._max_item(config), 0, -1):
                if self.eval_alg(config, item) is GameOutcome.ADVERSARY_WINS:
                    chosen = item
                    break
            else:
                raise RuntimeError(f"no winning item at {config}")
            self.winning[key] = chosen
        responses = []
        loads = config.loads
        for pos in range(len(loads)):
            if pos > 0 and loads[pos] == loads[pos - 1]:
                continue
            if loads[pos] + chosen >= self.params.stretched:
                continue
            child = place_item(config, pos, chosen, self.zobrist)
            responses.append(AlgEdge(child.loads, self.build_tree(child)))
        return AdvNode(loads, chosen, tuple(responses))

    def collect_stats(self) -> SearchStats:
        s = self.stats
        if self.config_cache is not None:
            s.cache_hits = self.config_cache.hits
            s.cache_misses = self.config_cache.misses
            s.cache_evictions = self.config_cache.evictions
        s.test_calls = self.feas_stats.test_calls
        s.test_cache_hits = self.feas_stats.cache_hits
        s.ub_lb_gap = dict(sorted(self.feas_stats.gap_histogram.items()))
        return s


def _make_solver(params: SearchParams):
    table = params.zobrist
    return _backend._kernel.Solver(
        params.bins, params.stretched, params.opt, table.item_values, table.load_values,
        gs_pruning=params.gs_pruning, caching=params.caching, cache_bits=params.cache_bits,
        chain_length=params.chain_length, test_cache_bits=params.test_cache_bits,
        paranoid=params.paranoid)


def _stats_from_kernel(raw: dict) -> SearchStats:
    return SearchStats(
        nodes=raw["nodes"], alg_nodes=raw["alg_nodes"],
        cache_hits=raw.get("cache_hits", 0), cache_misses=raw.get("cache_misses", 0),
        cache_evictions=raw.get("cache_evictions", 0), test_calls=raw["test_calls"],
        test_cache_hits=raw["test_cache_hits"], gs_prunes=raw["gs_prunes"],
        finishes=raw["finishes"], max_depth=raw["max_depth"],
        ub_lb_gap=dict(sorted(raw["ub_lb_gap"].items())))


def search_main(params: SearchParams, backend: str = "auto") -> SearchResult:
    """Solve the game from the empty configuration.

    With ``params.record_tree`` and an adversary win, a second pass expands
    the winning strategy into a :class:`GameTree`.
    """
    start = time.perf_counter()
    tree = None
    if _backend.use_compiled(backend):
        solver = _make_solver(params)
        outcome = GameOutcome(solver.solve())
        if params.record_tree and outcome is GameOutcome.ADVERSARY_WINS:
            tree = tree_from_nested(solver.build_tree(), params)
        stats = _stats_from_kernel(solver.stats())
        used = "compiled"
    else:
        ctx = SearchContext(params)
        root = new_root_config(params)
        outcome = ctx.eval_adv(root)
        if params.record_tree and outcome is GameOutcome.ADVERSARY_WINS:
            tree = GameTree(params.bins, params.stretched, params.opt, ctx.build_tree(root))
        stats = ctx.collect_stats()
        used = "python"
    return SearchResult(outcome, tree, stats, used, time.perf_counter() - start)


def outcome_table(bins: int, opt: int, stretched_values, **kwargs) -> dict[int, GameOutcome]:
    """Outcomes for several S at fixed (m, T); keyword arguments go to :class:`SearchParams`."""
    backend = kwargs.pop("backend", "auto")
    out = {}
    for S in stretched_values:
        out[S] = search_main(SearchParams(bins, S, opt, **kwargs), backend).outcome
    return out
