"""Acceptance criteria, one test (or parametrized group) per criterion.

Every test records its outcome with ``record``; the terminal summary then
prints one PASS/FAIL line per criterion. Rows tagged ``overnight`` only
run with ``--overnight``.
"""
import os
import random
import time
from itertools import combinations_with_replacement

import pytest

from binstretch import _backend
from binstretch.cli import TABLE
from binstretch.core import (
    GameOutcome,
    SearchParams,
    distinct_placements,
    new_root_config,
    place_item,
)
from binstretch.evasive import exhaustive_check, random_check
from binstretch.feasibility import brute_force_feasible, test_feasible
from binstretch.hashing import EvictingCache, hash_config, placement_changes, update_hash
from binstretch.search import _make_solver, outcome_table, search_main
from binstretch.treeio import MUTATIONS, compact, emit_dot, mutate, verify_tree

from conftest import BACKENDS, record
from tree_oracle import strategy_is_valid

ADV = GameOutcome.ADVERSARY_WINS
ALG = GameOutcome.ALGORITHM_WINS
CACHE_BITS = int(os.environ.get("BINSTRETCH_ACCEPTANCE_CACHE_BITS", "22"))
WORD = {ADV: "adversary", ALG: "algorithm"}


def run_row(number, bins, S, T, expected, budget, **kw):
    params = SearchParams(bins, S, T, cache_bits=CACHE_BITS, **kw)
    result = search_main(params)
    ok = result.outcome is expected and result.seconds <= budget
    record(number, ok, f"m={bins} {S}/{T} {WORD[result.outcome]} in {result.seconds:.1f}s "
                       f"(budget {budget:g}s)")
    assert result.outcome is expected
    assert result.seconds <= budget
    return result


def rows(tag, bins=3):
    return [pytest.param(r.stretched, r.opt, r.expected, id=f"{r.stretched}-{r.opt}",
                         marks=[getattr(pytest.mark, r.tag)] if r.tag != "fast" else [])
            for r in TABLE if r.tag == tag and r.bins == bins]


# 1 -------------------------------------------------------------------------

@pytest.mark.parametrize("S,T,expected", rows("fast"))
def test_criterion_1_fast_rows(S, T, expected):
    run_row(1, 3, S, T, expected, 60)


# 2 -------------------------------------------------------------------------

SLOW_BUDGET = {(34, 25): 600, (37, 27): 600, (45, 33): 3600}


@pytest.mark.parametrize("S,T,expected", rows("slow") + rows("overnight"))
def test_criterion_2_slow_rows(S, T, expected):
    run_row(2, 3, S, T, expected, SLOW_BUDGET.get((S, T), float("inf")))


# 3 -------------------------------------------------------------------------

@pytest.mark.parametrize("bins,budget", [
    pytest.param(4, 1800, id="m4", marks=pytest.mark.slow),
    pytest.param(5, float("inf"), id="m5", marks=pytest.mark.overnight),
])
def test_criterion_3_more_bins(bins, budget):
    result = run_row(3, bins, 19, 14, ADV, budget, gs_pruning=False)
    assert not result.stats.gs_prunes


# 4 -------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_4_evasive_exhaustive():
    start = time.perf_counter()
    report = exhaustive_check(1, assert_analysis=True)
    seconds = time.perf_counter() - start
    ok = report.safe and report.max_load <= 22 and seconds <= 900
    record(4, ok, f"k=1 exhaustive: {report.states} states, {report.sequences} lines, "
                  f"max load {report.max_load}, {len(report.overpacks)} overpacks, "
                  f"{seconds:.0f}s")
    assert report.safe and report.max_load <= 22
    assert not report.analysis_violations
    assert seconds <= 900


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 3, 4])
def test_criterion_4_evasive_random(k):
    report = random_check(k, 10 ** 5, seed=k, assert_analysis=True)
    phases = ",".join(f"{p.value}:{n}" for p, n in report.phases.items())
    record(4, report.safe, f"k={k} random: {report.sequences} sequences, "
                           f"{len(report.overpacks)} overpacks, max load {report.max_load} "
                           f"[{phases}]")
    assert report.sequences == 10 ** 5
    assert report.safe, report.overpacks[:3]
    assert report.max_load <= 22 * k
    assert not report.analysis_violations, report.analysis_violations[:3]


# 5 -------------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_criterion_5_oracle_equivalence(backend):
    disagreements = []
    checked = 0
    for T in range(1, 9):
        limit = 3 * T
        for n in range(limit + 1):
            for combo in combinations_with_replacement(range(1, T + 1), n):
                if sum(combo) > limit:
                    continue
                checked += 1
                if test_feasible(combo, 3, T, backend) != brute_force_feasible(combo, 3, T):
                    disagreements.append((T, combo))
    rng = random.Random(2016)
    for _ in range(10 ** 4):
        items = [rng.randint(1, 16) for _ in range(rng.randint(0, 10))]
        checked += 1
        if test_feasible(items, 3, 16, backend) != brute_force_feasible(items, 3, 16):
            disagreements.append((16, items))
    record(5, not disagreements, f"{backend}: {checked} multisets, "
                                 f"{len(disagreements)} disagreements")
    assert not disagreements, disagreements[:5]


# 6 and 9 -------------------------------------------------------------------

def test_criterion_6_transparency():
    start = time.perf_counter()
    disagreements = []
    combos = 0
    for T in range(1, 11):
        S_range = range(T + 1, 2 * T + 1)
        results = []
        for gs in (True, False):
            for caching in (True, False):
                results.append(outcome_table(3, T, S_range, gs_pruning=gs, caching=caching,
                                             cache_bits=16))
                combos += len(S_range)
        for S in S_range:
            if len({r[S] for r in results}) != 1:
                disagreements.append((S, T))
    seconds = time.perf_counter() - start
    record(6, not disagreements and seconds <= 600,
           f"{combos} searches, {len(disagreements)} disagreements, {seconds:.1f}s")
    assert not disagreements
    assert seconds <= 600


def test_criterion_9_monotone():
    violations = []
    won_rows = 0
    for T in range(1, 11):
        row = outcome_table(3, T, range(T + 1, 2 * T + 1), cache_bits=16)
        for S, outcome in row.items():
            if outcome is ADV:
                won_rows += 1
                for lower in range(T + 1, S):
                    if row[lower] is not ADV:
                        violations.append((S, T, lower))
    record(9, not violations, f"{won_rows} adversary wins for T<=10, "
                              f"{len(violations)} monotonicity violations")
    assert not violations


# 7 -------------------------------------------------------------------------

TREES = [
    pytest.param(3, 19, 14, id="3-19-14"),
    pytest.param(3, 34, 25, id="3-34-25", marks=pytest.mark.slow),
    pytest.param(3, 45, 33, id="3-45-33", marks=pytest.mark.slow),
    pytest.param(4, 19, 14, id="4-19-14", marks=pytest.mark.slow),
]


@pytest.mark.parametrize("bins,S,T", TREES)
def test_criterion_7_proof_pipeline(bins, S, T):
    params = SearchParams(bins, S, T, cache_bits=CACHE_BITS, record_tree=True)
    tree = search_main(params).tree
    report = verify_tree(tree, bins, S, T)
    assert report.accepted, report.violations[:3]
    if (bins, S, T) == (3, 45, 33):
        assert emit_dot(tree, compact_form=True).decode().count('"0 0 0, n: ') == 1
    rng = random.Random(S * 100 + T)
    memo: dict = {}
    rejected = harmless = missed = 0
    for n in range(1000):
        _, _, mutated = mutate(tree, rng, MUTATIONS[n % len(MUTATIONS)])
        accepted = verify_tree(mutated, bins, S, T, feasibility_memo=memo).accepted
        if not accepted:
            rejected += 1
        elif strategy_is_valid(mutated):
            harmless += 1
        else:
            missed += 1
    ok = missed == 0
    record(7, ok, f"m={bins} {S}/{T}: {tree.node_count()} nodes accepted; 1000 mutations: "
                  f"{rejected} rejected, {harmless} still valid, {missed} missed")
    assert missed == 0


# 8 -------------------------------------------------------------------------

def test_criterion_8_incremental_hashing():
    params = SearchParams(3, 19, 14, cache_bits=10)
    table = params.zobrist
    rng = random.Random(8)
    solver = _make_solver(params) if _backend._kernel is not None else None
    walks = steps = mismatches = 0
    while walks < 10 ** 5:
        walks += 1
        config = new_root_config(params)
        for _ in range(rng.randint(1, 6)):
            size = rng.randint(1, 14)
            moves = distinct_placements(config, size, 19)
            if not moves:
                break
            pos, _ = rng.choice(moves)
            after = place_item(config, pos, size, table)
            changes = placement_changes(config.loads, after.loads, size,
                                        config.items.freq[size])
            steps += 1
            if not (after.hash == hash_config(table, after)
                    == update_hash(table, config.hash, changes)):
                mismatches += 1
            config = after
        if solver is not None and walks % 10 == 0:
            solver.set_state(config.loads, config.items.freq)
            mismatches += solver.fingerprint != config.hash
    record(8, mismatches == 0, f"{walks} walks, {steps} placements, {mismatches} mismatches")
    assert mismatches == 0


def eviction_scenario(cache) -> bool:
    keys = [(n << 12) | (3 << 1) for n in range(1, 6)]
    for key in keys[:4]:
        cache.store(key, True)
    for key, reads in zip(keys[:4], (2, 4, 1, 3)):
        for _ in range(reads):
            cache.lookup(key)
    cache.store(keys[4], False)
    survivors = [cache.lookup(k) is not None for k in keys]
    return survivors == [True, True, False, True, True] and cache.evictions == 1


def test_criterion_8_eviction():
    caches = {"python": EvictingCache(6, 4)}
    if _backend._kernel is not None:
        caches["compiled"] = _backend._kernel.KernelCache(6, 4)
    results = {name: eviction_scenario(c) for name, c in caches.items()}
    ok = all(results.values())
    record(8, ok, "least-accessed eviction: " + ", ".join(
        f"{n} {'ok' if r else 'wrong'}" for n, r in results.items()))
    assert ok
