"""Brute-force oracle: play a good-situation strategy against every adversary line."""
from binstretch.goodsits import GsPlayer, gs_detect


def brute_max_item(freq, opt):
    """Largest sendable size by exhaustive bin assignment (independent of the DP)."""
    items = [s for s in range(len(freq) - 1, 0, -1) for _ in range(freq[s])]
    best = 0
    for size in range(opt, 0, -1):
        if _packs(sorted(items + [size], reverse=True), [0, 0, 0], opt, 0):
            best = size
            break
    return best


def _packs(items, loads, opt, idx):
    if idx == len(items):
        return True
    tried = set()
    for b in range(3):
        if loads[b] in tried or loads[b] + items[idx] > opt:
            continue
        tried.add(loads[b])
        loads[b] += items[idx]
        ok = _packs(items, loads, opt, idx + 1)
        loads[b] -= items[idx]
        if ok:
            return True
    return False


def strategy_soundness(scale, sendable):
    """Enter every reachable detected situation and play it out against all feasible lines.

    ``sendable(freq)`` returns the largest item the adversary may send.
    Positions before a situation is detected are expanded over every
    placement within capacity. Returns per-situation entry counts; a
    :class:`StrategyError` propagates on the first overpack.
    """
    T, cap = scale.opt, scale.capacity
    seen = set()
    counts: dict = {}
    freq = [0] * (T + 1)
    memo: dict = {}

    def top():
        key = tuple(freq)
        if key not in memo:
            memo[key] = sendable(freq)
        return memo[key]

    def play(player, loads):
        key = (tuple(loads), tuple(freq), player.state_key())
        if key in seen:
            return
        seen.add(key)
        for item in range(1, top() + 1):
            p = player.copy()
            index = p.place(loads, item)
            after = list(loads)
            after[index] += item
            freq[item] += 1
            play(p, after)
            freq[item] -= 1

    def walk(loads):
        key = (tuple(loads), tuple(freq))
        if key in seen:
            return
        seen.add(key)
        match = gs_detect(loads, scale, items=freq)
        if match is not None:
            counts[match.gs] = counts.get(match.gs, 0) + 1
            play(GsPlayer(match, scale, loads), list(loads))
            return
        for item in range(1, top() + 1):
            freq[item] += 1
            for i in range(3):
                if loads[i] + item <= cap and (i == 0 or loads[i] != loads[i - 1]):
                    after = sorted(loads[:i] + [loads[i] + item] + loads[i + 1:], reverse=True)
                    walk(after)
            freq[item] -= 1

    walk([0, 0, 0])
    return counts
