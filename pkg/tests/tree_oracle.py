"""Solver-side validity check for adversary trees, used to grade verifier verdicts.

It shares no code with the verifier: placements come from the core module
and packability from the dynamic program.
"""
from binstretch.core import distinct_placements
from binstretch.feasibility import test_feasible


def strategy_is_valid(tree) -> bool:
    m, S, T = tree.bins, tree.stretched, tree.opt
    if tree.root.loads != (0,) * m:
        return False
    memo = {}

    def ok(node, sent, expected) -> bool:
        if node.loads != expected or not 1 <= node.item <= T:
            return False
        items = tuple(sorted(sent + (node.item,)))
        if items not in memo:
            memo[items] = test_feasible(items, m, T)
        if not memo[items]:
            return False
        wanted = [after for _, after in distinct_placements(node.loads, node.item, S)]
        given = [e.loads for e in node.responses]
        if sorted(given) != sorted(wanted):
            return False
        return all(ok(e.child, sent + (node.item,), e.loads) for e in node.responses)

    return ok(tree.root, (), tree.root.loads)
