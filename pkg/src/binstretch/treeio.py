"""Adversary strategy trees: JSON interchange, DOT drawings, and an independent verifier.

A tree alternates adversary nodes and algorithm edges. An adversary node
holds the sorted loads and the item it sends; its responses are one edge
per distinct sorted load vector the algorithm can produce by packing that
item below ``S``. A node whose item fits nowhere has no responses and is
a win for the adversary. Item multisets are never stored: along any path
they are the items sent so far.

JSON layout (keys are fixed; anything else is rejected)::

    {"format": "binstretch-tree", "version": 1,
     "bins": m, "stretched": S, "opt": T, "generator": "...",
     "root": NODE}
    NODE = {"loads": [l1 >= l2 >= ...], "item": i, "responses": [EDGE, ...]}
    EDGE = {"loads": [...], "child": NODE}

The verifier shares no code with the solver: it enumerates placements on
its own and checks packability with the recursive brute-force packer.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Iterator

from .feasibility import brute_force_feasible

FORMAT = "binstretch-tree"
VERSION = 1
GENERATOR = "binstretch 0.1.0"


@dataclass(frozen=True)
class AdvNode:
    loads: tuple[int, ...]
    item: int
    responses: tuple["AlgEdge", ...] = ()

    @property
    def is_leaf(self) -> bool:
        """The item fits nowhere below S: the adversary has won."""
        return not self.responses


@dataclass(frozen=True)
class AlgEdge:
    loads: tuple[int, ...]
    child: AdvNode


@dataclass(frozen=True)
class GameTree:
    bins: int
    stretched: int
    opt: int
    root: AdvNode
    generator: str = GENERATOR

    def nodes(self) -> Iterator[tuple[tuple[int, ...], AdvNode]]:
        """(path, node) pairs in preorder; a path lists response indices from the root."""
        stack = [((), self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in range(len(node.responses) - 1, -1, -1):
                stack.append((path + (i,), node.responses[i].child))

    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())


def tree_from_nested(nested, params) -> GameTree:
    """Convert the compiled solver's ``(loads, item, [(loads, child), ...])`` tuples."""

    def convert(n):
        loads, item, responses = n
        return AdvNode(tuple(loads), item,
                       tuple(AlgEdge(tuple(l), convert(c)) for l, c in responses))

    return GameTree(params.bins, params.stretched, params.opt, convert(nested))


class TreeFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _node_to_obj(node: AdvNode) -> dict:
    return {
        "loads": list(node.loads),
        "item": node.item,
        "responses": [{"loads": list(e.loads), "child": _node_to_obj(e.child)}
                      for e in node.responses],
    }


def emit_json(tree: GameTree) -> bytes:
    obj = {
        "format": FORMAT,
        "version": VERSION,
        "bins": tree.bins,
        "stretched": tree.stretched,
        "opt": tree.opt,
        "generator": tree.generator,
        "root": _node_to_obj(tree.root),
    }
    return json.dumps(obj, separators=(",", ":")).encode() + b"\n"


def _expect_keys(obj, keys: set, where: str):
    if not isinstance(obj, dict):
        raise TreeFormatError(f"{where}: expected an object")
    extra = set(obj) - keys
    if extra:
        raise TreeFormatError(f"{where}: unknown field(s) {sorted(extra)}")
    missing = keys - set(obj)
    if missing:
        raise TreeFormatError(f"{where}: missing field(s) {sorted(missing)}")


def _int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise TreeFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _loads(value, bins: int, where: str) -> tuple[int, ...]:
    if not isinstance(value, list) or len(value) != bins:
        raise TreeFormatError(f"{where}: expected {bins} loads")
    loads = tuple(_int(v, where) for v in value)
    if any(a < b for a, b in zip(loads, loads[1:])):
        raise TreeFormatError(f"{where}: loads {list(loads)} are not sorted non-increasing")
    if any(v < 0 for v in loads):
        raise TreeFormatError(f"{where}: negative load")
    return loads


def parse_json(data: bytes | str) -> GameTree:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise TreeFormatError(f"not JSON: {exc}") from None
    _expect_keys(obj, {"format", "version", "bins", "stretched", "opt", "generator", "root"},
                 "header")
    if obj["format"] != FORMAT:
        raise TreeFormatError(f"header: format is {obj['format']!r}, expected {FORMAT!r}")
    if _int(obj["version"], "header.version") != VERSION:
        raise TreeFormatError(f"header: unsupported version {obj['version']}")
    bins = _int(obj["bins"], "header.bins")
    S = _int(obj["stretched"], "header.stretched")
    T = _int(obj["opt"], "header.opt")
    if bins < 1 or T < 1 or S <= T:
        raise TreeFormatError("header: need bins >= 1 and S > T >= 1")
    if not isinstance(obj["generator"], str):
        raise TreeFormatError("header.generator: expected a string")

    def node(o, where: str) -> AdvNode:
        _expect_keys(o, {"loads", "item", "responses"}, where)
        item = _int(o["item"], where + ".item")
        if not 1 <= item <= T:
            raise TreeFormatError(f"{where}: item {item} outside 1..{T}")
        if not isinstance(o["responses"], list):
            raise TreeFormatError(f"{where}.responses: expected a list")
        edges = []
        for i, e in enumerate(o["responses"]):
            w = f"{where}.responses[{i}]"
            _expect_keys(e, {"loads", "child"}, w)
            edges.append(AlgEdge(_loads(e["loads"], bins, w), node(e["child"], w + ".child")))
        return AdvNode(_loads(o["loads"], bins, where), item, tuple(edges))

    return GameTree(bins, S, T, node(obj["root"], "root"), obj["generator"])


# ---------------------------------------------------------------------------
# Placement enumeration (independent of the solver)
# ---------------------------------------------------------------------------

def _results(loads: tuple[int, ...], item: int, stretched: int) -> list[tuple[int, ...]]:
    out = []
    for i, load in enumerate(loads):
        if load + item > stretched - 1:
            continue
        after = tuple(sorted(loads[:i] + (load + item,) + loads[i + 1:], reverse=True))
        if after not in out:
            out.append(after)
    return out


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompactNode:
    """A block of forced items: the same item is sent whatever the algorithm did."""

    loads: tuple[int, ...]
    items: tuple[int, ...]
    children: tuple["CompactNode", ...] = ()


def compact(tree: GameTree) -> CompactNode:
    """Merge levels where every response leads to the same next item.

    Positions reached inside one block have equal multisets, so equal loads
    mean equal game states; such duplicates are kept once.
    """

    def block(start: AdvNode) -> CompactNode:
        items = [start.item]
        level = [start]
        while True:
            if any(n.is_leaf for n in level):
                nxt = []
            else:
                nxt = _dedupe(e.child for n in level for e in n.responses)
            if nxt and len({n.item for n in nxt}) == 1:
                items.append(nxt[0].item)
                level = nxt
                continue
            children = _dedupe(e.child for n in level for e in n.responses)
            return CompactNode(start.loads, tuple(items), tuple(block(c) for c in children))

    return block(tree.root)


def _dedupe(nodes) -> list[AdvNode]:
    seen = {}
    for n in nodes:
        seen.setdefault(n.loads, n)
    return list(seen.values())


def expand(root: CompactNode, bins: int, stretched: int, opt: int) -> GameTree:
    """Rebuild the full tree from its compact form by re-enumerating placements."""

    def block(c: CompactNode) -> AdvNode:
        by_loads = {child.loads: child for child in c.children}

        def level(loads, idx: int) -> AdvNode:
            item = c.items[idx]
            edges = []
            for after in _results(loads, item, stretched):
                if idx + 1 < len(c.items):
                    child = level(after, idx + 1)
                else:
                    if after not in by_loads:
                        raise TreeFormatError(f"compact tree has no block for loads {after}")
                    child = block(by_loads[after])
                edges.append(AlgEdge(after, child))
            return AdvNode(loads, item, tuple(edges))

        return level(c.loads, 0)

    return GameTree(bins, stretched, opt, block(root))


def _label(loads, items) -> str:
    return f"{' '.join(map(str, loads))}, n: {' '.join(map(str, items))}"


def emit_dot(tree: GameTree, compact_form: bool = False) -> bytes:
    lines = [f'digraph "{tree.bins} bins, {tree.stretched}/{tree.opt}" {{',
             "  node [shape=plaintext];"]
    counter = 0
    if compact_form:
        stack = [(None, compact(tree))]
        while stack:
            parent, c = stack.pop()
            me = counter
            counter += 1
            shape = ', shape=box' if not c.children else ""
            lines.append(f'  n{me} [label="{_label(c.loads, c.items)}"{shape}];')
            if parent is not None:
                lines.append(f"  n{parent} -> n{me};")
            for child in reversed(c.children):
                stack.append((me, child))
    else:
        stack = [(None, tree.root)]
        while stack:
            parent, node = stack.pop()
            me = counter
            counter += 1
            shape = ', shape=box' if node.is_leaf else ""
            lines.append(f'  n{me} [label="{_label(node.loads, [node.item])}"{shape}];')
            if parent is not None:
                lines.append(f"  n{parent} -> n{me};")
            for e in reversed(node.responses):
                stack.append((me, e.child))
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: tuple[int, ...]
    rule: str
    description: str

    def __str__(self) -> str:
        where = "root" + "".join(f".{i}" for i in self.path)
        return f"{self.rule} at {where}: {self.description}"


@dataclass
class VerificationReport:
    violations: list[Violation] = field(default_factory=list)
    node_count: int = 0
    # nodes whose packability was decided by the fallback DP
    secondary: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        verdict = "accepted" if self.accepted else "rejected"
        return f"{verdict}: {self.node_count} nodes, {len(self.violations)} violations"


def _secondary_feasible(items: list[int], bins: int, opt: int) -> bool:
    """Set-of-states DP over sorted load tuples; used only past the brute-force ceiling."""
    states = {(0,) * bins}
    for size in sorted(items, reverse=True):
        nxt = set()
        for s in states:
            for i in range(bins):
                if s[i] + size <= opt and (i == 0 or s[i] != s[i - 1]):
                    nxt.add(tuple(sorted(s[:i] + (s[i] + size,) + s[i + 1:], reverse=True)))
        if not nxt:
            return False
        states = nxt
    return True


def verify_tree(tree: GameTree, bins: int | None = None, stretched: int | None = None,
                opt: int | None = None, brute_force_ceiling: int = 64,
                feasibility_memo: dict | None = None) -> VerificationReport:
    """Check that ``tree`` is a winning adversary strategy; every violation is reported.

    Rules: V1 the root is the empty configuration; V2 every item sent keeps
    the multiset packable into ``bins`` bins of ``opt``; V3 each node has
    exactly one edge per distinct placement below ``stretched``; V4 edge
    loads equal a recomputed placement; V5 a node without responses really
    has no placement; V6 loads are well formed and agree with the path.

    ``feasibility_memo`` may be shared between calls to reuse packability
    answers when checking many similar trees.
    """
    m = tree.bins if bins is None else bins
    S = tree.stretched if stretched is None else stretched
    T = tree.opt if opt is None else opt
    report = VerificationReport()
    bad = report.violations
    if (m, S, T) != (tree.bins, tree.stretched, tree.opt):
        bad.append(Violation((), "V1", f"tree header is {tree.bins} bins {tree.stretched}/"
                             f"{tree.opt}, expected {m} bins {S}/{T}"))
    root = tree.root
    if root.loads != (0,) * m:
        bad.append(Violation((), "V1", f"root loads {list(root.loads)} are not all zero"))
    feasible_memo = {} if feasibility_memo is None else feasibility_memo

    # (path, node, items sent before this node, expected loads)
    stack = [((), root, (), (0,) * m)]
    while stack:
        path, node, sent, expected = stack.pop()
        report.node_count += 1
        loads = node.loads
        if len(loads) != m or any(a < b for a, b in zip(loads, loads[1:])):
            bad.append(Violation(path, "V6", f"loads {list(loads)} malformed"))
            continue
        if loads != expected:
            bad.append(Violation(path, "V6", f"loads {list(loads)} differ from the edge "
                                             f"leading here {list(expected)}"))
        if sum(loads) != sum(sent):
            bad.append(Violation(path, "V6", f"loads sum {sum(loads)} != items sent "
                                             f"{sum(sent)}"))
        if any(v > S - 1 or v < 0 for v in loads):
            bad.append(Violation(path, "V6", f"a load in {list(loads)} is outside 0..{S - 1}"))
        item = node.item
        if not 1 <= item <= T:
            bad.append(Violation(path, "V2", f"item {item} outside 1..{T}"))
            continue
        multiset = tuple(sorted(sent + (item,), reverse=True))
        ok = feasible_memo.get((m, T, multiset))
        if ok is None:
            if len(multiset) > brute_force_ceiling:
                ok = _secondary_feasible(list(multiset), m, T)
                report.secondary.append(path)
            else:
                ok = brute_force_feasible(multiset, m, T)
            feasible_memo[(m, T, multiset)] = ok
        if not ok:
            bad.append(Violation(path, "V2", f"items {list(multiset)} do not pack into "
                                             f"{m} bins of {T}"))
        wanted = _results(loads, item, S)
        given = [e.loads for e in node.responses]
        if not given and wanted:
            bad.append(Violation(path, "V5", f"no responses, but item {item} fits at "
                                             f"{list(loads)}"))
        else:
            for i, g in enumerate(given):
                if g not in wanted:
                    bad.append(Violation(path + (i,), "V4", f"loads {list(g)} are not a "
                                         f"placement of {item} on {list(loads)} below {S}"))
            for w in wanted:
                count = given.count(w)
                if count == 0:
                    bad.append(Violation(path, "V3", f"missing response {list(w)}"))
                elif count > 1:
                    bad.append(Violation(path, "V3", f"response {list(w)} repeated"))
        for i in range(len(node.responses) - 1, -1, -1):
            e = node.responses[i]
            stack.append((path + (i,), e.child, sent + (item,), e.loads))
    return report


# ---------------------------------------------------------------------------
# Mutations for testing the verifier
# ---------------------------------------------------------------------------

MUTATIONS = ("item+1", "item-1", "drop-edge", "load")


def _replace_at(node: AdvNode, path: tuple[int, ...], fn) -> AdvNode:
    if not path:
        return fn(node)
    i = path[0]
    edges = list(node.responses)
    e = edges[i]
    edges[i] = AlgEdge(e.loads, _replace_at(e.child, path[1:], fn))
    return replace(node, responses=tuple(edges))


def mutate(tree: GameTree, rng: random.Random, kind: str | None = None):
    """One random single-field change; returns ``(kind, path, new_tree)``.

    ``load`` shifts one load of an edge by one, re-sorts it, and applies
    the same change to the node below, so the edge and its child still
    agree with each other.
    """
    nodes = list(tree.nodes())
    kind = kind or rng.choice(MUTATIONS)
    while True:
        path, node = rng.choice(nodes)
        if kind in ("drop-edge", "load") and not node.responses:
            if not any(n.responses for _, n in nodes):
                raise ValueError("tree has no edges to mutate")
            continue
        break
    if kind == "item+1":
        fn = lambda n: replace(n, item=n.item + 1)
    elif kind == "item-1":
        fn = lambda n: replace(n, item=n.item - 1)
    elif kind == "drop-edge":
        i = rng.randrange(len(node.responses))
        fn = lambda n: replace(n, responses=n.responses[:i] + n.responses[i + 1:])
        path_note = path + (i,)
    else:
        i = rng.randrange(len(node.responses))
        e = node.responses[i]
        pos = rng.randrange(len(e.loads))
        delta = rng.choice((-1, 1))
        changed = list(e.loads)
        changed[pos] += delta
        new_loads = tuple(sorted(changed, reverse=True))

        def fn(n, i=i, new_loads=new_loads):
            edges = list(n.responses)
            old = edges[i]
            edges[i] = AlgEdge(new_loads, replace(old.child, loads=new_loads))
            return replace(n, responses=tuple(edges))
        path_note = path + (i,)
    if kind in ("item+1", "item-1"):
        path_note = path
    return kind, path_note, replace(tree, root=_replace_at(tree.root, path, fn))
