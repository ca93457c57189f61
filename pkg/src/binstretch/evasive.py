"""The Evasive online algorithm for three bins with stretching factor 11/8.

Items are integers at denominator ``k``: every input packs offline into
three bins of ``16k`` and Evasive keeps every load at most ``22k``. The
algorithm is a fixed sequence of GSFF runs over capacity-annotated bin
lists, handing over to a good-situation strategy as soon as one is reached:

    Initial        GSFF(A|4k, B|4k); on halt rename so that s(A) >= s(B)
    item j > 6k    p = 6k + s(j); GSFF(A|p, B|4k)
    next halt w    GSFF(A|22k, B|22k, C|22k) if w fits on A, else
                   GSFF(A|p, B|22k, C|22k)
    item j < 4k    GSFF(A|4k, B|q, C|4k) with q = 9k + (s(A) + s(C))/2
    next halt x    GSFF(A|4k, B|22k, C|22k)
    next halt      GSFF(A|22k, B|22k, C|22k)

Items j of size in [4k, 6k] always reach GS2 through the hypothetical
placements of GSFF.
"""
from __future__ import annotations

import enum
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from . import feasibility
from .goodsits import GsId, GsMatch, GsPlayer, GsScale, StrategyError, gs_detect, gsff


class Phase(enum.Enum):
    INITIAL = "initial"
    LARGE_P = "large-p"
    LARGE_W_FITS = "large-w-fits"
    LARGE_W_WONT_FIT = "large-w-wont-fit"
    QSTEP = "q-step"
    B1 = "b1"
    B2 = "b2"
    GS_DELEGATED = "gs"


class EvasiveError(AssertionError):
    """Evasive overpacked a bin or could not place an item."""


@dataclass
class Placement:
    item: int
    bin: int
    phase: Phase
    loads: tuple[int, int, int]
    gs: GsId | None = None


class Evasive:
    """Deterministic phase machine; feed items with :meth:`step`."""

    def __init__(self, k: int = 1):
        if k < 1:
            raise ValueError("denominator k must be >= 1")
        self.k = k
        self.scale = GsScale.evasive(k)
        self.loads = [0, 0, 0]
        self.bin_items: list[list[int]] = [[], [], []]
        self.phase = Phase.INITIAL
        self.roles = (0, 1, 2)
        self.p: int | None = None
        self.player: GsPlayer | None = None
        self.match: GsMatch | None = None
        # diagnostics only; never read by the placement logic
        self.tracked: dict = {}

    @property
    def capacity(self) -> int:
        return 22 * self.k

    @property
    def opt(self) -> int:
        return 16 * self.k

    def load_of(self, role: str) -> int:
        return self.loads[self.roles["ABC".index(role)]]

    def signature(self):
        """Everything that can influence future placements (for memoization)."""
        big = tuple(max(b, default=0) > 6 * self.k for b in self.bin_items)
        player = self.player.state_key() if self.player is not None else None
        return (self.phase, self.roles, tuple(self.loads), big, self.p, player)

    def copy(self) -> "Evasive":
        other = object.__new__(Evasive)
        other.__dict__.update(self.__dict__)
        other.loads = list(self.loads)
        other.bin_items = [list(b) for b in self.bin_items]
        other.tracked = dict(self.tracked)
        if self.player is not None:
            other.player = self.player.copy()
        return other

    def _entries(self):
        k = self.k
        A, B, C = self.roles
        full = 22 * k
        if self.phase is Phase.INITIAL:
            return [(A, 4 * k), (B, 4 * k)]
        if self.phase is Phase.LARGE_P:
            return [(A, self.p), (B, 4 * k)]
        if self.phase is Phase.LARGE_W_FITS or self.phase is Phase.B2:
            return [(A, full), (B, full), (C, full)]
        if self.phase is Phase.LARGE_W_WONT_FIT:
            return [(A, self.p), (B, full), (C, full)]
        if self.phase is Phase.QSTEP:
            q = 9 * k + Fraction(self.loads[A] + self.loads[C], 2)
            return [(A, 4 * k), (B, q), (C, 4 * k)]
        if self.phase is Phase.B1:
            return [(A, 4 * k), (B, full), (C, full)]
        raise RuntimeError(f"no GSFF list in phase {self.phase}")

    def _delegate(self, match: GsMatch, loads_after):
        self.match = match
        self.player = GsPlayer(match, self.scale, loads_after)
        self.tracked.setdefault("gs_phase", self.phase)
        self.phase = Phase.GS_DELEGATED

    def _halt(self, item: int):
        k = self.k
        A, B, C = self.roles
        t = self.tracked
        if self.phase is Phase.INITIAL:
            if self.loads[0] < self.loads[1]:
                self.roles = (1, 0, 2)
            A, B, C = self.roles
            t.update(j=item, a_before_j=self.loads[A], b_before_j=self.loads[B],
                     a_count_before_j=len(self.bin_items[A]),
                     b_count_before_j=len(self.bin_items[B]))
            if item > 6 * k:
                self.p = 6 * k + item
                self.phase = Phase.LARGE_P
            elif item < 4 * k:
                self.phase = Phase.QSTEP
            else:
                # s(j) in [4k, 6k]: an empty C takes it and reaches GS2
                after = list(self.loads)
                after[C] += item
                match = gs_detect(after, self.scale)
                if match is None or match.gs is not GsId.GS2:
                    raise EvasiveError(f"item {item} should have reached GS2")
                self._delegate(match, after)
                return C
        elif self.phase is Phase.LARGE_P:
            t.update(w=item, b_at_w=self.loads[B], a_at_w=self.loads[A])
            fits = self.loads[A] + item <= 22 * k
            t["w_fits"] = fits
            self.phase = Phase.LARGE_W_FITS if fits else Phase.LARGE_W_WONT_FIT
        elif self.phase is Phase.QSTEP:
            t.update(x=item, a_at_x=self.loads[A], b_at_x=self.loads[B],
                     c_at_x=self.loads[C], c_items_at_x=tuple(self.bin_items[C]))
            self.phase = Phase.B1
        elif self.phase is Phase.B1:
            t["b2"] = item
            self.phase = Phase.B2
        else:
            raise EvasiveError(
                f"item {item} fits nowhere in phase {self.phase.value} with loads {self.loads}")
        return None

    def _choose(self, item: int) -> int:
        if self.player is not None:
            return self.player.place(self.loads, item)
        while True:
            result = gsff(self._entries(), self.loads, item, self.scale, self.roles,
                          self.bin_items)
            if result.match is not None:
                after = list(self.loads)
                after[result.bin] += item
                self._delegate(result.match, after)
                return result.bin
            if not result.halted:
                self._note(item, result.bin)
                return result.bin
            forced = self._halt(item)
            if forced is not None:
                return forced

    def _note(self, item: int, index: int):
        t = self.tracked
        A, B, C = self.roles
        if self.phase is Phase.B1:
            if "x" in t and "b_after_x" not in t and index == B and item == t["x"]:
                t["b_after_x"] = self.loads[B] + item
            elif index != A and "b1" not in t and "b_after_x" in t:
                t["b1"] = item
                t["b1_bin"] = index

    def step(self, item: int) -> int:
        """Place one item; returns the physical bin index (0, 1 or 2)."""
        if not 1 <= item <= self.opt:
            raise ValueError(f"item size {item} outside 1..{self.opt}")
        phase = self.phase
        try:
            index = self._choose(item)
        except StrategyError as exc:
            raise EvasiveError(f"overpack in phase {phase.value}: {exc}") from exc
        if self.loads[index] + item > self.capacity:
            raise EvasiveError(
                f"overpack: bin {index} at {self.loads[index]} + {item} > {self.capacity}"
                f" (phase {phase.value})")
        self.loads[index] += item
        self.bin_items[index].append(item)
        return index

    def run(self, items: Iterable[int]) -> list[Placement]:
        trace = []
        for item in items:
            phase = self.phase
            index = self.step(item)
            gs = self.player.mode if self.player is not None and isinstance(
                self.player.mode, GsId) else None
            trace.append(Placement(item, index, phase, tuple(self.loads), gs))
        return trace


def assert_analysis_invariants(state: Evasive) -> list[str]:
    """Inequalities the correctness argument relies on, for whatever the trace reached.

    Each check only fires when its hypotheses were recorded without a good
    situation in between; an empty list means all hold.
    """
    k = state.k
    t = state.tracked
    out = []

    def check(ok: bool, text: str):
        if not ok:
            out.append(text)

    for i, load in enumerate(state.loads):
        check(load <= 22 * k, f"bin {i} load {load} > 22k")
    j = t.get("j")
    if j is not None and j < 4 * k:
        a, b = t["a_before_j"], t["b_before_j"]
        check(3 * k < a < 4 * k, f"s(A) before j = {a} not in (3k, 4k)")
        check(6 * k < b + j < 8 * k, f"s(B) before j + s(j) = {b + j} not in (6k, 8k)")
        check(t["a_count_before_j"] == 1 or t["b_count_before_j"] == 1,
              "neither A nor B held exactly one item before j")
    if j is not None and j > 6 * k:
        check(t["a_before_j"] < 3 * k, f"s(A) before j = {t['a_before_j']} >= 3k")
        check(t["b_before_j"] == 0, f"s(B) before j = {t['b_before_j']} != 0")
    w = t.get("w")
    if w is not None:
        check(w > 6 * k, f"s(w) = {w} <= 6k")
        if t["w_fits"]:
            check(t["b_at_w"] == 0, f"s(B) = {t['b_at_w']} != 0 when w fits on A")
        else:
            check(j + w > 16 * k, f"s(j) + s(w) = {j + w} <= 16k")
    x = t.get("x")
    if x is not None:
        r_items = t["c_items_at_x"]
        a, c = t["a_at_x"], t["c_at_x"]
        check(len(r_items) == 1, f"C holds {len(r_items)} items after the q-step")
        check(a + c > 6 * k, f"s(A) + s(C) = {a + c} <= 6k after the q-step")
        if r_items:
            check(5 * r_items[0] > 14 * k, f"5 s(r) = {5 * r_items[0]} <= 14k")
        check(2 * (t["b_at_x"] + x) > 18 * k + a + c, "x fits below q")
    if "b_after_x" in t:
        check(5 * t["b_after_x"] < 64 * k, f"5 s(B) = {5 * t['b_after_x']} >= 64k after x")
    if "b1" in t:
        check(5 * t["b1"] > 46 * k, f"5 s(b1) = {5 * t['b1']} <= 46k")
    if "b2" in t:
        check(5 * t["b2"] > 46 * k, f"5 s(b2) = {5 * t['b2']} <= 46k")
    return out


# ---------------------------------------------------------------------------
# Adversaries
# ---------------------------------------------------------------------------

@dataclass
class SimulationReport:
    k: int
    sequences: int = 0
    items: int = 0
    states: int = 0
    closed_by_gs1: int = 0
    max_load: int = 0
    overpacks: list = field(default_factory=list)
    analysis_violations: list = field(default_factory=list)
    # how many sequences (or states) passed through each phase
    phases: Counter = field(default_factory=Counter)

    @property
    def safe(self) -> bool:
        return not self.overpacks

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "sequences": self.sequences,
            "items": self.items,
            "states": self.states,
            "closed_by_gs1": self.closed_by_gs1,
            "max_load": self.max_load,
            "overpacks": len(self.overpacks),
            "analysis_violations": len(self.analysis_violations),
            "phases": {p.value: n for p, n in sorted(self.phases.items(),
                                                     key=lambda kv: kv[0].value)},
        }


def exhaustive_check(k: int = 1, assert_analysis: bool = False, backend: str = "auto",
                     close_gs1: bool = True) -> SimulationReport:
    """Play Evasive against every adversary line that keeps the input packable.

    Game states are memoized on (Evasive's placement-relevant state, item
    multiset), so each distinct position is expanded once. ``sequences``
    counts terminal positions: no further item can be sent.

    Once the GS1 strategy is active every later item goes to its bin C,
    whose final load is at most 48k - s(A) - s(B); such positions are
    closed by checking that bound instead of enumerating the remaining
    lines; ``close_gs1=False`` enumerates them anyway (much slower).
    """
    report = SimulationReport(k)
    opt = 16 * k
    seen = set()
    freq = [0] * (opt + 1)
    path: list[int] = []

    def explore(state: Evasive):
        key = (state.signature(), tuple(freq))
        if key in seen:
            return
        seen.add(key)
        report.states += 1
        report.phases[state.phase] += 1
        report.max_load = max(report.max_load, max(state.loads))
        if assert_analysis:
            bad = assert_analysis_invariants(state)
            if bad:
                report.analysis_violations.append((tuple(path), bad))
        player = state.player
        if close_gs1 and player is not None and player.mode is GsId.GS1:
            a, b, c = player.roles
            bound = 3 * opt - state.loads[a] - state.loads[b]
            if bound <= state.capacity:
                report.closed_by_gs1 += 1
                report.sequences += 1
                return
            report.overpacks.append((tuple(path), f"GS1 bound {bound} exceeds capacity"))
            return
        top = feasibility.max_sendable(freq, 3, opt, backend)
        if top == 0:
            report.sequences += 1
            return
        for item in range(1, top + 1):
            child = state.copy()
            path.append(item)
            try:
                child.step(item)
            except EvasiveError as exc:
                report.overpacks.append((tuple(path), str(exc)))
                path.pop()
                continue
            report.items += 1
            freq[item] += 1
            explore(child)
            freq[item] -= 1
            path.pop()

    explore(Evasive(k))
    return report


def _layered_bin(k: int, fill: int, rng: random.Random) -> list[list[int]]:
    """Split ``fill`` into tiny, medium and large parts (returned per layer)."""
    tiny, medium, large = [], [], []
    budget = rng.randint(0, min(fill, 5 * k))
    while budget > 0:
        size = rng.randint(1, min(budget, max(1, k)))
        tiny.append(size)
        budget -= size
    fill -= sum(tiny)
    for _ in range(rng.randint(0, 2)):
        if fill <= 0:
            break
        size = rng.randint(min(fill, 2 * k), min(fill, 5 * k))
        medium.append(size)
        fill -= size
    while fill > 0:
        size = rng.randint((fill + 1) // 2, fill)
        large.append(size)
        fill -= size
    return [tiny, medium, large]


def random_feasible_sequence(k: int, rng: random.Random) -> list[int]:
    """A random partition of three offline bins of 16k, in a random order.

    Every prefix of such a sequence packs offline, so no feasibility test is
    needed. Half of the sequences are layered: tiny items first, then medium,
    then large, which is the order that drives Evasive into its later phases.
    """
    opt = 16 * k
    if rng.random() < 0.5:
        layers: list[list[int]] = [[], [], []]
        for _ in range(3):
            fill = opt if rng.random() < 0.75 else rng.randint(1, opt)
            for layer, parts in zip(layers, _layered_bin(k, fill, rng)):
                layer.extend(parts)
        items = []
        for layer in layers:
            rng.shuffle(layer)
            items.extend(layer)
        return items
    items = []
    for _ in range(3):
        fill = opt if rng.random() < 0.75 else rng.randint(1, opt)
        style = rng.randrange(3)
        while fill > 0:
            if style == 0:
                size = rng.randint(1, fill)
            elif style == 1:
                size = rng.randint((fill + 1) // 2, fill)
            else:
                size = rng.randint(1, max(1, min(fill, 4 * k)))
            items.append(size)
            fill -= size
    if rng.random() < 0.3:
        items.sort()
    else:
        rng.shuffle(items)
    return items


def adaptive_sequence(state: Evasive, rng: random.Random, tries: int = 8,
                      backend: str = "auto") -> list[int]:
    """Play ``state`` to the end against a randomized adversary that avoids good situations.

    Each step samples up to ``tries`` sendable sizes and sends the first one
    that does not hand Evasive over to a good-situation strategy, falling
    back to the last sample. ``state`` is advanced in place.
    """
    opt = state.opt
    freq = [0] * (opt + 1)
    items = []
    while True:
        top = feasibility.max_sendable(freq, 3, opt, backend)
        if top == 0:
            return items
        choice = None
        small = min(top, 4 * state.k)
        for _ in range(tries):
            choice = rng.randint(1, top if rng.random() < 0.5 else small)
            if state.player is not None:
                break
            probe = state.copy()
            probe.step(choice)
            if probe.player is None:
                break
        items.append(choice)
        freq[choice] += 1
        state.step(choice)


def random_check(k: int, sequences: int, seed: int = 0, assert_analysis: bool = False,
                 adaptive_share: float = 0.25, backend: str = "auto") -> SimulationReport:
    """Run Evasive on random packable inputs.

    A share ``adaptive_share`` of the runs uses :func:`adaptive_sequence`;
    the rest are offline partitions from :func:`random_feasible_sequence`.
    """
    rng = random.Random(seed)
    report = SimulationReport(k)
    for _ in range(sequences):
        state = Evasive(k)
        report.sequences += 1
        visited = {Phase.INITIAL}
        try:
            if rng.random() < adaptive_share:
                # adaptive_sequence steps the state itself
                items = []
                try:
                    items = adaptive_sequence(state, rng, backend=backend)
                finally:
                    report.items += len(items)
                visited.update(_phases_of(state))
            else:
                items = random_feasible_sequence(k, rng)
                for item in items:
                    state.step(item)
                    visited.add(state.phase)
                    report.items += 1
        except EvasiveError as exc:
            report.overpacks.append((tuple(items), str(exc)))
            continue
        visited.update(_phases_of(state))
        report.phases.update(visited)
        report.max_load = max(report.max_load, max(state.loads))
        if assert_analysis:
            bad = assert_analysis_invariants(state)
            if bad:
                report.analysis_violations.append((tuple(items), bad))
    return report


def _phases_of(state: Evasive) -> set:
    """Phases a finished run went through, reconstructed from the tracked items."""
    t = state.tracked
    out = {state.phase}
    if "gs_phase" in t:
        out.add(t["gs_phase"])
    if "w" in t:
        out.add(Phase.LARGE_P)
        out.add(Phase.LARGE_W_FITS if t["w_fits"] else Phase.LARGE_W_WONT_FIT)
    elif state.p is not None:
        out.add(Phase.LARGE_P)
    if "x" in t:
        out.add(Phase.QSTEP)
        out.add(Phase.B1)
    elif state.phase is Phase.QSTEP or t.get("gs_phase") is Phase.QSTEP:
        out.add(Phase.QSTEP)
    if "b2" in t:
        out.add(Phase.B2)
    return out


def read_sequence(lines: Iterable[str], k: int, backend: str = "auto") -> list[int]:
    """Parse whitespace-separated integer items (``#`` starts a comment).

    Raises ValueError unless the whole sequence packs offline into three
    bins of 16k.
    """
    items = []
    for number, line in enumerate(lines, 1):
        for token in line.split("#", 1)[0].split():
            try:
                size = int(token)
            except ValueError:
                raise ValueError(f"line {number}: not an integer: {token!r}") from None
            if not 1 <= size <= 16 * k:
                raise ValueError(f"line {number}: item {size} outside 1..{16 * k}")
            items.append(size)
    if not feasibility.test_feasible(items, 3, 16 * k, backend):
        raise ValueError("the item sequence does not pack into three bins of 16k")
    return items


def replay(items: Sequence[int], k: int) -> tuple[Evasive, list[Placement]]:
    state = Evasive(k)
    return state, state.run(items)


def iter_trace(trace: Sequence[Placement]) -> Iterator[str]:
    for n, pl in enumerate(trace, 1):
        gs = f" {pl.gs.name}" if pl.gs is not None else ""
        loads = " ".join(map(str, pl.loads))
        yield f"{n}: item {pl.item} -> bin {pl.bin} [{pl.phase.value}{gs}] loads {loads}"
