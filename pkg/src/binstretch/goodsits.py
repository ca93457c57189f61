"""Good situations on three bins.

A good situation is a configuration from which a simple online rule is
guaranteed to pack every remaining item without any load exceeding the
algorithm's capacity ``S'``. With ``alpha = S' - T`` the five general
situations are:

    GS1  a + b >= 2T - alpha
    GS2  a in [T - 2 alpha, alpha]
    GS3  a >= 3/2 (T - alpha) and either b + c >= S' or c < T - 2 alpha
    GS4  a + b >= 3/2 (T - alpha) + c/2 with b, c < T - 2 alpha
    GS5  c = 0, b in [(3T - 7 alpha)/2, alpha], and an item larger than
         alpha sits on bin A

All of them need ``3 alpha >= T``. GS6 and GS7 only exist on the
``(22k, 16k)`` scale used by :mod:`binstretch.evasive`:

    GS6  c < 4k, b > 6k, a >= b + 4k - c
    GS7  a < 4k, c < 4k, b <= 9k + (a + c)/2 and an incoming x with b + x > 22k

Fractions are never formed; every threshold is compared after
multiplying through by its denominator.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

ROLE_MAPS = tuple(permutations(range(3)))


class GsId(enum.IntEnum):
    GS1 = 1
    GS2 = 2
    GS3 = 3
    GS4 = 4
    GS5 = 5
    GS6 = 6
    GS7 = 7


class StrategyError(AssertionError):
    """A good-situation strategy tried to exceed the capacity (never expected)."""


@dataclass(frozen=True)
class GsScale:
    capacity: int
    opt: int
    extended: bool = False

    def __post_init__(self):
        if self.capacity <= self.opt:
            raise ValueError("capacity S' must exceed T")
        if 3 * self.alpha < self.opt:
            raise ValueError(
                f"good situations need alpha >= T/3 (S'={self.capacity}, T={self.opt})")
        if self.extended and (self.opt % 16 or 16 * self.capacity != 22 * self.opt):
            raise ValueError("GS6/GS7 are only defined on the (22k, 16k) scale")

    @classmethod
    def for_game(cls, stretched: int, opt: int) -> "GsScale":
        """Scale of the game where loads must stay strictly below ``stretched``."""
        return cls(stretched - 1, opt)

    @classmethod
    def evasive(cls, k: int) -> "GsScale":
        return cls(22 * k, 16 * k, extended=True)

    @staticmethod
    def applicable(stretched: int, opt: int) -> bool:
        return 3 * (stretched - 1 - opt) >= opt

    @property
    def alpha(self) -> int:
        return self.capacity - self.opt

    @property
    def small(self) -> int:
        """T - 2 alpha, the bound below which a bin counts as nearly empty."""
        return self.opt - 2 * self.alpha


@dataclass(frozen=True)
class GsMatch:
    """A detected situation; ``roles`` maps logical A, B, C to physical bin indices."""

    gs: GsId
    roles: tuple[int, int, int]


def _big_item_on(bin_items, items, bin_index: int, load: int, scale: GsScale) -> bool:
    alpha = scale.alpha
    if bin_items is not None:
        return any(size > alpha for size in bin_items[bin_index])
    if items is not None:
        top = min(load, len(items) - 1)
        return any(items[size] for size in range(alpha + 1, top + 1))
    return False


def _holds(gs: GsId, a: int, b: int, c: int, scale: GsScale, roles, bin_items, items,
           incoming) -> bool:
    T, cap, alpha, small = scale.opt, scale.capacity, scale.alpha, scale.small
    if gs is GsId.GS1:
        return a + b >= 2 * T - alpha
    if gs is GsId.GS2:
        return small <= a <= alpha
    if gs is GsId.GS3:
        return 2 * a >= 3 * (T - alpha) and a <= cap and (b + c >= cap or c < small)
    if gs is GsId.GS4:
        return b < small and c < small and 2 * (a + b) >= 3 * (T - alpha) + c
    if gs is GsId.GS5:
        return (c == 0 and 2 * b >= 3 * T - 7 * alpha and b <= alpha
                and _big_item_on(bin_items, items, roles[0], a, scale))
    if not scale.extended:
        return False
    k = T // 16
    if gs is GsId.GS6:
        return c < 4 * k and b > 6 * k and a >= b + 4 * k - c
    # GS7
    return (incoming is not None and a < 4 * k and c < 4 * k
            and 2 * b <= 18 * k + a + c and b + incoming > 22 * k)


def gs_detect(loads: Sequence[int], scale: GsScale, *, bin_items=None, items=None,
              incoming: int | None = None) -> GsMatch | None:
    """Lowest-numbered good situation under any assignment of roles, or None.

    ``loads`` are physical bin loads in any order. GS5 needs to know where
    large items are: pass ``bin_items`` (items per physical bin) or, for a
    sorted configuration, the frequency table ``items``; in the latter case
    an item larger than alpha and no larger than ``a`` must lie on A, since
    B and C are too small to hold it. GS7 is only checked when ``incoming``
    is given.
    """
    if len(loads) != 3:
        raise ValueError("good situations are defined for three bins only")
    for gs in GsId:
        if gs >= GsId.GS6 and not scale.extended:
            break
        for roles in ROLE_MAPS:
            a, b, c = loads[roles[0]], loads[roles[1]], loads[roles[2]]
            if _holds(gs, a, b, c, scale, roles, bin_items, items, incoming):
                return GsMatch(gs, roles)
    return None


def holds(match: GsMatch, loads: Sequence[int], scale: GsScale, *, bin_items=None,
          items=None, incoming=None) -> bool:
    """Re-check one match's precondition under its own role map."""
    r = match.roles
    return _holds(match.gs, loads[r[0]], loads[r[1]], loads[r[2]], scale, r,
                  bin_items, items, incoming)


def _gs1_roles(loads: Sequence[int], scale: GsScale):
    for roles in ROLE_MAPS:
        if loads[roles[0]] + loads[roles[1]] >= 2 * scale.opt - scale.alpha:
            return roles
    return None


class GsPlayer:
    """Online packer that finishes from a good situation.

    Created from a match that holds for the current loads; afterwards the
    caller passes every new item to :meth:`place` together with the
    current physical loads and applies the returned bin index.
    """

    def __init__(self, match: GsMatch, scale: GsScale, loads: Sequence[int]):
        self.scale = scale
        self.mode = match.gs
        self.roles = match.roles
        self.frozen_c = None
        self.trail = [match.gs]
        self._enter(match.gs, match.roles, loads)

    def copy(self) -> "GsPlayer":
        other = object.__new__(GsPlayer)
        other.__dict__.update(self.__dict__)
        other.trail = list(self.trail)
        return other

    def state_key(self):
        return (self.mode, self.roles, self.frozen_c)

    def _enter(self, mode: GsId, roles, loads):
        self.mode = mode
        self.roles = tuple(roles)
        if self.trail[-1] != mode:
            self.trail.append(mode)
        if mode is GsId.GS4:
            self.frozen_c = loads[roles[2]]
        elif mode is GsId.GS3:
            a, b, c = roles
            if loads[b] + loads[c] >= self.scale.capacity:
                # the larger of B, C pairs with A for GS1
                big = b if loads[b] >= loads[c] else c
                other = c if big == b else b
                self._enter(GsId.GS1, (a, big, other), loads)
            elif loads[c] >= self.scale.small:
                self.roles = (a, c, b)

    def _fits(self, loads, index: int, item: int) -> bool:
        return loads[index] + item <= self.scale.capacity

    def _choose(self, loads, item: int) -> int:
        a, b, c = self.roles
        scale = self.scale
        mode = self.mode
        if mode is GsId.GS1:
            return c
        if mode is GsId.GS2:
            return b if self._fits(loads, b, item) else a
        if mode is GsId.GS3:
            return b if self._fits(loads, b, item) else c
        if mode is GsId.GS4:
            if 2 * item >= scale.capacity - self.frozen_c:
                return b
            return a if self._fits(loads, a, item) else c
        if mode is GsId.GS5:
            return a if self._fits(loads, a, item) else b
        if mode == "ff":
            for index in self.roles:
                if self._fits(loads, index, item):
                    return index
            return b
        if mode is GsId.GS6:
            if self._fits(loads, a, item):
                return a
            return b if self._fits(loads, b, item) else c
        # GS7: the incoming item goes to A, which reaches GS6
        return a

    def _advance(self, loads, item: int, index: int):
        scale = self.scale
        mode = self.mode
        roles = _gs1_roles(loads, scale)
        if mode is not GsId.GS1 and roles is not None:
            self._enter(GsId.GS1, roles, loads)
            return
        a, b, c = self.roles
        if mode is GsId.GS4 and 2 * loads[a] >= 3 * (scale.opt - scale.alpha):
            # B is still below T - 2 alpha, so it plays the small bin of GS3
            self._enter(GsId.GS3, (a, c, b), loads)
        elif mode is GsId.GS5:
            if index == a:
                if (loads[b] < scale.small and loads[c] < scale.small
                        and 2 * (loads[a] + loads[b]) >= 3 * (scale.opt - scale.alpha) + loads[c]):
                    self._enter(GsId.GS4, (a, b, c), loads)
            elif 2 * loads[b] >= 3 * (scale.opt - scale.alpha):
                self._enter(GsId.GS3, (b, a, c), loads)
            else:
                # First Fit over B, A, C
                self.mode = "ff"
                self.roles = (b, a, c)
                self.trail.append("ff")
        elif mode is GsId.GS7:
            self._enter(GsId.GS6, (a, b, c), loads)

    def place(self, loads: Sequence[int], item: int) -> int:
        index = self._choose(loads, item)
        if loads[index] + item > self.scale.capacity:
            raise StrategyError(
                f"{self.mode!r} would overpack bin {index}: {loads[index]} + {item}"
                f" > {self.scale.capacity}")
        after = list(loads)
        after[index] += item
        self._advance(after, item, index)
        return index


@dataclass(frozen=True)
class GsffResult:
    """Outcome of one GSFF step: a bin, possibly with the situation it reaches, or a halt."""

    bin: int | None
    match: GsMatch | None = None

    @property
    def halted(self) -> bool:
        return self.bin is None


def gsff(entries: Sequence[tuple[int, object]], loads: Sequence[int], item: int,
         scale: GsScale, order: Sequence[int] = (0, 1, 2), bin_items=None) -> GsffResult:
    """Good Situation First Fit for one item.

    ``entries`` is the ordered list of ``(bin, capacity)`` pairs; capacities
    may be ints or :class:`fractions.Fraction`. Before the list is used,
    the item is tried on every bin in ``order`` at capacity ``S'`` and the
    first placement that reaches a good situation wins.
    """
    for index in order:
        if loads[index] + item > scale.capacity:
            continue
        after = list(loads)
        after[index] += item
        placed = None
        if bin_items is not None:
            placed = [list(b) for b in bin_items]
            placed[index].append(item)
        match = gs_detect(after, scale, bin_items=placed)
        if match is not None:
            return GsffResult(index, match)
    for index, capacity in entries:
        if loads[index] + item <= capacity:
            return GsffResult(index)
    return GsffResult(None)
