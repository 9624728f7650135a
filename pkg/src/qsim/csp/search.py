"""Backtracking search by domain splitting, interleaved with propagation."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .network import FAILED, Network, lowest


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, stats: "SearchStats"):
        self.what = what
        self.stats = stats
        super().__init__(f"{what} budget exceeded after {stats.nodes} nodes")


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    seconds: float = 0.0


@dataclass(frozen=True)
class Split:
    var: int
    first: int
    second: int


class SplitStrategy(Protocol):
    def split(self, net: Network) -> Split | None: ...


def _select_first_fail(net: Network, rank: list[int] | None = None) -> int:
    """Smallest unfixed domain within the most important priority class;
    ties go to the lower variable id, or to the lower ``rank`` entry when a
    tie-breaking permutation is given. -1 when everything is fixed."""
    best = -1
    best_key = None
    dom = net.dom
    prio = net.priority
    for v, d in enumerate(dom):
        if d & (d - 1):
            key = (prio[v], d.bit_count(), rank[v] if rank else v)
            if best_key is None or key < best_key:
                best, best_key = v, key
    return best


class _Ties:
    """Optional seeded tie-breaking among equally good variables."""

    seed: int | None = None
    _rank: list[int] | None = None

    def rank(self, net: Network) -> list[int] | None:
        if self.seed is None:
            return None
        if self._rank is None or len(self._rank) != len(net.dom):
            order = list(range(len(net.dom)))
            random.Random(self.seed).shuffle(order)
            self._rank = order
        return self._rank


class FirstFail(_Ties):
    """Pick the smallest unfixed domain within the most important priority
    class and try its lowest value first."""

    name = "first-fail"

    def __init__(self, seed: int | None = None):
        self.seed = seed

    def split(self, net: Network) -> Split | None:
        v = _select_first_fail(net, self.rank(net))
        if v < 0:
            return None
        d = net.dom[v]
        low = d & -d
        return Split(v, low, d & ~low)


@dataclass
class SubclassSplit(_Ties):
    """Split so that the first part is the largest member of a subdomain
    family lying strictly inside the current domain.

    ``families`` maps a calculus name to a list of relation masks; variables
    whose kind has no family fall back to first-fail splitting. Singletons
    are always members, so a split exists for every unfixed domain.
    """

    families: dict[str, list[int]] = field(default_factory=dict)
    seed: int | None = None
    name: str = "subclass"

    def __post_init__(self) -> None:
        fixed: dict[str, list[int]] = {}
        for kind, members in self.families.items():
            ms = set(members)
            width = max(ms).bit_length() if ms else 0
            ms.update(1 << i for i in range(width))
            ms.discard(0)
            fixed[kind] = sorted(ms, key=lambda m: (-m.bit_count(), m))
        self.families = fixed

    def split(self, net: Network) -> Split | None:
        v = _select_first_fail(net, self.rank(net))
        if v < 0:
            return None
        d = net.dom[v]
        family = self.families.get(net.kind[v] or "")
        if family:
            for m in family:
                if m != d and m & d == m:
                    return Split(v, m, d & ~m)
        low = d & -d
        return Split(v, low, d & ~low)


def load_subclass_family(path: str | Path, calculi: dict) -> dict[str, list[int]]:
    """Read a family file: ``FAMILY <calculus>`` headers followed by one
    relation set per line (names separated by spaces)."""
    out: dict[str, list[int]] = {}
    current = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "FAMILY":
            if len(words) != 2 or words[1] not in calculi:
                raise ValueError(f"{path}:{lineno}: FAMILY needs a known calculus name")
            current = words[1]
            out.setdefault(current, [])
            continue
        if current is None:
            raise ValueError(f"{path}:{lineno}: relation set before any FAMILY header")
        out[current].append(calculi[current].mask(words))
    return out


def solve(net: Network, strategy: SplitStrategy | None = None, *, node_limit: int | None = None,
          time_limit: float | None = None, stats: SearchStats | None = None) -> list[int] | None:
    """Depth-first search. Returns a total assignment (list indexed by
    variable) or None when the space is exhausted. The network's domains
    are restored to their entry state before returning."""
    strategy = strategy or FirstFail()
    stats = stats if stats is not None else SearchStats()
    start = time.perf_counter()
    entry = net.mark()
    pending = net.pending()
    deadline = start + time_limit if time_limit is not None else None
    try:
        if net.propagate() == FAILED:
            stats.failures += 1
            return None
        stack: list[tuple[int, int, int]] = []
        while True:
            decision = strategy.split(net)
            if decision is None:
                solution = net.assignment()
                return solution
            stats.nodes += 1
            if node_limit is not None and stats.nodes > node_limit:
                raise BudgetExceeded("node", stats)
            if deadline is not None and stats.nodes & 63 == 0 and time.perf_counter() > deadline:
                raise BudgetExceeded("time", stats)
            mark = net.mark()
            stack.append((mark, decision.var, decision.second))
            ok = net.restrict(decision.var, decision.first) and net.propagate() != FAILED
            while not ok:
                stats.failures += 1
                if not stack:
                    return None
                mark, var, second = stack.pop()
                net.undo(mark)
                ok = net.restrict(var, second) and net.propagate() != FAILED
    finally:
        net.undo(entry)
        net.reset_pending(pending)
        stats.seconds += time.perf_counter() - start


def solve_with(net: Network, restrictions: dict[int, int], strategy: SplitStrategy | None = None,
               **limits) -> list[int] | None:
    """Solve under extra domain restrictions (variable -> allowed mask),
    leaving the network as it was."""
    entry = net.mark()
    pending = net.pending()
    try:
        for v, mask in restrictions.items():
            if not net.restrict(v, mask):
                return None
        return solve(net, strategy, **limits)
    finally:
        net.undo(entry)
        net.reset_pending(pending)


def solve_all(net: Network, strategy: SplitStrategy | None = None, *, limit: int | None = None) -> list[list[int]]:
    """Every total assignment, in search order (small networks only)."""
    strategy = strategy or FirstFail()
    out: list[list[int]] = []
    entry = net.mark()
    pending = net.pending()

    def rec() -> None:
        if limit is not None and len(out) >= limit:
            return
        if net.propagate() == FAILED:
            return
        decision = strategy.split(net)
        if decision is None:
            out.append(net.assignment())
            return
        for part in (decision.first, decision.second):
            mark = net.mark()
            if net.restrict(decision.var, part):
                rec()
            net.undo(mark)

    try:
        rec()
    finally:
        net.undo(entry)
        net.reset_pending(pending)
    return out


def split(strategy: SplitStrategy, net: Network) -> Split | None:
    return strategy.split(net)


__all__ = [
    "BudgetExceeded",
    "FirstFail",
    "SearchStats",
    "Split",
    "SplitStrategy",
    "SubclassSplit",
    "load_subclass_family",
    "lowest",
    "solve",
    "solve_all",
    "solve_with",
    "split",
]
