"""Variable store, trail, and the propagation queue.

Domains are bitmasks over small non-negative integers. Propagators only ever
shrink domains; every change is recorded on the trail so a search can
return to any earlier mark exactly.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

STABLE = "stable"
FAILED = "failed"


def mask_of(values: Iterable[int]) -> int:
    m = 0
    for v in values:
        m |= 1 << v
    return m


def values_of(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class Constraint:
    """Base class. Subclasses set ``scope`` and implement ``propagate``,
    which narrows domains through ``net.narrow`` and returns False on a
    wipe-out, and ``check``, which evaluates a full assignment directly."""

    scope: tuple[int, ...] = ()
    idempotent = True
    queued = False

    def propagate(self, net: "Network") -> bool:
        raise NotImplementedError

    def check(self, value: dict[int, int] | list[int]) -> bool:
        raise NotImplementedError


class Network:
    def __init__(self) -> None:
        self.dom: list[int] = []
        self.names: list[str] = []
        self.priority: list[int] = []
        self.kind: list[str | None] = []
        self.watch: list[list[Constraint]] = []
        self.constraints: list[Constraint] = []
        self.trail: list[tuple[int, int]] = []
        self._queue: deque[Constraint] = deque()
        self._current: Constraint | None = None
        self._true: int | None = None
        # trail length just past the earliest wipe-out not yet undone
        self._wipe: int | None = None
        self._false: int | None = None

    # -- variables -------------------------------------------------------

    def add_var(self, domain: Iterable[int] | int, name: str = "", priority: int = 1,
                kind: str | None = None) -> int:
        m = domain if isinstance(domain, int) else mask_of(domain)
        if m == 0:
            raise ValueError(f"variable {name!r} created with an empty domain")
        self.dom.append(m)
        self.names.append(name or f"v{len(self.dom) - 1}")
        self.priority.append(priority)
        self.kind.append(kind)
        self.watch.append([])
        return len(self.dom) - 1

    def add_bool(self, name: str = "", priority: int = 2) -> int:
        return self.add_var(3, name, priority)

    @property
    def true(self) -> int:
        if self._true is None:
            self._true = self.add_var(2, "TRUE", priority=3)
        return self._true

    @property
    def false(self) -> int:
        if self._false is None:
            self._false = self.add_var(1, "FALSE", priority=3)
        return self._false

    def const_bool(self, value: bool) -> int:
        return self.true if value else self.false

    def __len__(self) -> int:
        return len(self.dom)

    def is_fixed(self, v: int) -> bool:
        d = self.dom[v]
        return d & (d - 1) == 0

    def value(self, v: int) -> int:
        d = self.dom[v]
        if d & (d - 1):
            raise ValueError(f"variable {self.names[v]} is not fixed")
        return d.bit_length() - 1

    def values(self, v: int) -> list[int]:
        return values_of(self.dom[v])

    # -- constraints -----------------------------------------------------

    def post(self, c: Constraint) -> Constraint:
        self.constraints.append(c)
        for v in set(c.scope):
            self.watch[v].append(c)
        if not c.queued:
            c.queued = True
            self._queue.append(c)
        return c

    def narrow(self, v: int, new: int) -> bool:
        """Set dom(v) to ``new`` (assumed a subset). False on wipe-out."""
        old = self.dom[v]
        if new == old:
            return True
        self.trail.append((v, old))
        self.dom[v] = new
        if not new:
            if self._wipe is None:
                self._wipe = len(self.trail)
            return False
        cur = self._current
        queue = self._queue
        for c in self.watch[v]:
            if not c.queued and not (c is cur and c.idempotent):
                c.queued = True
                queue.append(c)
        return True

    def restrict(self, v: int, mask: int) -> bool:
        return self.narrow(v, self.dom[v] & mask)

    def propagate(self) -> str:
        queue = self._queue
        if self._wipe is not None:
            self.discard_pending()
            return FAILED
        while queue:
            c = queue.popleft()
            c.queued = False
            self._current = c
            if not c.propagate(self):
                self._current = None
                for q in queue:
                    q.queued = False
                queue.clear()
                return FAILED
        self._current = None
        return STABLE

    def discard_pending(self) -> None:
        """Forget queued propagation work (after undoing to a stable state)."""
        for c in self._queue:
            c.queued = False
        self._queue.clear()

    def pending(self) -> list[Constraint]:
        return list(self._queue)

    def reset_pending(self, cs: Iterable[Constraint]) -> None:
        """Replace the queue by ``cs``, e.g. to restore it after an undo."""
        self.discard_pending()
        for c in cs:
            if not c.queued:
                c.queued = True
                self._queue.append(c)

    # -- trail -----------------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        dom = self.dom
        while len(trail) > mark:
            v, old = trail.pop()
            dom[v] = old
        if self._wipe is not None and mark < self._wipe:
            self._wipe = None

    def snapshot(self) -> tuple[int, ...]:
        return tuple(self.dom)

    def assignment(self) -> list[int]:
        return [d.bit_length() - 1 for d in self.dom]

    def satisfied_by(self, assignment: list[int]) -> bool:
        return all(c.check(assignment) for c in self.constraints)
