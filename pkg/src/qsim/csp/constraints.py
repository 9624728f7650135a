"""Propagators. Each one enforces hyper-arc consistency on its own scope.

Boolean variables use the domain bits 0 (false) and 1 (true): the masks
1, 2 and 3 are "false", "true" and "unknown".
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .network import Constraint, Network

_VALS: dict[int, tuple[int, ...]] = {}


def vals(mask: int) -> tuple[int, ...]:
    t = _VALS.get(mask)
    if t is None:
        out = []
        m, v = mask, 0
        while m:
            if m & 1:
                out.append(v)
            m >>= 1
            v += 1
        t = _VALS[mask] = tuple(out)
    return t


FALSE, TRUE, UNKNOWN = 1, 2, 3


class Table(Constraint):
    """Extensional constraint of any arity: the scope must take one of
    ``tuples``. Hyper-arc consistency by a support scan over the tuples."""

    def __init__(self, scope: Sequence[int], tuples: Iterable[Sequence[int]]):
        self.scope = tuple(scope)
        self.tuples = [tuple(t) for t in tuples]
        for t in self.tuples:
            if len(t) != len(self.scope):
                raise ValueError(f"tuple {t} does not match arity {len(self.scope)}")
        self._set = frozenset(self.tuples)

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        scope = self.scope
        doms = [dom[v] for v in scope]
        sup = [0] * len(scope)
        n = len(scope)
        for t in self.tuples:
            for p in range(n):
                if not doms[p] >> t[p] & 1:
                    break
            else:
                for p in range(n):
                    sup[p] |= 1 << t[p]
        for p in range(n):
            if sup[p] != doms[p] and not net.narrow(scope[p], sup[p]):
                return False
        return True

    def check(self, a) -> bool:
        return tuple(a[v] for v in self.scope) in self._set


class Binary(Constraint):
    """Binary extensional constraint given as ``sup[a]`` = mask of the
    y-values compatible with x = a."""

    def __init__(self, x: int, y: int, sup: Sequence[int]):
        self.scope = (x, y)
        self.x, self.y = x, y
        self.sup = tuple(sup)

    @classmethod
    def from_pairs(cls, x: int, y: int, pairs: Iterable[tuple[int, int]]) -> "Binary":
        sup: list[int] = []
        for a, b in pairs:
            while len(sup) <= a:
                sup.append(0)
            sup[a] |= 1 << b
        return cls(x, y, sup)

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        dx, dy = dom[self.x], dom[self.y]
        sup = self.sup
        nsup = len(sup)
        nx = 0
        ny = 0
        for a in vals(dx):
            if a < nsup:
                m = sup[a] & dy
                if m:
                    nx |= 1 << a
                    ny |= m
        if nx != dx and not net.narrow(self.x, nx):
            return False
        if ny != dy and not net.narrow(self.y, ny):
            return False
        return True

    def check(self, a) -> bool:
        va = a[self.x]
        return va < len(self.sup) and bool(self.sup[va] >> a[self.y] & 1)


class Ternary(Constraint):
    """Ternary extensional constraint indexed by its first two variables:
    ``table[a][b]`` is the mask of z-values compatible with x = a, y = b."""

    def __init__(self, x: int, y: int, z: int, table: Sequence[Sequence[int]]):
        self.scope = (x, y, z)
        self.x, self.y, self.z = x, y, z
        self.table = tuple(tuple(row) for row in table)

    @classmethod
    def from_tuples(cls, x: int, y: int, z: int, tuples: Iterable[tuple[int, int, int]]) -> "Ternary":
        rows: dict[int, dict[int, int]] = {}
        na = nb = 0
        for a, b, c in tuples:
            rows.setdefault(a, {})
            rows[a][b] = rows[a].get(b, 0) | 1 << c
            na, nb = max(na, a + 1), max(nb, b + 1)
        table = [[rows.get(a, {}).get(b, 0) for b in range(nb)] for a in range(na)]
        return cls(x, y, z, table)

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        dx, dy, dz = dom[self.x], dom[self.y], dom[self.z]
        table = self.table
        na = len(table)
        nx = ny = nz = 0
        ys = vals(dy)
        for a in vals(dx):
            if a >= na:
                continue
            row = table[a]
            nrow = len(row)
            hit = 0
            for b in ys:
                if b < nrow:
                    m = row[b] & dz
                    if m:
                        hit = 1
                        ny |= 1 << b
                        nz |= m
            if hit:
                nx |= 1 << a
        if nx != dx and not net.narrow(self.x, nx):
            return False
        if ny != dy and not net.narrow(self.y, ny):
            return False
        if nz != dz and not net.narrow(self.z, nz):
            return False
        return True

    def check(self, a) -> bool:
        va, vb = a[self.x], a[self.y]
        if va >= len(self.table) or vb >= len(self.table[va]):
            return False
        return bool(self.table[va][vb] >> a[self.z] & 1)


class Member(Constraint):
    """Reified membership ``b <-> (x in R)``; with ``half`` only
    ``b -> (x in R)``."""

    def __init__(self, b: int, x: int, mask: int, half: bool = False):
        self.scope = (b, x)
        self.b, self.x, self.mask = b, x, mask
        self.half = half

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        db, dx = dom[self.b], dom[self.x]
        m = self.mask
        if db == TRUE:
            if dx & ~m:
                return net.narrow(self.x, dx & m)
            return True
        if db == FALSE:
            if not self.half and dx & m:
                return net.narrow(self.x, dx & ~m)
            return True
        if not dx & m:
            return net.narrow(self.b, FALSE)
        if not self.half and not dx & ~m:
            return net.narrow(self.b, TRUE)
        return True

    def check(self, a) -> bool:
        inside = bool(self.mask >> a[self.x] & 1)
        if self.half:
            return inside or a[self.b] == 0
        return inside == (a[self.b] == 1)


class Not(Constraint):
    def __init__(self, b: int, x: int):
        self.scope = (b, x)
        self.b, self.x = b, x

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        db, dx = dom[self.b], dom[self.x]
        # swap bits 0 and 1
        nx = dx & (((db & 1) << 1) | (db >> 1))
        nb = db & (((nx & 1) << 1) | (nx >> 1))
        if nx != dx and not net.narrow(self.x, nx):
            return False
        if nb != db and not net.narrow(self.b, nb):
            return False
        return True

    def check(self, a) -> bool:
        return a[self.b] != a[self.x]


class And(Constraint):
    """``b <-> x1 & ... & xn``; with ``half`` only ``b -> x1 & ... & xn``."""

    def __init__(self, b: int, xs: Sequence[int], half: bool = False):
        self.b = b
        self.xs = tuple(xs)
        self.scope = (b,) + self.xs
        self.half = half

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        db = dom[self.b]
        if db == TRUE:
            for x in self.xs:
                dx = dom[x]
                if dx != TRUE and not net.narrow(x, dx & TRUE):
                    return False
            return True
        free = -1
        nfree = 0
        for x in self.xs:
            dx = dom[x]
            if dx == FALSE:
                if db != FALSE:
                    return net.narrow(self.b, FALSE)
                return True
            if dx == UNKNOWN:
                nfree += 1
                free = x
        if nfree == 0:
            if self.half:
                return True
            return net.narrow(self.b, db & TRUE)
        if db == FALSE and nfree == 1 and not self.half:
            return net.narrow(free, FALSE)
        return True

    def check(self, a) -> bool:
        conj = all(a[x] == 1 for x in self.xs)
        if self.half:
            return conj or a[self.b] == 0
        return conj == (a[self.b] == 1)


class Or(Constraint):
    """``b <-> x1 | ... | xn``; with ``half`` only ``b -> x1 | ... | xn``."""

    def __init__(self, b: int, xs: Sequence[int], half: bool = False):
        self.b = b
        self.xs = tuple(xs)
        self.scope = (b,) + self.xs
        self.half = half

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        db = dom[self.b]
        if db == FALSE:
            if self.half:
                return True
            for x in self.xs:
                dx = dom[x]
                if dx != FALSE and not net.narrow(x, dx & FALSE):
                    return False
            return True
        free = -1
        nfree = 0
        for x in self.xs:
            dx = dom[x]
            if dx == TRUE:
                if db != TRUE and not self.half:
                    return net.narrow(self.b, TRUE)
                return True
            if dx == UNKNOWN:
                nfree += 1
                free = x
        if nfree == 0:
            return net.narrow(self.b, db & FALSE)
        if db == TRUE and nfree == 1:
            return net.narrow(free, TRUE)
        return True

    def check(self, a) -> bool:
        disj = any(a[x] == 1 for x in self.xs)
        if self.half:
            return disj or a[self.b] == 0
        return disj == (a[self.b] == 1)


class CondEqual(Constraint):
    """``(l = j) -> (xs = ys)``, element-wise over two equal-length arrays
    (single variables are accepted as one-element arrays)."""

    def __init__(self, l: int, j: int, xs: Sequence[int] | int, ys: Sequence[int] | int):
        xs = (xs,) if isinstance(xs, int) else tuple(xs)
        ys = (ys,) if isinstance(ys, int) else tuple(ys)
        if len(xs) != len(ys):
            raise ValueError("conditional equality needs arrays of equal length")
        self.l, self.j, self.xs, self.ys = l, j, xs, ys
        self.scope = (l,) + xs + ys

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        dl = dom[self.l]
        bit = 1 << self.j
        if not dl & bit:
            return True
        if dl == bit:
            for x, y in zip(self.xs, self.ys):
                dx, dy = dom[x], dom[y]
                common = dx & dy
                if common != dx and not net.narrow(x, common):
                    return False
                if common != dy and not net.narrow(y, common):
                    return False
            return True
        for x, y in zip(self.xs, self.ys):
            if not dom[x] & dom[y]:
                return net.narrow(self.l, dl & ~bit)
        return True

    def check(self, a) -> bool:
        return a[self.l] != self.j or all(a[x] == a[y] for x, y in zip(self.xs, self.ys))


class Element(Constraint):
    """Array lookup ``value = elems[index]``; index values outside
    ``range(len(elems))`` are unsupported."""

    def __init__(self, index: int, value: int, elems: Sequence[int]):
        self.index, self.value = index, value
        self.elems = tuple(elems)
        self.scope = (index, value) + self.elems

    def propagate(self, net: Network) -> bool:
        dom = net.dom
        di, dv = dom[self.index], dom[self.value]
        elems = self.elems
        ne = len(elems)
        ni = 0
        nv = 0
        for i in vals(di):
            if i < ne:
                m = dom[elems[i]] & dv
                if m:
                    ni |= 1 << i
                    nv |= m
        if ni != di and not net.narrow(self.index, ni):
            return False
        if nv != dv and not net.narrow(self.value, nv):
            return False
        if ni & (ni - 1) == 0:
            e = elems[ni.bit_length() - 1]
            de = dom[e]
            if de & nv != de and not net.narrow(e, de & nv):
                return False
        return True

    def check(self, a) -> bool:
        i = a[self.index]
        return 0 <= i < len(self.elems) and a[self.elems[i]] == a[self.value]
