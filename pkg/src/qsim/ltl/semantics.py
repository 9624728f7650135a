"""Quantifier expansion, negation normal form, and evaluation on lasso
paths."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .ast import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Const,
    Equiv,
    Eventually,
    Exists,
    Forall,
    Formula,
    Implies,
    Next,
    Not,
    ObjEq,
    Or,
    Until,
    Vocabulary,
)

State = Mapping[str, Mapping[tuple[str, str], str]]


# --------------------------------------------------------------------------
# propositional simplification of constants (never through temporal
# operators: on a finite path "X true" is false at the last state)


def mk_not(a: Formula) -> Formula:
    if isinstance(a, Const):
        return Const(not a.value)
    return Not(a)


def mk_and(a: Formula, b: Formula) -> Formula:
    if a == FALSE or b == FALSE:
        return FALSE
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return And(a, b)


def mk_or(a: Formula, b: Formula) -> Formula:
    if a == TRUE or b == TRUE:
        return TRUE
    if a == FALSE:
        return b
    if b == FALSE:
        return a
    return Or(a, b)


def mk_implies(a: Formula, b: Formula) -> Formula:
    if a == FALSE or b == TRUE:
        return TRUE
    if a == TRUE:
        return b
    if b == FALSE:
        return mk_not(a)
    return Implies(a, b)


def mk_equiv(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Const):
        return b if a.value else mk_not(b)
    if isinstance(b, Const):
        return a if b.value else mk_not(a)
    return Equiv(a, b)


def conjoin(parts: Sequence[Formula]) -> Formula:
    out: Formula = TRUE
    for p in parts:
        out = mk_and(out, p)
    return out


def disjoin(parts: Sequence[Formula]) -> Formula:
    out: Formula = FALSE
    for p in parts:
        out = mk_or(out, p)
    return out


# --------------------------------------------------------------------------


def expand_quantifiers(f: Formula, universe: Vocabulary | Mapping[str, Sequence[str]],
                       env: Mapping[str, str] | None = None) -> Formula:
    """Replace bounded quantifiers by finite conjunctions/disjunctions and
    fold object guards to constants."""
    env = dict(env or {})

    def members(domain) -> Sequence[str]:
        if not isinstance(domain, str):
            return domain
        if isinstance(universe, Vocabulary):
            return universe.set_members(domain)
        return universe[domain]

    def sub(name: str) -> str:
        return env.get(name, name)

    def go(g: Formula) -> Formula:
        if isinstance(g, Const):
            return g
        if isinstance(g, Atom):
            return Atom(g.aspect, sub(g.a), sub(g.b), g.rels)
        if isinstance(g, ObjEq):
            same = sub(g.a) == sub(g.b)
            return Const(same != g.negated)
        if isinstance(g, (Forall, Exists)):
            parts = []
            saved = {v: env.get(v) for v in g.vars}
            for combo in itertools.product(members(g.domain), repeat=len(g.vars)):
                env.update(zip(g.vars, combo))
                parts.append(go(g.body))
            for v, old in saved.items():
                if old is None:
                    env.pop(v, None)
                else:
                    env[v] = old
            return conjoin(parts) if isinstance(g, Forall) else disjoin(parts)
        if isinstance(g, Not):
            return mk_not(go(g.arg))
        if isinstance(g, And):
            return mk_and(go(g.left), go(g.right))
        if isinstance(g, Or):
            return mk_or(go(g.left), go(g.right))
        if isinstance(g, Implies):
            return mk_implies(go(g.left), go(g.right))
        if isinstance(g, Equiv):
            return mk_equiv(go(g.left), go(g.right))
        if isinstance(g, Next):
            return Next(go(g.arg))
        if isinstance(g, Eventually):
            return Eventually(go(g.arg))
        if isinstance(g, Always):
            return Always(go(g.arg))
        if isinstance(g, Until):
            return Until(go(g.left), go(g.right))
        raise TypeError(f"unexpected node {g!r}")

    return go(f)


def to_nnf(f: Formula, alphabets: Mapping[str, Sequence[str]] | Vocabulary) -> Formula:
    """Negation normal form over {atom, const, and, or, X, F, G, U}.

    Negated atoms become atoms over the complementary relation set, which
    is why the aspect alphabets are needed. A negated until is rewritten
    with its weak-until dual, ``~(a U b) = (~b U (~a & ~b)) | G ~b``.
    The dualities assume infinite paths.
    """
    if isinstance(alphabets, Vocabulary):
        alphabets = {name: cal.names for name, cal in alphabets.aspects.items()}

    def pos(g: Formula) -> Formula:
        if isinstance(g, (Const, Atom)):
            return g
        if isinstance(g, Not):
            return neg(g.arg)
        if isinstance(g, And):
            return mk_and(pos(g.left), pos(g.right))
        if isinstance(g, Or):
            return mk_or(pos(g.left), pos(g.right))
        if isinstance(g, Implies):
            return mk_or(neg(g.left), pos(g.right))
        if isinstance(g, Equiv):
            return mk_or(mk_and(pos(g.left), pos(g.right)), mk_and(neg(g.left), neg(g.right)))
        if isinstance(g, Next):
            return Next(pos(g.arg))
        if isinstance(g, Eventually):
            return Eventually(pos(g.arg))
        if isinstance(g, Always):
            return Always(pos(g.arg))
        if isinstance(g, Until):
            return Until(pos(g.left), pos(g.right))
        raise TypeError(f"to_nnf needs a quantifier-free formula, got {type(g).__name__}")

    def neg(g: Formula) -> Formula:
        if isinstance(g, Const):
            return Const(not g.value)
        if isinstance(g, Atom):
            return Atom(g.aspect, g.a, g.b, frozenset(alphabets[g.aspect]) - g.rels)
        if isinstance(g, Not):
            return pos(g.arg)
        if isinstance(g, And):
            return mk_or(neg(g.left), neg(g.right))
        if isinstance(g, Or):
            return mk_and(neg(g.left), neg(g.right))
        if isinstance(g, Implies):
            return mk_and(pos(g.left), neg(g.right))
        if isinstance(g, Equiv):
            return mk_or(mk_and(pos(g.left), neg(g.right)), mk_and(neg(g.left), pos(g.right)))
        if isinstance(g, Next):
            return Next(neg(g.arg))
        if isinstance(g, Eventually):
            return Always(neg(g.arg))
        if isinstance(g, Always):
            return Eventually(neg(g.arg))
        if isinstance(g, Until):
            nl, nr = neg(g.left), neg(g.right)
            return mk_or(Until(nr, mk_and(nl, nr)), Always(nr))
        raise TypeError(f"to_nnf needs a quantifier-free formula, got {type(g).__name__}")

    return pos(f)


def is_nnf(f: Formula) -> bool:
    if isinstance(f, (Const, Atom)):
        return True
    if isinstance(f, (And, Or, Until)):
        return is_nnf(f.left) and is_nnf(f.right)
    if isinstance(f, (Next, Eventually, Always)):
        return is_nnf(f.arg)
    return False


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LassoPath:
    """States Q_1..Q_k; ``loop_start`` is the 1-based loop state l, or None
    for a finite path. The infinite path is Q_1..Q_{l-1} (Q_l..Q_k)^w."""

    states: tuple[State, ...]
    loop_start: int | None

    def __post_init__(self) -> None:
        if not self.states:
            raise ValueError("a path needs at least one state")
        if self.loop_start is not None and not 1 <= self.loop_start <= len(self.states):
            raise ValueError(f"loop start {self.loop_start} outside 1..{len(self.states)}")

    @property
    def k(self) -> int:
        return len(self.states)

    def successor(self, i: int) -> int | None:
        if i < self.k:
            return i + 1
        return self.loop_start

    def relation(self, i: int, aspect: str, a: str, b: str) -> str:
        return self.states[i - 1][aspect][(a, b)]


class _Evaluator:
    def __init__(self, path: LassoPath):
        self.path = path
        self.memo: dict[tuple[Formula, int], bool] = {}
        self.pending: dict[tuple[Formula, int], int] = {}

    def eval(self, f: Formula, i: int) -> tuple[bool, int]:
        """Value of f at i, plus the lowest stack depth of a pending
        assumption the value relied on (a large number when none)."""
        key = (f, i)
        hit = self.memo.get(key)
        if hit is not None:
            return hit, _NONE
        path = self.path
        if isinstance(f, Const):
            return f.value, _NONE
        if isinstance(f, Atom):
            v = path.relation(i, f.aspect, f.a, f.b) in f.rels
            self.memo[key] = v
            return v, _NONE
        if isinstance(f, Not):
            v, low = self.eval(f.arg, i)
            return self._done(key, not v, low, None)
        if isinstance(f, And):
            v, low = self.eval(f.left, i)
            if v:
                v, low2 = self.eval(f.right, i)
                low = min(low, low2)
            return self._done(key, v, low, None)
        if isinstance(f, Or):
            v, low = self.eval(f.left, i)
            if not v:
                v, low2 = self.eval(f.right, i)
                low = min(low, low2)
            return self._done(key, v, low, None)
        if isinstance(f, Implies):
            v, low = self.eval(f.left, i)
            if v:
                v, low2 = self.eval(f.right, i)
                low = min(low, low2)
            else:
                v = True
            return self._done(key, v, low, None)
        if isinstance(f, Equiv):
            a, low = self.eval(f.left, i)
            b, low2 = self.eval(f.right, i)
            return self._done(key, a == b, min(low, low2), None)
        if isinstance(f, Next):
            j = path.successor(i)
            if j is None:
                return self._done(key, False, _NONE, None)
            v, low = self.eval(f.arg, j)
            return self._done(key, v, low, None)
        if isinstance(f, (Always, Eventually, Until)):
            if key in self.pending:
                # re-entered on the loop: greatest fixpoint for G, least for F/U
                depth = self.pending[key]
                return isinstance(f, Always), depth
            depth = len(self.pending)
            self.pending[key] = depth
            try:
                v, low = self._unfold(f, i)
            finally:
                del self.pending[key]
            return self._done(key, v, low, depth)
        raise TypeError(f"cannot evaluate {type(f).__name__}; expand quantifiers first")

    def _unfold(self, f: Formula, i: int) -> tuple[bool, int]:
        j = self.path.successor(i)
        if isinstance(f, Always):
            v, low = self.eval(f.arg, i)
            if not v:
                return False, low
            if j is None:
                return False, low
            w, low2 = self.eval(f, j)
            return w, min(low, low2)
        if isinstance(f, Eventually):
            v, low = self.eval(f.arg, i)
            if v:
                return True, low
            if j is None:
                return False, low
            w, low2 = self.eval(f, j)
            return w, min(low, low2)
        v, low = self.eval(f.right, i)
        if v:
            return True, low
        c, low2 = self.eval(f.left, i)
        low = min(low, low2)
        if not c or j is None:
            return False, low
        w, low3 = self.eval(f, j)
        return w, min(low, low3)

    def _done(self, key, value: bool, low: int, own_depth: int | None) -> tuple[bool, int]:
        # A value that leaned on an assumption still pending above this
        # frame is provisional: return it, but do not remember it.
        if own_depth is not None and low >= own_depth:
            low = _NONE
        if low == _NONE:
            self.memo[key] = value
        return value, low


_NONE = 1 << 30


def evaluate_on_lasso(f: Formula, path: LassoPath, i: int = 1) -> bool:
    """Truth of a quantifier-free formula at state ``i`` (1-based) of the
    path, by the recursive unfolding of the temporal operators."""
    if not 1 <= i <= path.k:
        raise IndexError(f"state index {i} outside 1..{path.k}")
    return _Evaluator(path).eval(f, i)[0]


class PathEvaluator:
    """Reusable evaluator for many formulas on one path."""

    def __init__(self, path: LassoPath):
        self._ev = _Evaluator(path)
        self.path = path

    def __call__(self, f: Formula, i: int = 1) -> bool:
        if not 1 <= i <= self.path.k:
            raise IndexError(f"state index {i} outside 1..{self.path.k}")
        return self._ev.eval(f, i)[0]
