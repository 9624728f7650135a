"""Stage arrays, loop machinery, and the two translations of temporal
formulas into constraints.

Stages are numbered 1..k as in the lasso; stage k+1 is the placeholder
array that the loop variable ties back to some stage j <= k. The loop
variable takes k+1 to mean "no loop" (finite path) when finite paths are
allowed.

Unravelling translation (``translate_unravel``): every (subformula, stage)
pair gets one fully reified Boolean. F, G and U are unfolded through their
recursive definitions along the path; at stage k the Next rule consults
the loop variable and continues in a "tail" copy of the chain that never
wraps again, which is enough to visit every state reachable from any
start (at least n_unravel steps).

Array translation (``translate_array``): for NNF input. Eventually
introduces a fresh stage-index variable and evaluates its argument at that
index through array lookups; nodes are half-reified (b -> phi), which is
sound and complete for negation-free formulas. Subformulas without
Eventually at a fixed stage reuse the unravelling translation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .calculus import Calculus
from .csp import And as AndC
from .csp import Binary, CondEqual, Element, Member, Network, Ternary
from .csp import Not as NotC
from .csp import Or as OrC
from .ltl import (
    Always,
    And,
    Atom,
    Const,
    Equiv,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Until,
    contains,
    expand_quantifiers,
    to_nnf,
)
from .problem import Problem, ProblemError

Pair = tuple[str, str]

# Branching priority classes (lower is decided first). The search should
# commit early to *when* each temporal obligation is met; neighbourhood
# propagation between the chosen stages then prunes most relation values.
# Under unravelling the "when" lives in the reified formula literals; under
# the array translation it lives in the index variables, and the
# half-reified literals are best left to the end (a literal set to 0 there
# constrains nothing, so branching on it early only multiplies work).
PRIO_FIRST = 0
PRIO_STAGE = 1
PRIO_AUX = 2


def n_unravel(k: int, l_min: int, i: int) -> int:
    """Unfolding steps past state i needed to see every state reachable
    from it, taking the smallest possible loop start."""
    return k - min(l_min, i)


@dataclass(frozen=True)
class Ix:
    """A stage index held in a constraint variable."""

    var: int


@dataclass
class StagePlan:
    problem: Problem
    k: int
    net: Network
    loop: int
    stages: dict[str, list[dict[Pair, int]]]
    identity: dict[str, int]
    cache: dict = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    finite: bool = False
    dummies: dict[str, int] = field(default_factory=dict)
    bool_priority: int = PRIO_FIRST

    def var(self, aspect: str, t: int, a: str, b: str) -> int:
        if a == b:
            return self.identity[aspect]
        return self.stages[aspect][t][(a, b)]

    @property
    def l_min(self) -> int:
        d = self.net.dom[self.loop]
        return (d & -d).bit_length() - 1

    def loop_values(self) -> list[int]:
        return self.net.values(self.loop)


def _comp_table(cal: Calculus) -> list[list[int]]:
    return [list(row) for row in cal.comp_mask]


def build_stages(problem: Problem, k: int, *, allow_finite: bool | None = None) -> StagePlan:
    """Network with stage arrays Q_1..Q_{k+1} for every aspect, integrity
    constraints on stages 1..k, neighbourhood steps t -> t+1 for t <= k,
    link constraints, loop machinery, and the initial-state atoms."""
    if k < 1:
        raise ValueError("k must be at least 1")
    problem.check()
    finite = problem.options.allow_finite if allow_finite is None else allow_finite
    net = Network()
    pairs = problem.pairs
    stages: dict[str, list[dict[Pair, int]]] = {}
    identity: dict[str, int] = {}
    counts = {"conv": 0, "comp": 0, "neighbourhood": 0, "link": 0, "loop": 0, "init": 0}

    for name, cal in problem.aspects.items():
        identity[name] = net.add_var(1 << cal.identity, f"{name}[=]", priority=3, kind=cal.name)
    for t in range(1, k + 2):
        for name, cal in problem.aspects.items():
            layer = stages.setdefault(name, [{}])
            prio = PRIO_STAGE if t <= k else PRIO_AUX
            layer.append({
                (a, b): net.add_var(cal.full_mask, f"{name}[{a},{b},{t}]", priority=prio, kind=cal.name)
                for a, b in pairs
            })
    loop = net.add_var(range(1, k + 2), "l", priority=PRIO_FIRST)
    plan = StagePlan(problem, k, net, loop, stages, identity, counts=counts, finite=finite)

    objs = problem.objects
    for name, cal in problem.aspects.items():
        conv_sup = [1 << cal.converse[r] for r in range(cal.size)]
        neigh = list(cal.neigh_mask)
        table = _comp_table(cal)
        triples = _comp_triples(objs, cal)
        for t in range(1, k + 1):
            q = stages[name][t]
            for a, b in itertools.combinations(objs, 2):
                net.post(Binary(q[(a, b)], q[(b, a)], conv_sup))
                counts["conv"] += 1
            for a, b, c in triples:
                net.post(Ternary(q[(a, b)], q[(b, c)], q[(a, c)], table))
                counts["comp"] += 1
            nxt = stages[name][t + 1]
            for p in pairs:
                net.post(Binary(q[p], nxt[p], neigh))
                counts["neighbourhood"] += 1

    # (l = j) -> Q_j = Q_{k+1}, one array equality per j across all aspects
    for j in range(1, k + 1):
        xs = [stages[name][j][p] for name in problem.aspects for p in pairs]
        ys = [stages[name][k + 1][p] for name in problem.aspects for p in pairs]
        net.post(CondEqual(loop, j, xs, ys))
        counts["loop"] += 1
    if not finite:
        net.restrict(loop, ((1 << (k + 1)) - 1) & ~1)

    for link in problem.links:
        c1, c2 = problem.aspects[link.first], problem.aspects[link.second]
        sup = [0] * c1.size
        for r, s in link.pairs:
            sup[c1.id(r)] |= 1 << c2.id(s)
        for t in range(1, k + 1):
            for p in pairs:
                net.post(Binary(stages[link.first][t][p], stages[link.second][t][p], sup))
                counts["link"] += 1

    for atom in problem.init:
        cal = problem.aspects[atom.aspect]
        v = plan.var(atom.aspect, 1, atom.a, atom.b)
        net.restrict(v, cal.mask(atom.rels))
        counts["init"] += 1
    return plan


def _comp_triples(objs: tuple[str, ...], cal: Calculus) -> list[tuple[str, str, str]]:
    """Ordered triples of distinct objects, one per symmetry class: the
    full relabelling group when the table is closed under it, otherwise
    the reversal (a, b, c) ~ (c, b, a) that converse coherence guarantees."""
    out = []
    if cal.triangle_closed():
        for a, b, c in itertools.combinations(objs, 3):
            out.append((a, b, c))
        return out
    for a, b, c in itertools.permutations(objs, 3):
        if (a, b, c) <= (c, b, a):
            out.append((a, b, c))
    return out


# --------------------------------------------------------------------------
# constraint-level helpers

_IMPLIES = [[2, 2], [1, 2]]            # e = (x -> y), indexed [x][y]
_EQUIV = [[2, 1], [1, 2]]              # e = (x <-> y)
_FORBID_TRUE_FALSE = [3, 2]            # sup for Binary(c, d): c=1 needs d=1


class Translator:
    def __init__(self, plan: StagePlan):
        self.plan = plan
        self.net = plan.net
        self.k = plan.k
        self.cache = plan.cache

    # -- Boolean plumbing --------------------------------------------------

    def new_bool(self, tag: str) -> int:
        self.plan.counts["bool"] = self.plan.counts.get("bool", 0) + 1
        return self.net.add_bool(tag, priority=self.plan.bool_priority)

    def mk_and(self, lits: list[int], tag: str) -> int:
        net = self.net
        out = []
        for x in lits:
            if x == net.false:
                return net.false
            if x != net.true and x not in out:
                out.append(x)
        if not out:
            return net.true
        if len(out) == 1:
            return out[0]
        b = self.new_bool(tag)
        net.post(AndC(b, out))
        return b

    def mk_or(self, lits: list[int], tag: str) -> int:
        net = self.net
        out = []
        for x in lits:
            if x == net.true:
                return net.true
            if x != net.false and x not in out:
                out.append(x)
        if not out:
            return net.false
        if len(out) == 1:
            return out[0]
        b = self.new_bool(tag)
        net.post(OrC(b, out))
        return b

    def imply(self, c: int, d: int) -> None:
        """Post c -> d."""
        net = self.net
        if c == net.false or d == net.true or c == d:
            return
        if c == net.true:
            net.restrict(d, 2)
            return
        if d == net.false:
            net.restrict(c, 1)
            return
        net.post(Binary(c, d, _FORBID_TRUE_FALSE))

    def equate(self, b: int, v: int) -> None:
        net = self.net
        if b == v:
            return
        if b == net.true or b == net.false:
            net.restrict(v, net.dom[b])
            return
        if v == net.true or v == net.false:
            net.restrict(b, net.dom[v])
            return
        net.post(Binary(b, v, [1, 2]))

    def loop_le_k(self) -> int:
        """Literal for "the path loops" (l <= k)."""
        if not self.plan.finite:
            return self.net.true
        key = ("l<=k",)
        if key not in self.cache:
            b = self.new_bool("l<=k")
            self.net.post(Member(b, self.plan.loop, ((1 << (self.k + 1)) - 1) & ~1))
            self.cache[key] = b
        return self.cache[key]

    def next_rule(self, child: Callable[[int], int], tag: str) -> int:
        """Truth of X phi at stage k: false without a loop, otherwise phi at
        the loop start, as a conjunction of (l = j) -> c_j."""
        net = self.net
        parts = [self.loop_le_k()]
        for j in self.plan.loop_values():
            if j > self.k:
                continue
            cj = child(j)
            if cj == net.true:
                continue
            e = self.new_bool(f"{tag}|l={j}")
            tbl = [[0, 0] for _ in range(self.k + 2)]
            for lv in range(self.k + 2):
                for cv in (0, 1):
                    tbl[lv][cv] = 2 if (lv != j or cv == 1) else 1
            net.post(Ternary(self.plan.loop, cj, e, tbl))
            parts.append(e)
        return self.mk_and(parts, tag)

    # -- unravelling translation ------------------------------------------

    def lit(self, f: Formula, i: int) -> int:
        """Fully reified literal b <-> (f holds at stage i)."""
        key = (f, i)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        v = self._lit(f, i)
        self.cache[key] = v
        return v

    def _lit(self, f: Formula, i: int) -> int:
        net = self.net
        if isinstance(f, Const):
            return net.const_bool(f.value)
        if isinstance(f, Atom):
            return self.atom_lit(f, i)
        if isinstance(f, Not):
            c = self.lit(f.arg, i)
            if c == net.true:
                return net.false
            if c == net.false:
                return net.true
            b = self.new_bool(f"~@{i}")
            net.post(NotC(b, c))
            return b
        if isinstance(f, And):
            return self.mk_and([self.lit(g, i) for g in _flatten(f, And)], f"and@{i}")
        if isinstance(f, Or):
            return self.mk_or([self.lit(g, i) for g in _flatten(f, Or)], f"or@{i}")
        if isinstance(f, (Implies, Equiv)):
            x, y = self.lit(f.left, i), self.lit(f.right, i)
            b = self.new_bool(f"{type(f).__name__.lower()}@{i}")
            net.post(Ternary(x, y, b, _IMPLIES if isinstance(f, Implies) else _EQUIV))
            return b
        if isinstance(f, Next):
            if i < self.k:
                return self.lit(f.arg, i + 1)
            return self.next_rule(lambda j: self.lit(f.arg, j), f"X@{i}")
        if isinstance(f, (Eventually, Always, Until)):
            return self.chain(f, i, "main", self.lit)
        raise TypeError(f"cannot translate {type(f).__name__}; expand quantifiers first")

    def atom_lit(self, f: Atom, i: int) -> int:
        net = self.net
        cal = self.plan.problem.aspects[f.aspect]
        m = cal.mask(f.rels)
        if f.a == f.b:
            return net.const_bool(bool(m >> cal.identity & 1))
        if m == 0:
            return net.false
        if m == cal.full_mask:
            return net.true
        x = self.plan.var(f.aspect, i, f.a, f.b)
        b = self.new_bool(f"{f.aspect}[{f.a},{f.b},{i}]")
        net.post(Member(b, x, m))
        return b

    def chain(self, f: Formula, p: int, phase: str, child: Callable[[Formula, int], int]) -> int:
        """Unfold F/G/U at stage p:
        F phi = phi | X F phi,  G phi = phi & X G phi,  a U b = b | (a & X(a U b)).
        In the tail phase the loop has already been taken, so the chain
        closes at stage k with the fixpoint value instead of wrapping."""
        key = ("chain", child.__name__, f, p, phase)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        net = self.net
        k = self.k
        tag = f"{type(f).__name__[0]}{'' if phase == 'main' else '~'}@{p}"
        if p < k:
            nxt = self.chain(f, p + 1, phase, child)
        elif phase == "main" and n_unravel(k, self.plan.l_min, k) > 0:
            nxt = self.next_rule(lambda j: self.chain(f, j, "tail", child), f"{tag}>")
        elif isinstance(f, Always):
            nxt = self.loop_le_k()
        else:
            nxt = net.false
        if isinstance(f, Eventually):
            v = self.mk_or([child(f.arg, p), nxt], tag)
        elif isinstance(f, Always):
            v = self.mk_and([child(f.arg, p), nxt], tag)
        else:
            hold = self.mk_and([child(f.left, p), nxt], tag + "&")
            v = self.mk_or([child(f.right, p), hold], tag)
        self.cache[key] = v
        return v

    # -- array translation ---------------------------------------------------

    def alit(self, f: Formula, i: int | Ix) -> int:
        """Literal c with c -> (f holds at index i); f must be in NNF."""
        if isinstance(i, int) and not contains(f, Eventually):
            return self.lit(f, i)
        key = ("arr", f, i)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        v = self._alit(f, i)
        self.cache[key] = v
        return v

    def _alit(self, f: Formula, i: int | Ix) -> int:
        net = self.net
        k = self.k
        if isinstance(f, Const):
            return net.const_bool(f.value)
        if isinstance(f, Atom):
            return self.lookup_lit(f, i)
        if isinstance(f, And):
            return self.mk_and([self.alit(g, i) for g in _flatten(f, And)], f"and@{i}")
        if isinstance(f, Or):
            lits = [self.alit(g, i) for g in _flatten(f, Or)]
            if any(x == net.true for x in lits):
                return net.true
            lits = [x for x in lits if x != net.false]
            if not lits:
                return net.false
            if len(lits) == 1:
                return lits[0]
            b = self.new_bool(f"or@{i}")
            net.post(OrC(b, lits, half=True))
            return b
        if isinstance(f, Next):
            if isinstance(i, int):
                if i < k:
                    return self.alit(f.arg, i + 1)
                return self.next_rule(lambda j: self.alit(f.arg, j), f"X@{i}")
            n = self.index_var(f"next({net.names[i.var]})", low=0)
            net.post(Ternary.from_tuples(i.var, self.plan.loop, n.var, self._next_tuples()))
            sub = self.alit(f.arg, n)
            b = self.new_bool(f"X@{net.names[i.var]}")
            every = (1 << (k + 1)) - 1
            net.post(Binary(b, n.var, [every, every & ~1]))   # b = 1 needs n != 0
            self.imply(b, sub)
            return b
        if isinstance(f, Eventually):
            j = self.index_var("j", low=1)
            if isinstance(i, int):
                sup = [0] * (k + 2)
                for lv in range(1, k + 2):
                    first = min(lv, i)
                    sup[lv] = ((1 << (k + 1)) - 1) & ~((1 << first) - 1)
                net.post(Binary(self.plan.loop, j.var, sup))
            else:
                net.post(Ternary.from_tuples(i.var, self.plan.loop, j.var, self._reach_tuples()))
            return self.alit(f.arg, j)
        if isinstance(f, (Always, Until)):
            if isinstance(i, int):
                return self.chain(f, i, "main", self.alit)
            b = self.new_bool(f"{type(f).__name__[0]}@{net.names[i.var]}")
            for p in net.values(i.var):
                if p == 0:
                    continue
                cp = self.alit(f, p)
                if cp == net.true:
                    continue
                # table over (b, i) -> cp: b = 1 and i = p need cp = 1
                tbl = [[3] * (k + 1), [2 if iv == p else 3 for iv in range(k + 1)]]
                net.post(Ternary(b, i.var, cp, tbl))
            return b
        raise TypeError(f"array translation needs NNF input, got {type(f).__name__}")

    def index_var(self, tag: str, low: int) -> Ix:
        self.plan.counts["index"] = self.plan.counts.get("index", 0) + 1
        return Ix(self.net.add_var(range(low, self.k + 1), tag, priority=PRIO_FIRST))

    def lookup_lit(self, f: Atom, i: int | Ix) -> int:
        net = self.net
        cal = self.plan.problem.aspects[f.aspect]
        m = cal.mask(f.rels)
        if f.a == f.b:
            return net.const_bool(bool(m >> cal.identity & 1))
        if m == 0:
            return net.false
        if m == cal.full_mask:
            return net.true
        if isinstance(i, int):
            return self.atom_lit(f, i)
        dummy = self.plan.dummies.get(f.aspect)
        if dummy is None:
            dummy = self.plan.dummies[f.aspect] = net.add_var(cal.full_mask, f"{f.aspect}[*]", priority=3)
        elems = [dummy] + [self.plan.var(f.aspect, t, f.a, f.b) for t in range(1, self.k + 1)]
        x = net.add_var(cal.full_mask, f"{f.aspect}[{f.a},{f.b},{net.names[i.var]}]",
                        priority=PRIO_AUX)
        net.post(Element(i.var, x, elems))
        b = self.new_bool(f"{f.aspect}[{f.a},{f.b},{net.names[i.var]}]")
        net.post(Member(b, x, m, half=True))
        return b

    def _next_tuples(self):
        k = self.k
        out = []
        for lv in range(1, k + 2):
            out.append((0, lv, 0))
            for iv in range(1, k):
                out.append((iv, lv, iv + 1))
            out.append((k, lv, lv if lv <= k else 0))
        return out

    def _reach_tuples(self):
        k = self.k
        out = []
        for lv in range(1, k + 2):
            for jv in range(1, k + 1):
                out.append((0, lv, jv))
                for iv in range(1, k + 1):
                    if jv >= min(lv, iv):
                        out.append((iv, lv, jv))
        return out


def _flatten(f: Formula, kind: type) -> list[Formula]:
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, kind):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def _translator(plan: StagePlan) -> Translator:
    t = plan.cache.get(("translator",))
    if t is None:
        t = plan.cache[("translator",)] = Translator(plan)
    return t


def translate_unravel(f: Formula, i: int, b: int, plan: StagePlan) -> int:
    """Post constraints making Boolean ``b`` the truth of ``f`` at stage i.
    Returns the literal the formula was compiled to."""
    if not 1 <= i <= plan.k:
        raise ValueError(f"stage {i} outside 1..{plan.k}")
    tr = _translator(plan)
    v = tr.lit(f, i)
    tr.equate(b, v)
    return v


def translate_array(f: Formula, i: int | Ix, b: int, plan: StagePlan) -> int:
    """Post constraints under which ``b = 1`` forces ``f`` (in NNF) at
    index i. With ``b`` fixed true this has the same solutions, projected
    on the stage arrays and loop variable, as the unravelling."""
    if plan.finite:
        raise ProblemError("the array translation works on loops only")
    plan.bool_priority = PRIO_AUX
    tr = _translator(plan)
    v = tr.alit(f, i)
    tr.imply(b, v)
    return v


def prepare(f: Formula, problem: Problem) -> Formula:
    """Expand quantifiers, and put into NNF for the array translation."""
    g = expand_quantifiers(f, problem.vocabulary)
    if problem.options.translation == "array":
        g = to_nnf(g, problem.vocabulary)
    return g


def translate_problem(problem: Problem, k: int) -> StagePlan:
    """Stages plus every temporal formula asserted at stage 1."""
    plan = build_stages(problem, k)
    net = plan.net
    for f in problem.formulas:
        g = prepare(f, problem)
        if problem.options.translation == "array":
            translate_array(g, 1, net.true, plan)
        else:
            translate_unravel(g, 1, net.true, plan)
    return plan
