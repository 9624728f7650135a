"""Simulation driver: iterative deepening over the bound k, trace
extraction, and a solver-independent trace checker."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .csp import BudgetExceeded, FirstFail, SearchStats, SubclassSplit, load_subclass_family, solve
from .ltl import LassoPath, PathEvaluator, expand_quantifiers, pretty
from .problem import Problem, ProblemError
from .translate import StagePlan, translate_problem

State = Mapping[str, Mapping[tuple[str, str], str]]


@dataclass(frozen=True)
class SimulationTrace:
    """A lasso found by the solver: states Q_1..Q_k (every ordered pair,
    diagonal included, per aspect) and the loop start, or None for a
    finite path."""

    k: int
    loop_start: int | None
    states: tuple[State, ...]
    stats: Mapping[str, object] = field(default_factory=dict, compare=False)

    def path(self) -> LassoPath:
        return LassoPath(self.states, self.loop_start)

    def relation(self, t: int, aspect: str, a: str, b: str) -> str:
        return self.states[t - 1][aspect][(a, b)]


@dataclass(frozen=True)
class Unsat:
    """No lasso with k_min <= k <= k_max exists. Says nothing about longer
    bounds."""

    k_max: int
    stats: Mapping[str, object] = field(default_factory=dict, compare=False)


class SimulationBudgetExceeded(RuntimeError):
    def __init__(self, k: int, what: str, stats: Mapping[str, object]):
        self.k, self.what, self.stats = k, what, stats
        super().__init__(f"{what} budget exceeded at k={k}")


# --------------------------------------------------------------------------
# search strategy


def make_strategy(problem: Problem):
    spec = problem.options.heuristic
    if spec == "first-fail":
        return FirstFail(seed=problem.options.seed)
    if spec.startswith("subclass:"):
        path = spec.split(":", 1)[1]
        calculi = {cal.name: cal for cal in problem.aspects.values()}
        try:
            families = load_subclass_family(path, calculi)
        except OSError as exc:
            raise ProblemError(f"cannot read subclass family {path}: {exc.strerror}") from None
        except ValueError as exc:
            raise ProblemError(str(exc)) from None
        return SubclassSplit(families, seed=problem.options.seed)
    raise ProblemError(f"unknown heuristic {spec!r}; use first-fail or subclass:FILE")


def bundled_family(name: str) -> Path:
    return Path(__file__).with_name("data") / name


# --------------------------------------------------------------------------


def extract_trace(plan: StagePlan, assignment: list[int], stats: Mapping[str, object]) -> SimulationTrace:
    problem = plan.problem
    loop = assignment[plan.loop]
    states = []
    for t in range(1, plan.k + 1):
        state = {}
        for name, cal in problem.aspects.items():
            rels = {(a, b): cal.names[assignment[plan.var(name, t, a, b)]]
                    for a in problem.objects for b in problem.objects}
            state[name] = rels
        states.append(state)
    return SimulationTrace(plan.k, loop if loop <= plan.k else None, tuple(states), dict(stats))


def simulate(problem: Problem) -> SimulationTrace | Unsat:
    """Try k = k_min, k_min + 1, ... and return the first verified lasso.

    Raises SimulationBudgetExceeded when the node or time budget runs out
    before a verdict for some k is reached."""
    problem.check()
    opts = problem.options
    strategy = make_strategy(problem)
    total = SearchStats()
    per_k: list[dict[str, object]] = []
    start = time.perf_counter()
    for k in range(opts.k_min, opts.k_max + 1):
        t0 = time.perf_counter()
        plan = translate_problem(problem, k)
        build = time.perf_counter() - t0
        stats = SearchStats()
        limit = _time_left(opts.time_limit, start)
        if opts.k_time_limit is not None:
            limit = opts.k_time_limit if limit is None else min(limit, opts.k_time_limit)
        nodes_left = None if opts.node_limit is None else opts.node_limit - total.nodes
        try:
            if limit is not None and limit <= 0:
                raise BudgetExceeded("time", stats)
            solution = solve(plan.net, strategy, node_limit=nodes_left, time_limit=limit, stats=stats)
        except BudgetExceeded as exc:
            _accumulate(total, stats)
            per_k.append(_k_record(k, plan, stats, build, "budget"))
            raise SimulationBudgetExceeded(k, exc.what, _summary(total, per_k, start)) from None
        _accumulate(total, stats)
        per_k.append(_k_record(k, plan, stats, build, "sat" if solution else "unsat"))
        if solution is not None:
            trace = extract_trace(plan, solution, _summary(total, per_k, start))
            verdict = verify_trace(problem, trace)
            if not verdict.passed:
                raise AssertionError("solver returned a trace that fails verification:\n"
                                     + verdict.report())
            return trace
    return Unsat(opts.k_max, _summary(total, per_k, start))


def _time_left(limit: float | None, start: float) -> float | None:
    return None if limit is None else limit - (time.perf_counter() - start)


def _accumulate(total: SearchStats, s: SearchStats) -> None:
    total.nodes += s.nodes
    total.failures += s.failures
    total.seconds += s.seconds


def _k_record(k: int, plan: StagePlan, s: SearchStats, build: float, verdict: str) -> dict[str, object]:
    return {"k": k, "verdict": verdict, "nodes": s.nodes, "failures": s.failures,
            "solve_seconds": round(s.seconds, 3), "build_seconds": round(build, 3),
            "variables": len(plan.net), "constraints": len(plan.net.constraints)}


def _summary(total: SearchStats, per_k: list, start: float) -> dict[str, object]:
    return {"nodes": total.nodes, "failures": total.failures,
            "seconds": round(time.perf_counter() - start, 3), "per_k": list(per_k)}


# --------------------------------------------------------------------------
# independent checking


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.ok)

    def report(self) -> str:
        lines = []
        for c in self.checks:
            mark = "ok  " if c.ok else "FAIL"
            lines.append(f"{mark} {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def verify_trace(problem: Problem, trace: SimulationTrace) -> Verdict:
    """Check a trace against the problem without using the solver: shape,
    identity, converses, composition, neighbourhood steps including the
    wrap from Q_k to Q_l, links, initial atoms, and every formula at
    position 1 through the lasso evaluator. Every failing check is listed
    with a witness."""
    checks: list[Check] = []
    objs = problem.objects
    k = trace.k

    def fail(name: str, detail: str) -> None:
        checks.append(Check(name, False, detail))

    # shape -----------------------------------------------------------------
    shape_ok = k == len(trace.states) and k >= 1
    for t, state in enumerate(trace.states, 1):
        for name, cal in problem.aspects.items():
            rels = state.get(name)
            if rels is None:
                fail("shape", f"state {t} lacks aspect {name}")
                shape_ok = False
                continue
            for a in objs:
                for b in objs:
                    r = rels.get((a, b))
                    if r is None and a == b:
                        continue
                    if r not in cal.names:
                        fail("shape", f"state {t}: {name}[{a},{b}] = {r!r} is not a relation")
                        shape_ok = False
    if not shape_ok:
        return Verdict(tuple(checks) or (Check("shape", False, "malformed trace"),))
    checks.append(Check("shape", True))

    def rel(t: int, name: str, a: str, b: str) -> str:
        if a == b:
            got = trace.states[t - 1][name].get((a, b))
            return got if got is not None else problem.aspects[name].identity_name
        return trace.states[t - 1][name][(a, b)]

    # loop --------------------------------------------------------------------
    l = trace.loop_start
    if l is None:
        if problem.options.allow_finite:
            checks.append(Check("loop", True, "finite path"))
        else:
            fail("loop", "finite path but the problem requires a loop")
    elif 1 <= l <= k:
        checks.append(Check("loop", True, f"{l}..{k}"))
    else:
        fail("loop", f"loop start {l} outside 1..{k}")
        l = None

    # integrity ---------------------------------------------------------------
    for name, cal in problem.aspects.items():
        ident = cal.identity_name
        bad = [f"state {t}: {name}[{a},{a}] = {rel(t, name, a, a)}"
               for t in range(1, k + 1) for a in objs if rel(t, name, a, a) != ident]
        checks.append(Check(f"identity {name}", not bad, "; ".join(bad[:3])))

        bad = []
        for t in range(1, k + 1):
            for a, b in itertools.combinations(objs, 2):
                r, s = rel(t, name, a, b), rel(t, name, b, a)
                if cal.converse_name(r) != s:
                    bad.append(f"state {t}: {name}[{a},{b}] = {r} but {name}[{b},{a}] = {s}")
        checks.append(Check(f"converse {name}", not bad, "; ".join(bad[:3])))

        bad = []
        for t in range(1, k + 1):
            for a, b, c in itertools.permutations(objs, 3):
                r, s, u = rel(t, name, a, b), rel(t, name, b, c), rel(t, name, a, c)
                if not cal.composes(r, s, u):
                    bad.append(f"state {t}: ({r}, {s}, {u}) on {a},{b},{c} is not in the table")
        checks.append(Check(f"composition {name}", not bad, "; ".join(bad[:3])))

        steps = [(t, t + 1) for t in range(1, k)]
        if l is not None:
            steps.append((k, l))
        bad = []
        for t, u in steps:
            for a in objs:
                for b in objs:
                    if a == b:
                        continue
                    r, s = rel(t, name, a, b), rel(u, name, a, b)
                    if not cal.is_neighbour(r, s):
                        bad.append(f"{name}[{a},{b}] jumps {r} -> {s} from state {t} to {u}")
        checks.append(Check(f"neighbourhood {name}", not bad, "; ".join(bad[:3])))

    for link in problem.links:
        bad = []
        for t in range(1, k + 1):
            for a in objs:
                for b in objs:
                    pair = (rel(t, link.first, a, b), rel(t, link.second, a, b))
                    if pair not in link.pairs:
                        bad.append(f"state {t}: ({a},{b}) has {link.first} {pair[0]}, "
                                   f"{link.second} {pair[1]}")
        label = link.label or f"{link.first}/{link.second}"
        checks.append(Check(f"link {label}", not bad, "; ".join(bad[:3])))

    for atom in problem.init:
        r = rel(1, atom.aspect, atom.a, atom.b)
        checks.append(Check(f"init {pretty(atom)}", r in atom.rels, "" if r in atom.rels else f"found {r}"))

    # formulas ----------------------------------------------------------------
    if l is not None or problem.options.allow_finite:
        full = tuple({name: {(a, b): rel(t, name, a, b) for a in objs for b in objs}
                      for name in problem.aspects} for t in range(1, k + 1))
        evaluate = PathEvaluator(LassoPath(full, l))
        for n, f in enumerate(problem.formulas, 1):
            text = problem.formula_text[n - 1] if n <= len(problem.formula_text) else pretty(f)
            ok = evaluate(expand_quantifiers(f, problem.vocabulary), 1)
            checks.append(Check(f"formula {n}", ok, "" if ok else f"violated: {text.strip()}"))
    return Verdict(tuple(checks))
