"""Formula syntax tree and pretty printer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..calculus import Calculus


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    """``aspect[a, b] in rels``. Before quantifier expansion ``a``/``b`` may
    name bound variables."""

    aspect: str
    a: str
    b: str
    rels: frozenset[str]


@dataclass(frozen=True)
class ObjEq(Formula):
    """Meta-level guard ``a = b`` (or ``a != b`` when ``negated``) between
    object names; folded to a constant during expansion."""

    a: str
    b: str
    negated: bool = False


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Equiv(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple[str, ...]
    domain: str | tuple[str, ...]
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple[str, ...]
    domain: str | tuple[str, ...]
    body: Formula


UNARY = (Not, Next, Eventually, Always)
BINARY = (And, Or, Implies, Equiv, Until)
TEMPORAL = (Next, Eventually, Always, Until)


@dataclass(frozen=True)
class Vocabulary:
    """Names a formula may refer to: aspects with their calculi, objects,
    and named object sets. ``Objects`` always denotes every object."""

    aspects: Mapping[str, Calculus]
    objects: tuple[str, ...]
    sets: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def set_members(self, name: str) -> tuple[str, ...]:
        if name == "Objects" and name not in self.sets:
            return self.objects
        try:
            return self.sets[name]
        except KeyError:
            raise KeyError(f"unknown object set {name!r}") from None

    def has_set(self, name: str) -> bool:
        return name in self.sets or name == "Objects"


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, UNARY):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, (Forall, Exists)):
        return (f.body,)
    return ()


def depth(f: Formula) -> int:
    kids = children(f)
    return 1 + max((depth(c) for c in kids), default=0)


def subformulas(f: Formula) -> set[Formula]:
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g not in out:
            out.add(g)
            stack.extend(children(g))
    return out


def contains(f: Formula, kind: type | tuple[type, ...]) -> bool:
    return any(isinstance(g, kind) for g in subformulas(f))


# --------------------------------------------------------------------------
# pretty printing; precedence levels mirror the parser

_PREC = {Equiv: 1, Implies: 2, Or: 3, Until: 4, And: 5}
_SYM = {Equiv: "<->", Implies: "->", Or: "|", Until: "U", And: "&"}
_UNARY_SYM = {Not: "~", Next: "X ", Eventually: "F ", Always: "G "}


def _relset(rels: frozenset[str]) -> str:
    return "{" + ", ".join(sorted(rels)) + "}"


def pretty(f: Formula, prec: int = 0) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        head = f"{f.aspect}[{f.a},{f.b}]"
        if len(f.rels) == 1:
            return f"{head} = {next(iter(f.rels))}"
        return f"{head} in {_relset(f.rels)}"
    if isinstance(f, ObjEq):
        return f"{f.a} {'!=' if f.negated else '='} {f.b}"
    if isinstance(f, UNARY):
        return _UNARY_SYM[type(f)] + pretty(f.arg, 6)
    if isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        dom = f.domain if isinstance(f.domain, str) else "{" + ", ".join(f.domain) + "}"
        s = f"{kw} {', '.join(f.vars)} in {dom}. {pretty(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    p = _PREC[type(f)]
    if isinstance(f, Implies):
        s = f"{pretty(f.left, p + 1)} -> {pretty(f.right, p)}"
    else:
        s = f"{pretty(f.left, p)} {_SYM[type(f)]} {pretty(f.right, p + 1)}"
    return f"({s})" if prec > p else s
