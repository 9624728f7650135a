"""Simulation problem description shared by the translator, the engine and
the front end."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .calculus import Calculus
from .ltl import Atom, Formula, Vocabulary, contains, subformulas
from .ltl.ast import ObjEq


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    """Cross-aspect background knowledge: for every ordered object pair
    (a, b), the relations ``first[a,b]`` and ``second[a,b]`` must form one of
    ``pairs``."""

    first: str
    second: str
    pairs: frozenset[tuple[str, str]]
    label: str = ""


@dataclass(frozen=True)
class Options:
    translation: str = "unravel"
    heuristic: str = "first-fail"
    k_min: int = 1
    k_max: int = 30
    allow_finite: bool = False
    node_limit: int | None = None
    time_limit: float | None = None
    k_time_limit: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.translation not in ("unravel", "array"):
            raise ProblemError(f"unknown translation {self.translation!r}")
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ProblemError(f"bad bound range k_min={self.k_min}, k_max={self.k_max}")
        if self.translation == "array" and self.allow_finite:
            # the NNF dualities (not X = X not, not G = F not) fail at a path's end
            raise ProblemError("the array translation works on loops only; drop allow_finite")


@dataclass(frozen=True)
class Problem:
    objects: tuple[str, ...]
    aspects: Mapping[str, Calculus]
    formulas: tuple[Formula, ...] = ()
    init: tuple[Atom, ...] = ()
    links: tuple[Link, ...] = ()
    sets: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    options: Options = field(default_factory=Options)
    name: str = ""
    formula_text: tuple[str, ...] = ()

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(self.aspects, self.objects, self.sets)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return [(a, b) for a in self.objects for b in self.objects if a != b]

    def with_options(self, **changes) -> "Problem":
        opts = {**self.options.__dict__, **changes}
        return Problem(self.objects, self.aspects, self.formulas, self.init, self.links, self.sets,
                       Options(**opts), self.name, self.formula_text)

    def check(self) -> None:
        """Raise ProblemError on any reference to an undeclared name."""
        if len(set(self.objects)) != len(self.objects):
            raise ProblemError("duplicate object name")
        if not self.aspects:
            raise ProblemError("a problem needs at least one aspect")
        objs = set(self.objects)
        for name, members in self.sets.items():
            bad = [m for m in members if m not in objs]
            if bad:
                raise ProblemError(f"set {name} names unknown objects {bad}")
        for link in self.links:
            for asp in (link.first, link.second):
                if asp not in self.aspects:
                    raise ProblemError(f"link refers to unknown aspect {asp!r}")
            c1, c2 = self.aspects[link.first], self.aspects[link.second]
            for r, s in link.pairs:
                if r not in c1.names or s not in c2.names:
                    raise ProblemError(f"link pair ({r}, {s}) outside the aspects' alphabets")
        for atom in self.init:
            self._check_atom(atom, bound=())
        for f in self.formulas:
            for g in subformulas(f):
                if isinstance(g, Atom):
                    self._check_atom(g, bound=None)

    def _check_atom(self, atom: Atom, bound) -> None:
        cal = self.aspects.get(atom.aspect)
        if cal is None:
            raise ProblemError(f"unknown aspect {atom.aspect!r}")
        bad = [r for r in atom.rels if r not in cal.names]
        if bad:
            raise ProblemError(f"relations {bad} are not in aspect {atom.aspect}")
        if bound is not None:
            for o in (atom.a, atom.b):
                if o not in self.objects:
                    raise ProblemError(f"unknown object {o!r}")


def has_guards(f: Formula) -> bool:
    return contains(f, ObjEq)
