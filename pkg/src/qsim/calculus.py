"""Binary qualitative calculi: alphabets, converse and composition tables,
conceptual neighbourhood, and the text format they are stored in.

A relation set is passed around as a ``frozenset`` of relation names at the
public surface and as an ``int`` bitmask (bit ``i`` = relation id ``i``)
inside the solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

__all__ = [
    "Calculus",
    "CalculusError",
    "CalculusParseError",
    "CalculusValidationError",
    "Relation",
    "builtin",
    "compose",
    "converse_of",
    "derive_dir_tables",
    "dump_calculus",
    "load_calculus",
    "neighbours",
    "BUILTIN_NAMES",
    "DIR_NAMES",
]

BUILTIN_NAMES = ("rcc8", "dir9", "size3")

# Sign pairs (sgn dx, sgn dy) of "a relative to b" for Q[a,b].
DIR_SIGNS = {
    "north": (0, 1),
    "northeast": (1, 1),
    "east": (1, 0),
    "southeast": (1, -1),
    "south": (0, -1),
    "southwest": (-1, -1),
    "west": (-1, 0),
    "northwest": (-1, 1),
    "samepoint": (0, 0),
}
DIR_NAMES = tuple(DIR_SIGNS)

_RIGID_DROPPED = ("coveredby", "covers", "inside", "contains")


class CalculusError(ValueError):
    pass


class CalculusParseError(CalculusError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CalculusValidationError(CalculusError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class Relation(NamedTuple):
    id: int
    name: str


@dataclass(frozen=True)
class Calculus:
    """An immutable qualitative calculus.

    ``composition`` holds id triples ``(r, s, t)`` meaning that
    ``Q[a,b] = r`` and ``Q[b,c] = s`` admit ``Q[a,c] = t``.
    ``neighbourhood`` holds the non-reflexive directed pairs; persistence
    (``r -> r``) is always admissible and never stored.
    """

    name: str
    names: tuple[str, ...]
    identity: int
    converse: tuple[int, ...]
    composition: frozenset[tuple[int, int, int]]
    neighbourhood: frozenset[tuple[int, int]]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)
    comp_mask: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, hash=False)
    neigh_mask: tuple[int, ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        n = len(self.names)
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.names)})
        table = [[0] * n for _ in range(n)]
        for r, s, t in self.composition:
            table[r][s] |= 1 << t
        object.__setattr__(self, "comp_mask", tuple(tuple(row) for row in table))
        neigh = [1 << r for r in range(n)]
        for r, s in self.neighbourhood:
            neigh[r] |= 1 << s
        object.__setattr__(self, "neigh_mask", tuple(neigh))

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1

    @property
    def relations(self) -> tuple[Relation, ...]:
        return tuple(Relation(i, name) for i, name in enumerate(self.names))

    @property
    def identity_name(self) -> str:
        return self.names[self.identity]

    def id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise CalculusError(f"unknown relation {name!r} in calculus {self.name}") from None

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for name in names:
            m |= 1 << self.id(name)
        return m

    def names_of(self, mask: int) -> frozenset[str]:
        return frozenset(self.names[i] for i in range(len(self.names)) if mask >> i & 1)

    def converse_name(self, name: str) -> str:
        return self.names[self.converse[self.id(name)]]

    def is_neighbour(self, r: str, s: str) -> bool:
        return bool(self.neigh_mask[self.id(r)] >> self.id(s) & 1)

    def composes(self, r: str, s: str, t: str) -> bool:
        return (self.id(r), self.id(s), self.id(t)) in self.composition

    def triangle_closed(self) -> bool:
        """True when the table is closed under every relabelling of the
        three objects, so one comp constraint per unordered object triple
        suffices once converse constraints are posted."""
        conv = self.converse
        return all(
            (conv[r], t, s) in self.composition for r, s, t in self.composition
        )

    def validate(self) -> list[str]:
        """Return one message per violated table law (empty when sound)."""
        out: list[str] = []
        n = len(self.names)
        conv = self.converse
        names = self.names
        for r in range(n):
            if conv[conv[r]] != r:
                out.append(
                    f"converse not an involution: {names[r]} -> {names[conv[r]]} -> {names[conv[conv[r]]]}"
                )
        ident = self.identity
        if conv[ident] != ident:
            out.append(f"converse of identity {names[ident]} is {names[conv[ident]]}")
        for r in range(n):
            if self.comp_mask[ident][r] != 1 << r:
                out.append(
                    f"identity law: <{names[ident]}, {names[r]}, t> admits "
                    f"{sorted(self.names_of(self.comp_mask[ident][r]))}"
                )
            if self.comp_mask[r][ident] != 1 << r:
                out.append(
                    f"identity law: <{names[r]}, {names[ident]}, t> admits "
                    f"{sorted(self.names_of(self.comp_mask[r][ident]))}"
                )
        for r, s, t in sorted(self.composition):
            if (conv[s], conv[r], conv[t]) not in self.composition:
                out.append(
                    f"converse-composition coherence: <{names[r]}, {names[s]}, {names[t]}> present "
                    f"but <{names[conv[s]]}, {names[conv[r]]}, {names[conv[t]]}> missing"
                )
        for r, s in sorted(self.neighbourhood):
            if (s, r) not in self.neighbourhood:
                out.append(f"neighbourhood not symmetric: <{names[r]}, {names[s]}> without converse pair")
        return out


def compose(cal: Calculus, r_set: Iterable[str], s_set: Iterable[str]) -> frozenset[str]:
    out = 0
    for r in r_set:
        row = cal.comp_mask[cal.id(r)]
        for s in s_set:
            out |= row[cal.id(s)]
    return cal.names_of(out)


def converse_of(cal: Calculus, r_set: Iterable[str]) -> frozenset[str]:
    return frozenset(cal.converse_name(r) for r in r_set)


def neighbours(cal: Calculus, r: str) -> frozenset[str]:
    return cal.names_of(cal.neigh_mask[cal.id(r)])


# --------------------------------------------------------------------------
# text format


_SECTIONS = ("CALCULUS", "ALPHABET", "IDENTITY", "CONVERSE", "COMPOSITION", "NEIGHBOURHOOD")


def parse_calculus(text: str, *, rigid_objects: bool = False) -> Calculus:
    """Parse the sectioned text format. Raises CalculusParseError."""
    name = None
    section = None
    alphabet: list[str] = []
    identity = None
    converse: dict[str, str] = {}
    triples: set[tuple[str, str, str]] = set()
    pairs: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] in _SECTIONS:
            section = words[0]
            if section == "CALCULUS":
                if len(words) != 2:
                    raise CalculusParseError("expected 'CALCULUS <name>'", lineno)
                name = words[1]
            elif len(words) != 1:
                raise CalculusParseError(f"unexpected text after {section}", lineno)
            continue
        if section is None or section == "CALCULUS":
            raise CalculusParseError(f"text outside a section: {line!r}", lineno)
        if section == "ALPHABET":
            alphabet.extend(words)
        elif section == "IDENTITY":
            if identity is not None or len(words) != 1:
                raise CalculusParseError("IDENTITY takes exactly one relation", lineno)
            identity = words[0]
        elif section == "CONVERSE":
            if len(words) != 2:
                raise CalculusParseError("converse line must be 'r s'", lineno)
            if words[0] in converse:
                raise CalculusParseError(f"converse of {words[0]} given twice", lineno)
            converse[words[0]] = words[1]
        elif section == "COMPOSITION":
            if len(words) < 3 or words[2] != ":":
                raise CalculusParseError("composition line must be 'r s : t...'", lineno)
            triples.update((words[0], words[1], t) for t in words[3:])
        elif section == "NEIGHBOURHOOD":
            if len(words) != 2:
                raise CalculusParseError("neighbourhood line must be 'r s'", lineno)
            if words[0] != words[1]:
                pairs.add((words[0], words[1]))

    if name is None:
        raise CalculusParseError("missing CALCULUS header")
    if not alphabet:
        raise CalculusParseError("empty ALPHABET")
    if len(set(alphabet)) != len(alphabet):
        raise CalculusParseError("duplicate relation name in ALPHABET")
    if identity is None:
        raise CalculusParseError("missing IDENTITY")
    index = {r: i for i, r in enumerate(alphabet)}

    def rid(r: str) -> int:
        if r not in index:
            raise CalculusParseError(f"unknown relation {r!r}")
        return index[r]

    missing = [r for r in alphabet if r not in converse]
    if missing:
        raise CalculusValidationError([f"converse map is not total: no entry for {r}" for r in missing])
    if rigid_objects:
        dropped = {("equal", r) for r in _RIGID_DROPPED} | {(r, "equal") for r in _RIGID_DROPPED}
        pairs -= dropped
    cal = Calculus(
        name=name,
        names=tuple(alphabet),
        identity=rid(identity),
        converse=tuple(rid(converse[r]) for r in alphabet),
        composition=frozenset((rid(r), rid(s), rid(t)) for r, s, t in triples),
        neighbourhood=frozenset((rid(r), rid(s)) for r, s in pairs),
    )
    return cal


def load_calculus(source: str | Path, *, rigid_objects: bool = False) -> Calculus:
    """Load a calculus from a built-in name, a file path, or document text.

    The result is validated; table-law violations raise
    CalculusValidationError listing every witness.
    """
    source_str = str(source)
    if source_str in BUILTIN_NAMES:
        text = resources.files("qsim.data").joinpath(f"{source_str}.cal").read_text()
    elif "\n" not in source_str and Path(source_str).is_file():
        text = Path(source_str).read_text()
    else:
        text = source_str
    cal = parse_calculus(text, rigid_objects=rigid_objects)
    problems = cal.validate()
    if problems:
        raise CalculusValidationError(problems)
    return cal


@lru_cache(maxsize=None)
def builtin(name: str, rigid_objects: bool = False) -> Calculus:
    if name not in BUILTIN_NAMES:
        raise CalculusError(f"no built-in calculus {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return load_calculus(name, rigid_objects=rigid_objects)


def dump_calculus(cal: Calculus) -> str:
    names = cal.names
    lines = [f"CALCULUS {cal.name}", "", "ALPHABET", " ".join(names), "", "IDENTITY", cal.identity_name, ""]
    lines.append("CONVERSE")
    lines.extend(f"{r} {names[cal.converse[i]]}" for i, r in enumerate(names))
    lines += ["", "COMPOSITION"]
    for r, s in itertools.product(range(cal.size), repeat=2):
        ts = [names[t] for t in range(cal.size) if cal.comp_mask[r][s] >> t & 1]
        if ts:
            lines.append(f"{names[r]} {names[s]} : {' '.join(ts)}")
    lines += ["", "NEIGHBOURHOOD"]
    lines.extend(f"{names[r]} {names[s]}" for r, s in sorted(cal.neighbourhood))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# cardinal directions


def _sign_sum(a: int, b: int) -> tuple[int, ...]:
    if a == 0:
        return (b,)
    if b == 0 or a == b:
        return (a,)
    return (-1, 0, 1)


def derive_dir_tables() -> tuple[frozenset[tuple[str, str, str]], frozenset[tuple[str, str]]]:
    """Composition triples and non-reflexive neighbourhood pairs of the
    nine-relation cardinal-direction calculus, from point semantics.

    Composition: the sign pair of a sum of two planar vectors, axis by axis.
    Neighbourhood: continuous motion of one point about another; the
    reflexive pairs are left implicit like everywhere else.
    """
    by_sign = {v: k for k, v in DIR_SIGNS.items()}
    triples = set()
    for r, (rx, ry) in DIR_SIGNS.items():
        for s, (sx, sy) in DIR_SIGNS.items():
            for tx in _sign_sum(rx, sx):
                for ty in _sign_sum(ry, sy):
                    triples.add((r, s, by_sign[(tx, ty)]))
    pairs = set()
    for d in DIR_NAMES[:-1]:
        pairs.add(("samepoint", d))
        pairs.add((d, "samepoint"))
    ring = DIR_NAMES[:-1]
    for i, d in enumerate(ring):
        for e in (ring[i - 1], ring[(i + 1) % len(ring)]):
            pairs.add((d, e))
    return frozenset(triples), frozenset(pairs)


def dir_calculus() -> Calculus:
    triples, pairs = derive_dir_tables()
    names = DIR_NAMES
    index = {n: i for i, n in enumerate(names)}
    by_sign = {v: k for k, v in DIR_SIGNS.items()}
    converse = tuple(index[by_sign[(-x, -y)]] for x, y in DIR_SIGNS.values())
    return Calculus(
        name="dir9",
        names=names,
        identity=index["samepoint"],
        converse=converse,
        composition=frozenset((index[r], index[s], index[t]) for r, s, t in triples),
        neighbourhood=frozenset((index[r], index[s]) for r, s in pairs),
    )
