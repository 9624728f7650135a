"""Problem specification documents.

A document is a sequence of sections. A section starts with a header line
``[name]``; its body is a list of entries. An entry starts on a line
beginning in column 1 and continues over the following indented lines,
so long formulas can be wrapped. ``#`` starts a comment.

Sections::

    [problem]   name
    [objects]   object names, separated by spaces or commas
    [sets]      Name = member member ...
    [aspects]   Name = calculus      (built-in name or a path relative to the
                                      document; suffix "rigid" drops the
                                      equal<->proper-part neighbour pairs)
    [links]     First Second : formula over First[a,b] and Second[a,b]
                First Second : builtin_link_name
    [init]      atom                 (stage-1 restriction)
    [formulas]  temporal formula     (must hold at position 1)
    [options]   key = value          (k_min, k_max, translation, heuristic,
                                      allow_finite_path, node_limit,
                                      time_limit, k_time_limit, seed)

Formulas use the grammar of :mod:`qsim.ltl.parser`. A link formula
mentions only the placeholder objects ``a`` and ``b`` and no temporal
operators; it is compiled to the table of relation pairs satisfying it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .calculus import BUILTIN_NAMES, Calculus, CalculusError, load_calculus
from .ltl import Atom, Formula, FormulaSyntaxError, Vocabulary, parse
from .ltl.ast import TEMPORAL, Const, Equiv, Implies, Not, ObjEq, children, subformulas
from .ltl.ast import And, Or
from .problem import Link, Options, Problem, ProblemError

SECTIONS = ("problem", "objects", "sets", "aspects", "links", "init", "formulas", "options")
BUNDLED_SPECS = ("navigation", "two_ships", "juggling", "juggling_dir")

# named links: (first calculus, second calculus, formula over aspects A and B)
BUILTIN_LINKS = {
    "equal_samepoint": ("rcc8", "dir9", "A[a,b] = equal <-> B[a,b] = samepoint"),
}

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


class SpecError(ValueError):
    def __init__(self, message: str, source: str = "<spec>", line: int = 0, column: int = 0):
        self.source, self.line, self.column = source, line, column
        where = f"{source}:{line}:{column}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Entry:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SpecDocument:
    source: str
    sections: dict[str, tuple[Entry, ...]]


def split_sections(text: str, source: str = "<spec>") -> SpecDocument:
    sections: dict[str, list[Entry]] = {}
    current: list[Entry] | None = None
    buf: list[str] = []
    start = (0, 0)

    def flush() -> None:
        if buf and current is not None:
            current.append(Entry("\n".join(buf), *start))
        buf.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", line.strip())
        if m and not raw[:1].isspace():
            flush()
            name = m.group(1)
            if name not in SECTIONS:
                raise SpecError(f"unknown section [{name}]; expected one of {', '.join(SECTIONS)}",
                                source, lineno, 1)
            if name in sections:
                raise SpecError(f"section [{name}] appears twice", source, lineno, 1)
            current = sections[name] = []
            continue
        if current is None:
            raise SpecError("text before the first section header", source, lineno, 1)
        if raw[:1].isspace() and buf:
            buf.append(line)
            continue
        flush()
        indent = len(line) - len(line.lstrip())
        start = (lineno, indent + 1)
        buf.append(line)
    flush()
    return SpecDocument(source, {k: tuple(v) for k, v in sections.items()})


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


# --------------------------------------------------------------------------


def load_spec(path: str | Path) -> Problem:
    """Read a spec file, or a bundled spec by name (``navigation``, ...)."""
    p = Path(path)
    name = str(path)
    if not p.exists() and name in BUNDLED_SPECS:
        text = resources.files("qsim.specs").joinpath(f"{name}.qs").read_text()
        return parse_spec(text, source=f"{name}.qs", base=None)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise SpecError(f"file not found: {name}", name) from None
    except OSError as exc:
        raise SpecError(f"cannot read {name}: {exc.strerror}", name) from None
    return parse_spec(text, source=name, base=p.parent)


def bundled_spec_text(name: str) -> str:
    return resources.files("qsim.specs").joinpath(f"{name}.qs").read_text()


def parse_spec(text: str, source: str = "<spec>", base: Path | None = None) -> Problem:
    doc = split_sections(text, source)
    sec = doc.sections

    def err(msg: str, e: Entry, col: int | None = None) -> SpecError:
        return SpecError(msg, source, e.line, e.column if col is None else col)

    name = " ".join(e.text.strip() for e in sec.get("problem", ()))

    objects: list[str] = []
    for e in sec.get("objects", ()):
        for word in re.split(r"[\s,]+", e.text.strip()):
            if not _NAME.match(word):
                raise err(f"bad object name {word!r}", e)
            if word in objects:
                raise err(f"object {word} declared twice", e)
            objects.append(word)
    if not objects:
        raise SpecError("no objects declared", source, 1, 1)

    sets: dict[str, tuple[str, ...]] = {}
    for e in sec.get("sets", ()):
        lhs, sep, rhs = e.text.partition("=")
        set_name = lhs.strip()
        if not sep or not _NAME.match(set_name):
            raise err("expected 'Name = member member ...'", e)
        members = [w for w in re.split(r"[\s,{}]+", rhs.strip()) if w]
        for m in members:
            if m not in objects:
                raise err(f"set {set_name} names unknown object {m!r}", e)
        sets[set_name] = tuple(members)

    aspects: dict[str, Calculus] = {}
    for e in sec.get("aspects", ()):
        lhs, sep, rhs = e.text.partition("=")
        asp = lhs.strip()
        words = rhs.split()
        if not sep or not _NAME.match(asp) or not words or len(words) > 2 or words[1:] not in ([], ["rigid"]):
            raise err("expected 'Name = calculus [rigid]'", e)
        aspects[asp] = _calculus(words[0], rigid=len(words) == 2, base=base, entry=e, source=source)
    if not aspects:
        raise SpecError("no aspects declared", source, 1, 1)

    vocab = Vocabulary(aspects, tuple(objects), sets)

    links = []
    for e in sec.get("links", ()):
        links.append(_link(e, aspects, source))

    init: list[Atom] = []
    for e in sec.get("init", ()):
        f = _formula(e, vocab, source)
        atoms = _conjuncts(f)
        if atoms is None:
            raise err("init entries must be atoms or conjunctions of atoms", e)
        init.extend(atoms)

    formulas: list[Formula] = []
    texts: list[str] = []
    for e in sec.get("formulas", ()):
        formulas.append(_formula(e, vocab, source))
        texts.append(" ".join(e.text.split()))

    options = _options(sec.get("options", ()), source, base)
    problem = Problem(tuple(objects), aspects, tuple(formulas), tuple(init), tuple(links), sets,
                      options, name, tuple(texts))
    try:
        problem.check()
    except ProblemError as exc:
        raise SpecError(str(exc), source, 1, 1) from None
    return problem


def _calculus(ref: str, rigid: bool, base: Path | None, entry: Entry, source: str) -> Calculus:
    try:
        if ref in BUILTIN_NAMES:
            return load_calculus(ref, rigid_objects=rigid)
        path = Path(ref) if base is None or Path(ref).is_absolute() else base / ref
        if not path.is_file():
            raise SpecError(f"calculus {ref!r} is neither built in ({', '.join(BUILTIN_NAMES)}) "
                            "nor a readable file", source, entry.line, entry.column)
        return load_calculus(path, rigid_objects=rigid)
    except CalculusError as exc:
        raise SpecError(f"calculus {ref}: {exc}", source, entry.line, entry.column) from None


def _formula(e: Entry, vocab: Vocabulary, source: str) -> Formula:
    try:
        return parse(e.text.lstrip(), vocab, line=e.line, column=e.column)
    except FormulaSyntaxError as exc:
        msg = str(exc).split(": ", 1)[1]
        raise SpecError(msg, source, exc.line, exc.column) from None


def _conjuncts(f: Formula) -> list[Atom] | None:
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, And):
        left, right = _conjuncts(f.left), _conjuncts(f.right)
        if left is None or right is None:
            return None
        return left + right
    return None


def _link(e: Entry, aspects: dict[str, Calculus], source: str) -> Link:
    head, sep, body = e.text.partition(":")
    words = head.split()
    if not sep or len(words) != 2:
        raise SpecError("expected 'First Second : formula'", source, e.line, e.column)
    first, second = words
    for w in words:
        if w not in aspects:
            raise SpecError(f"link refers to unknown aspect {w!r}", source, e.line, e.column)
    c1, c2 = aspects[first], aspects[second]
    body_text = body.strip()
    label = body_text
    if body_text in BUILTIN_LINKS:
        need1, need2, formula_text = BUILTIN_LINKS[body_text]
        if (c1.name, c2.name) != (need1, need2):
            raise SpecError(f"built-in link {body_text} joins {need1} and {need2}",
                            source, e.line, e.column)
        body_text = formula_text.replace("A[", f"{first}[").replace("B[", f"{second}[")
    vocab = Vocabulary({first: c1, second: c2}, ("a", "b"))
    col = e.column + len(head) + 1
    try:
        f = parse(body_text, vocab, line=e.line, column=col)
    except FormulaSyntaxError as exc:
        msg = str(exc).split(": ", 1)[1]
        raise SpecError(msg, source, exc.line, exc.column) from None
    for g in subformulas(f):
        if isinstance(g, TEMPORAL) or isinstance(g, ObjEq):
            raise SpecError("link formulas are propositional", source, e.line, e.column)
        if isinstance(g, Atom) and (g.a, g.b) != ("a", "b"):
            raise SpecError("link atoms must read Aspect[a,b]", source, e.line, e.column)
    pairs = frozenset((r, s) for r in c1.names for s in c2.names
                      if _holds(f, {first: r, second: s}))
    return Link(first, second, pairs, " ".join(label.split()))


def _holds(f: Formula, val: dict[str, str]) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Atom):
        return val[f.aspect] in f.rels
    if isinstance(f, Not):
        return not _holds(f.arg, val)
    kids = [_holds(c, val) for c in children(f)]
    if isinstance(f, And):
        return kids[0] and kids[1]
    if isinstance(f, Or):
        return kids[0] or kids[1]
    if isinstance(f, Implies):
        return not kids[0] or kids[1]
    if isinstance(f, Equiv):
        return kids[0] == kids[1]
    raise TypeError(type(f).__name__)


_OPTION_TYPES = {
    "k_min": int, "k_max": int, "translation": str, "heuristic": str, "allow_finite_path": bool,
    "node_limit": int, "time_limit": float, "k_time_limit": float, "seed": int,
}


def _options(entries, source: str, base: Path | None) -> Options:
    values: dict[str, object] = {}
    for e in entries:
        key, sep, raw = e.text.partition("=")
        key, raw = key.strip(), raw.strip()
        kind = _OPTION_TYPES.get(key)
        if not sep or kind is None:
            raise SpecError(f"unknown option {key!r}; known: {', '.join(_OPTION_TYPES)}",
                            source, e.line, e.column)
        try:
            if kind is bool:
                if raw not in ("true", "false"):
                    raise ValueError
                val: object = raw == "true"
            else:
                val = kind(raw)
        except ValueError:
            raise SpecError(f"option {key} expects {kind.__name__}, got {raw!r}",
                            source, e.line, e.column) from None
        if key == "heuristic" and isinstance(val, str) and val.startswith("subclass:"):
            ref = val.split(":", 1)[1]
            if base is not None and not Path(ref).is_absolute():
                val = "subclass:" + str(base / ref)
            elif base is None and not Path(ref).exists():
                val = "subclass:" + str(Path(__file__).with_name("data") / ref)
        values["allow_finite" if key == "allow_finite_path" else key] = val
    try:
        return Options(**values)
    except ProblemError as exc:
        raise SpecError(str(exc), source, 1, 1) from None
