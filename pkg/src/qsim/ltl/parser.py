"""Recursive-descent parser for the formula language.

Grammar (weakest binding first)::

    formula  := quant | equiv
    quant    := ("forall" | "exists") IDENT ("," IDENT)* "in" set "." formula
    equiv    := impl ("<->" impl)*
    impl     := or ("->" impl)?
    or       := until ("|" until)*
    until    := and ("U" and)*
    and      := unary ("&" unary)*
    unary    := ("~" | "!" | "X" | "F" | "G") unary | quant | primary
    primary  := "true" | "false" | "(" formula ")" | atom | guard
    atom     := IDENT "[" IDENT "," IDENT "]" ("=" rel | "!=" rel
                | "in" rels | "notin" rels)
    guard    := IDENT ("=" | "!=") IDENT
    set      := IDENT | "{" IDENT ("," IDENT)* "}"
    rels     := "{" rel ("," rel)* "}"
    rel      := IDENT | "<" | "=" | ">"
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
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

_REL_SYMBOLS = ("<", "=", ">")

KEYWORDS = {"forall", "exists", "in", "notin", "true", "false", "X", "F", "G", "U"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<op><->|->|!=|[\[\](){},.=~!&|<>])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line, self.column = line, column
        super().__init__(f"{line}:{column}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    toks: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        chunk = m.group()
        if m.lastgroup != "ws":
            kind = m.lastgroup
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list[Token], vocab: Vocabulary | None):
        self.toks = tokens
        self.i = 0
        self.vocab = vocab
        self.bound: list[str] = []

    # -- helpers ---------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None) -> FormulaSyntaxError:
        tok = tok or self.tok
        return FormulaSyntaxError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def eat(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected a name, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def term(self) -> str:
        tok = self.ident()
        if tok.text in self.bound:
            return tok.text
        if self.vocab is not None and tok.text not in self.vocab.objects:
            raise self.error(f"unknown object {tok.text!r}", tok)
        return tok.text

    def names_in_braces(self, item=None) -> list[Token]:
        item = item or self.ident
        self.eat("{")
        out = [item()]
        while self.at(","):
            self.eat(",")
            out.append(item())
        self.eat("}")
        return out

    def rel_name(self) -> Token:
        """A relation name: an identifier, or one of the symbols < = >."""
        tok = self.tok
        if tok.kind == "op" and tok.text in _REL_SYMBOLS:
            self.i += 1
            return tok
        return self.ident()

    # -- grammar ---------------------------------------------------------

    def formula(self) -> Formula:
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.equiv()

    def quant(self) -> Formula:
        kw = self.tok.text
        self.i += 1
        names = [self.ident().text]
        while self.at(","):
            self.eat(",")
            names.append(self.ident().text)
        self.eat("in")
        if self.at("{"):
            toks = self.names_in_braces()
            for t in toks:
                if self.vocab is not None and t.text not in self.vocab.objects:
                    raise self.error(f"unknown object {t.text!r}", t)
            domain: str | tuple[str, ...] = tuple(t.text for t in toks)
        else:
            tok = self.ident()
            if self.vocab is not None and not self.vocab.has_set(tok.text):
                raise self.error(f"unknown object set {tok.text!r}", tok)
            domain = tok.text
        self.eat(".")
        self.bound.extend(names)
        try:
            body = self.formula()
        finally:
            del self.bound[-len(names):]
        cls = Forall if kw == "forall" else Exists
        return cls(tuple(names), domain, body)

    def equiv(self) -> Formula:
        f = self.impl()
        while self.at("<->"):
            self.eat("<->")
            f = Equiv(f, self.impl())
        return f

    def impl(self) -> Formula:
        f = self.or_()
        if self.at("->"):
            self.eat("->")
            return Implies(f, self.impl())
        return f

    def or_(self) -> Formula:
        f = self.until()
        while self.at("|"):
            self.eat("|")
            f = Or(f, self.until())
        return f

    def until(self) -> Formula:
        f = self.and_()
        while self.at("U"):
            self.eat("U")
            f = Until(f, self.and_())
        return f

    def and_(self) -> Formula:
        f = self.unary()
        while self.at("&"):
            self.eat("&")
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        for text, cls in (("~", Not), ("!", Not), ("X", Next), ("F", Eventually), ("G", Always)):
            if self.at(text):
                self.eat(text)
                return cls(self.unary())
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.primary()

    def primary(self) -> Formula:
        if self.at("true"):
            self.eat("true")
            return TRUE
        if self.at("false"):
            self.eat("false")
            return FALSE
        if self.at("("):
            self.eat("(")
            f = self.formula()
            self.eat(")")
            return f
        if self.tok.kind != "ident":
            raise self.error(f"expected a formula, found {self.tok.text or 'end of input'!r}")
        if self.toks[self.i + 1].text == "[":
            return self.atom()
        a = self.term()
        if self.at("="):
            self.eat("=")
            return ObjEq(a, self.term())
        if self.at("!="):
            self.eat("!=")
            return ObjEq(a, self.term(), negated=True)
        raise self.error("expected '=' or '!=' after an object name")

    def atom(self) -> Formula:
        asp = self.ident()
        cal = None
        if self.vocab is not None:
            cal = self.vocab.aspects.get(asp.text)
            if cal is None:
                raise self.error(f"unknown aspect {asp.text!r}", asp)
        self.eat("[")
        a = self.term()
        self.eat(",")
        b = self.term()
        self.eat("]")

        def check(toks: list[Token]) -> frozenset[str]:
            if cal is not None:
                for t in toks:
                    if t.text not in cal.names:
                        raise self.error(f"unknown relation {t.text!r} in aspect {asp.text}", t)
            return frozenset(t.text for t in toks)

        def complement(rels: frozenset[str]) -> frozenset[str]:
            if cal is None:
                raise self.error("negated atoms need a vocabulary to complement against", asp)
            return frozenset(cal.names) - rels

        if self.at("="):
            self.eat("=")
            return Atom(asp.text, a, b, check([self.rel_name()]))
        if self.at("!="):
            self.eat("!=")
            return Atom(asp.text, a, b, complement(check([self.rel_name()])))
        if self.at("in"):
            self.eat("in")
            return Atom(asp.text, a, b, check(self.names_in_braces(self.rel_name)))
        if self.at("notin"):
            self.eat("notin")
            return Atom(asp.text, a, b, complement(check(self.names_in_braces(self.rel_name))))
        raise self.error("expected '=', '!=', 'in' or 'notin' after an array reference")


def parse(text: str, vocab: Vocabulary | None = None, *, line: int = 1, column: int = 1) -> Formula:
    """Parse one formula. With a vocabulary, names are resolved and
    ``!=``/``notin`` atoms are complemented into plain membership."""
    p = _Parser(tokenize(text, line, column), vocab)
    f = p.formula()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after formula")
    return f
