"""Tokenizer and recursive-descent parser for module files and queries.

Surface syntax (highest binding first)::

    term      X  a  42  f(t, ...)  [a, b | T]
    unit      atom | (neq X Y) | /name | /name : (defs) | link | ( formula )
    conj      unit , unit        (also written ∧ or /\\, right-nested)
    arrow     conj => arrow      (also ⇒; right-associative)
    formula   arrow | atom :- formula | exists X. formula | forall X. formula

A module file is a sequence of ``/name =`` headers.  A body that starts on
the header's own line is a goal; a body starting on a later line is a set of
``.``-terminated clauses running to the next header.  ``/name = { c. c. }``
forces a clause body anywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ast import (
    Atom,
    ClauseConj,
    ClauseImpl,
    Compound,
    Conj,
    Const,
    Exists,
    Fact,
    Forall,
    Link,
    LinkImpl,
    MacroDef,
    MacroKind,
    MacroRef,
    Query,
    Rule,
    Var,
    close_clause,
    close_goal,
    make_list,
    NIL,
)
from .errors import ParseError

_PATH = r"(?:[A-Za-z0-9_\-~/]|\.(?=[A-Za-z0-9_\-~/]))*"
_URL_PATH = r"(?:[A-Za-z0-9_\-~/:]|\.(?=[A-Za-z0-9_\-~/:]))*"

_TOKEN_PATTERNS = [
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r\f]+"),
    ("COMMENT", r"%[^\n]*"),
    ("LINK", r"[A-Za-z][A-Za-z0-9+\-]*://" + _URL_PATH
             + r"|file:" + _PATH
             + r"|\.\.?/" + _PATH
             + r"|[A-Za-z0-9_\-]+(?:\.[A-Za-z0-9_\-]+)*/" + _PATH),
    ("PUNCT", r"\?-|:-|=>|/\\|⇒|∧|[,()\[\]|{}=:.]"),
    ("MACRO", r"/[A-Za-z0-9_]+"),
    ("INT", r"-?[0-9]+"),
    ("VAR", r"[A-Z_][A-Za-z0-9_]*"),
    ("NAME", r"[a-z][A-Za-z0-9_]*"),
    ("MISMATCH", r"."),
]
_MASTER = re.compile("|".join(f"(?P<{kind}>{pattern})" for kind, pattern in _TOKEN_PATTERNS))

_CONJ = {",", "∧", "/\\"}
_ARROW = {"=>", "⇒"}
_QUANTIFIERS = {"exists", "forall"}
_TERM_START = {"VAR", "NAME", "INT"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, origin: str = "<input>") -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    for m in _MASTER.finditer(text):
        kind = m.lastgroup
        value = m.group()
        col = m.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = m.end()
        elif kind in ("SKIP", "COMMENT"):
            continue
        elif kind == "MISMATCH":
            raise ParseError(f"unexpected character {value!r}", line, col, origin)
        else:
            tokens.append(Token("PUNCT" if kind == "PUNCT" else kind, value, line, col))
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


# Formula nodes produced by the parser before they are read as goals or clauses.
@dataclass(frozen=True)
class _F:
    kind: str  # atom ref link block and impl rule exists forall
    a: object = None
    b: object = None
    tok: Optional[Token] = None


class Parser:
    def __init__(self, text: str, origin: str = "<input>"):
        self.origin = origin
        self.tokens = tokenize(text, origin)
        self.pos = 0
        self._anon = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "PUNCT" and tok.text == text

    def at_any(self, texts, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "PUNCT" and tok.text in texts

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col, self.origin)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            tok = self.peek()
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def at_header(self) -> bool:
        return self.peek().kind == "MACRO" and self.at("=", 1)

    # -- terms ---------------------------------------------------------------

    def term(self):
        tok = self.advance()
        if tok.kind == "VAR":
            if tok.text == "_":
                self._anon += 1
                return Var(f"_~{self._anon}")
            return Var(tok.text)
        if tok.kind == "INT":
            return Const(int(tok.text))
        if tok.kind == "NAME":
            if self.at("("):
                self.advance()
                args = [self.term()]
                while self.at(","):
                    self.advance()
                    args.append(self.term())
                self.expect(")")
                return Compound(tok.text, tuple(args))
            return Const(tok.text)
        if tok.kind == "PUNCT" and tok.text == "[":
            if self.at("]"):
                self.advance()
                return NIL
            items = [self.term()]
            while self.at(","):
                self.advance()
                items.append(self.term())
            tail = NIL
            if self.at("|"):
                self.advance()
                tail = self.term()
            self.expect("]")
            return make_list(items, tail)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}", tok)

    # -- formulas ------------------------------------------------------------

    def formula(self) -> _F:
        left = self.arrow()
        if self.at(":-"):
            tok = self.advance()
            if left.kind != "atom":
                raise self.error("the head of a rule must be an atom", left.tok or tok)
            return _F("rule", left.a, self.formula(), tok)
        return left

    def arrow(self) -> _F:
        left = self.conj()
        if self.at_any(_ARROW):
            tok = self.advance()
            return _F("impl", left, self.arrow(), tok)
        return left

    def conj(self) -> _F:
        left = self.unit()
        if self.at_any(_CONJ):
            tok = self.advance()
            return _F("and", left, self.conj(), tok)
        return left

    def _at_quantifier(self, k: int = 0) -> bool:
        tok = self.peek(k)
        return (tok.kind == "NAME" and tok.text in _QUANTIFIERS
                and self.peek(k + 1).kind == "VAR" and self.at(".", k + 2))

    def unit(self) -> _F:
        tok = self.peek()
        if self._at_quantifier():
            self.advance()
            var = self.advance()
            if var.text == "_":
                raise self.error("cannot quantify the anonymous variable", var)
            self.expect(".")
            return _F(tok.text, var.text, self.formula(), tok)
        if tok.kind == "PUNCT" and tok.text == "(":
            self.advance()
            nxt = self.peek(1)
            if (self.peek().kind == "NAME" and not self._at_quantifier()
                    and (nxt.kind in _TERM_START or (nxt.kind == "PUNCT" and nxt.text == "["))):
                functor = self.advance()
                args = []
                while not self.at(")"):
                    if self.peek().kind == "EOF":
                        raise self.error("unterminated application")
                    args.append(self.term())
                self.advance()
                return _F("atom", Compound(functor.text, tuple(args)), tok=functor)
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "MACRO":
            self.advance()
            name = tok.text[1:]
            if self.at(":"):
                self.advance()
                defs = self.def_block()
                if not any(d.name == name for d in defs):
                    raise self.error(f"/{name} is not defined in its own definition block", tok)
                return _F("block", name, tuple(defs), tok)
            return _F("ref", name, tok=tok)
        if tok.kind == "LINK":
            self.advance()
            return _F("link", tok.text, tok=tok)
        if tok.kind == "NAME":
            return _F("atom", self.term(), tok=tok)
        if tok.kind == "VAR":
            raise self.error("a variable cannot stand for a goal or clause", tok)
        if tok.kind == "INT":
            raise self.error("an integer cannot stand for a goal or clause", tok)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", tok)

    def def_block(self) -> list[MacroDef]:
        self.expect("(")
        defs = []
        while not self.at(")"):
            tok = self.peek()
            if tok.kind != "MACRO":
                raise self.error("expected a macro definition '/name = ...'", tok)
            self.advance()
            self.expect("=")
            if self.at("{"):
                defs.append(self.braced_clause_def(tok.text[1:]))
            else:
                body = self.to_goal(self.formula())
                self.expect(".")
                defs.append(MacroDef(tok.text[1:], close_goal(body), MacroKind.GOAL))
        self.advance()
        return defs

    def braced_clause_def(self, name: str) -> MacroDef:
        open_tok = self.expect("{")
        items = []
        while not self.at("}"):
            if self.peek().kind == "EOF":
                raise self.error("unterminated '{' clause block", open_tok)
            items.append(self.clause_item())
        self.advance()
        if not items:
            raise self.error(f"macro /{name} has no body", open_tok)
        return MacroDef(name, _conj_clauses(items), MacroKind.CLAUSE)

    def clause_item(self):
        f = self.formula()
        if not self.at("."):
            tok = self.peek()
            if tok.kind == "EOF" or self.at_header() or self.at("}"):
                raise self.error("unterminated clause (missing '.')", tok)
            raise self.error(f"expected '.', found {tok.text!r}", tok)
        self.advance()
        return close_clause(self.to_clause(f))

    # -- reading formulas as goals or clauses ----------------------------------

    def to_goal(self, f: _F):
        kind = f.kind
        if kind == "atom":
            return Atom(f.a)
        if kind == "ref":
            return MacroRef(f.a)
        if kind == "and":
            return Conj(self.to_goal(f.a), self.to_goal(f.b))
        if kind == "exists":
            return Exists(f.a, self.to_goal(f.b))
        if kind == "impl":
            left, body = f.a, self.to_goal(f.b)
            if left.kind == "link":
                return Link(left.a, body)
            if left.kind == "block":
                return LinkImpl(left.a, left.b, body)
            return ClauseImpl(self.to_clause(left), body)
        if kind == "link":
            raise self.error("a link must be followed by '=> goal'", f.tok)
        if kind == "block":
            raise self.error("a definition block must be followed by '=> goal'", f.tok)
        if kind == "rule":
            raise self.error("a rule cannot be used as a goal", f.tok)
        if kind == "forall":
            raise self.error("'forall' cannot be used in a goal", f.tok)
        raise self.error(f"cannot read {kind} as a goal", f.tok)

    def to_clause(self, f: _F):
        kind = f.kind
        if kind == "atom":
            return Fact(f.a)
        if kind == "ref":
            return MacroRef(f.a)
        if kind == "and":
            return ClauseConj(self.to_clause(f.a), self.to_clause(f.b))
        if kind == "rule":
            return Rule(f.a, self.to_goal(f.b))
        if kind == "forall":
            return Forall(f.a, self.to_clause(f.b))
        if kind == "impl":
            raise self.error("an implication goal cannot be used as a clause", f.tok)
        if kind == "exists":
            raise self.error("'exists' cannot be used in a clause", f.tok)
        raise self.error(f"cannot read {kind} as a clause", f.tok)

    # -- top-level entry points ---------------------------------------------------

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error(f"unexpected {tok.text!r} after the end", tok)

    def module(self) -> list[MacroDef]:
        first = self.peek()
        # A leading "www.d.com/lists." names the page; it carries no meaning.
        if first.kind == "LINK" and self.at(".", 1) and self.peek(1).line == first.line:
            self.advance()
            self.advance()
        defs = []
        while self.peek().kind != "EOF":
            if not self.at_header():
                raise self.error("expected a macro header '/name ='")
            head = self.advance()
            name = head.text[1:]
            self.advance()
            nxt = self.peek()
            if nxt.kind == "EOF" or self.at_header():
                raise self.error(f"macro /{name} has no body", head)
            if self.at("{"):
                defs.append(self.braced_clause_def(name))
                if self.at("."):
                    self.advance()
            elif nxt.line == head.line:
                body = self.to_goal(self.formula())
                if not self.at("."):
                    raise self.error("unterminated goal body (missing '.')")
                self.advance()
                defs.append(MacroDef(name, close_goal(body), MacroKind.GOAL))
                if not (self.peek().kind == "EOF" or self.at_header()):
                    raise self.error(f"goal macro /{name} is complete; expected the next header")
            else:
                items = []
                while not (self.peek().kind == "EOF" or self.at_header()):
                    items.append(self.clause_item())
                defs.append(MacroDef(name, _conj_clauses(items), MacroKind.CLAUSE))
        return defs

    def query(self) -> Query:
        self.expect("?-")
        bound = None
        if self.at("(") and self.peek(1).kind == "INT" and self.at(")", 2):
            self.advance()
            tok = self.advance()
            self.advance()
            bound = int(tok.text)
            if bound < 0:
                raise self.error("the proof-step bound must be non-negative", tok)
        goal = self.to_goal(self.formula())
        if not self.at("."):
            raise self.error("a query must end with '.'")
        self.advance()
        self.expect_end()
        return Query(goal, bound)


def _conj_clauses(items):
    result = items[-1]
    for item in reversed(items[:-1]):
        result = ClauseConj(item, result)
    return result


def parse_module_file(text: str, origin: str = "<input>") -> list[MacroDef]:
    """Macro definitions of a page, in file order."""
    return Parser(text, origin).module()


def parse_query(text: str, origin: str = "<query>") -> Query:
    return Parser(text, origin).query()


def parse_goal(text: str, origin: str = "<goal>"):
    """A goal with an optional trailing '.'; free variables stay free."""
    p = Parser(text, origin)
    goal = p.to_goal(p.formula())
    if p.at("."):
        p.advance()
    p.expect_end()
    return goal


def parse_clause(text: str, origin: str = "<clause>"):
    """A single top-level clause, universally closed."""
    p = Parser(text, origin)
    clause = close_clause(p.to_clause(p.formula()))
    if p.at("."):
        p.advance()
    p.expect_end()
    return clause


def parse_program(text: str, origin: str = "<program>") -> list:
    """A plain clause file: '.'-terminated clauses, each universally closed."""
    p = Parser(text, origin)
    clauses = []
    while p.peek().kind != "EOF":
        if p.at_header():
            raise p.error("macro headers belong in module pages, not clause files")
        clauses.append(p.clause_item())
    return clauses


def parse_term(text: str, origin: str = "<term>"):
    p = Parser(text, origin)
    t = p.term()
    p.expect_end()
    return t
