"""Abstract syntax: terms, goals (G-formulas), clauses (D-formulas), macro
definitions (M-formulas), programs and queries.

Everything here is immutable. Goals and clauses are separate node families;
``MacroRef`` is shared because ``/n`` is legal in both positions and its
meaning is fixed by where it occurs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Union

# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

CONS = "."
NIL_NAME = "[]"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, slots=True)
class Const:
    value: Union[str, int]

    def __repr__(self) -> str:
        return f"Const({self.value!r})"


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {self.args!r})"


Term = Union[Var, Const, Compound]

NIL = Const(NIL_NAME)


def cons(head: Term, tail: Term) -> Compound:
    return Compound(CONS, (head, tail))


def make_list(items, tail: Term = NIL) -> Term:
    result = tail
    for item in reversed(list(items)):
        result = cons(item, result)
    return result


def is_cons(t: Term) -> bool:
    return type(t) is Compound and t.functor == CONS and len(t.args) == 2


def predicate_key(atom: Term) -> tuple[str, int]:
    """(name, arity) of a non-variable atom."""
    if type(atom) is Compound:
        return atom.functor, len(atom.args)
    return str(atom.value), 0


def term_vars(t: Term, acc: Optional[dict] = None) -> dict:
    """Variables of ``t`` in first-occurrence order (dict used as ordered set)."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        t = stack.pop()
        if type(t) is Var:
            acc.setdefault(t.name, None)
        elif type(t) is Compound:
            stack.extend(reversed(t.args))
    return acc


def is_ground(t: Term) -> bool:
    return not term_vars(t)


def replace_var(t: Term, name: str, new: Term) -> Term:
    if type(t) is Var:
        return new if t.name == name else t
    if type(t) is Compound:
        args = tuple(replace_var(a, name, new) for a in t.args)
        return Compound(t.functor, args)
    return t


# ---------------------------------------------------------------------------
# Goals and clauses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MacroRef:
    name: str


@dataclass(frozen=True, slots=True)
class Atom:
    term: Term

    def __post_init__(self):
        if type(self.term) is Var:
            raise ValueError("an atomic goal cannot be a variable")


@dataclass(frozen=True, slots=True)
class Conj:
    left: "Goal"
    right: "Goal"


@dataclass(frozen=True, slots=True)
class ClauseImpl:
    """``D => G``: assume ``clause`` while solving ``body``."""

    clause: "Clause"
    body: "Goal"


@dataclass(frozen=True, slots=True)
class LinkImpl:
    """``/root : M => G``: add ``/root`` to the clauses and push ``defs``."""

    root: str
    defs: tuple
    body: "Goal"

    def __post_init__(self):
        if not any(d.name == self.root for d in self.defs):
            raise ValueError(f"/{self.root} is not defined among the linked definitions")


@dataclass(frozen=True, slots=True)
class Link:
    """An unresolved hyperlink goal ``origin => G``; the loader turns it into a LinkImpl."""

    origin: str
    body: "Goal"


@dataclass(frozen=True, slots=True)
class Exists:
    var: str
    body: "Goal"


@dataclass(frozen=True, slots=True)
class Fact:
    atom: Term

    def __post_init__(self):
        if type(self.atom) is Var:
            raise ValueError("a fact cannot be a variable")


@dataclass(frozen=True, slots=True)
class Rule:
    head: Term
    body: "Goal"

    def __post_init__(self):
        if type(self.head) is Var:
            raise ValueError("a rule head cannot be a variable")


@dataclass(frozen=True, slots=True)
class Forall:
    var: str
    body: "Clause"


@dataclass(frozen=True, slots=True)
class ClauseConj:
    left: "Clause"
    right: "Clause"


Goal = Union[Atom, MacroRef, Conj, ClauseImpl, LinkImpl, Link, Exists]
Clause = Union[Fact, MacroRef, Rule, Forall, ClauseConj]


class MacroKind(enum.Enum):
    GOAL = "goal"
    CLAUSE = "clause"


@dataclass(frozen=True)
class MacroDef:
    """``/name = body``; ``kind`` records whether the body was written as a goal or as clauses."""

    name: str
    body: Union[Goal, Clause]
    kind: MacroKind

    @cached_property
    def as_goal(self) -> Optional[Goal]:
        if self.kind is MacroKind.GOAL:
            return self.body
        return clause_to_goal(self.body)

    @cached_property
    def as_clause(self) -> Optional[Clause]:
        if self.kind is MacroKind.CLAUSE:
            return self.body
        return goal_to_clause(self.body)


# ---------------------------------------------------------------------------
# Free variables, closure and single-variable substitution
# ---------------------------------------------------------------------------


def goal_free_vars(g: Goal) -> list[str]:
    acc: dict = {}
    _goal_fv(g, frozenset(), acc)
    return list(acc)


def clause_free_vars(c: Clause) -> list[str]:
    acc: dict = {}
    _clause_fv(c, frozenset(), acc)
    return list(acc)


def _add_term_vars(t: Term, bound: frozenset, acc: dict) -> None:
    for name in term_vars(t):
        if name not in bound:
            acc.setdefault(name, None)


def _goal_fv(g: Goal, bound: frozenset, acc: dict) -> None:
    kind = type(g)
    if kind is Atom:
        _add_term_vars(g.term, bound, acc)
    elif kind is Conj:
        _goal_fv(g.left, bound, acc)
        _goal_fv(g.right, bound, acc)
    elif kind is ClauseImpl:
        _clause_fv(g.clause, bound, acc)
        _goal_fv(g.body, bound, acc)
    elif kind is LinkImpl or kind is Link:
        _goal_fv(g.body, bound, acc)
    elif kind is Exists:
        _goal_fv(g.body, bound | {g.var}, acc)


def _clause_fv(c: Clause, bound: frozenset, acc: dict) -> None:
    kind = type(c)
    if kind is Fact:
        _add_term_vars(c.atom, bound, acc)
    elif kind is Rule:
        _add_term_vars(c.head, bound, acc)
        _goal_fv(c.body, bound, acc)
    elif kind is Forall:
        _clause_fv(c.body, bound | {c.var}, acc)
    elif kind is ClauseConj:
        _clause_fv(c.left, bound, acc)
        _clause_fv(c.right, bound, acc)


def close_clause(c: Clause) -> Clause:
    """Universally quantify every free variable, outermost binder first."""
    for name in reversed(clause_free_vars(c)):
        c = Forall(name, c)
    return c


def close_goal(g: Goal) -> Goal:
    for name in reversed(goal_free_vars(g)):
        g = Exists(name, g)
    return g


def closure_prefix(value, binder) -> tuple[list[str], object]:
    """Split off the leading run of ``binder`` nodes; returns (names, matrix)."""
    names = []
    while type(value) is binder:
        names.append(value.var)
        value = value.body
    return names, value


def subst_var_goal(g: Goal, name: str, new: Term) -> Goal:
    """Replace free occurrences of variable ``name`` in ``g`` by ``new``."""
    kind = type(g)
    if kind is Atom:
        return Atom(replace_var(g.term, name, new))
    if kind is Conj:
        return Conj(subst_var_goal(g.left, name, new), subst_var_goal(g.right, name, new))
    if kind is ClauseImpl:
        return ClauseImpl(subst_var_clause(g.clause, name, new), subst_var_goal(g.body, name, new))
    if kind is LinkImpl:
        return LinkImpl(g.root, g.defs, subst_var_goal(g.body, name, new))
    if kind is Link:
        return Link(g.origin, subst_var_goal(g.body, name, new))
    if kind is Exists:
        if g.var == name:
            return g
        return Exists(g.var, subst_var_goal(g.body, name, new))
    return g


def subst_var_clause(c: Clause, name: str, new: Term) -> Clause:
    kind = type(c)
    if kind is Fact:
        return Fact(replace_var(c.atom, name, new))
    if kind is Rule:
        return Rule(replace_var(c.head, name, new), subst_var_goal(c.body, name, new))
    if kind is Forall:
        if c.var == name:
            return c
        return Forall(c.var, subst_var_clause(c.body, name, new))
    if kind is ClauseConj:
        return ClauseConj(subst_var_clause(c.left, name, new), subst_var_clause(c.right, name, new))
    return c


# ---------------------------------------------------------------------------
# Goal <-> clause views of a macro body
# ---------------------------------------------------------------------------
# A body built only from atoms, macro references and conjunctions reads the
# same as a goal and as a clause set, e.g. ``/lists = /mem, /app, /path``.
# Leading Exists/Forall closure binders translate into each other.


def goal_to_clause(g: Goal) -> Optional[Clause]:
    names, matrix = closure_prefix(g, Exists)
    c = _goal_matrix_to_clause(matrix)
    if c is None:
        return None
    for name in reversed(names):
        c = Forall(name, c)
    return c


def _goal_matrix_to_clause(g: Goal) -> Optional[Clause]:
    kind = type(g)
    if kind is Atom:
        return Fact(g.term)
    if kind is MacroRef:
        return g
    if kind is Conj:
        left = _goal_matrix_to_clause(g.left)
        right = _goal_matrix_to_clause(g.right)
        if left is None or right is None:
            return None
        return ClauseConj(left, right)
    return None


def clause_to_goal(c: Clause) -> Optional[Goal]:
    names, matrix = closure_prefix(c, Forall)
    g = _clause_matrix_to_goal(matrix)
    if g is None:
        return None
    for name in reversed(names):
        g = Exists(name, g)
    return g


def _clause_matrix_to_goal(c: Clause) -> Optional[Goal]:
    kind = type(c)
    if kind is Fact:
        return Atom(c.atom)
    if kind is MacroRef:
        return c
    if kind is ClauseConj:
        left = _clause_matrix_to_goal(c.left)
        right = _clause_matrix_to_goal(c.right)
        if left is None or right is None:
            return None
        return Conj(left, right)
    return None


def clause_heads(c: Clause) -> Iterator[Term]:
    """Heads of every fact and rule inside ``c`` (macro references not followed)."""
    stack = [c]
    while stack:
        c = stack.pop()
        kind = type(c)
        if kind is Fact:
            yield c.atom
        elif kind is Rule:
            yield c.head
        elif kind is Forall:
            stack.append(c.body)
        elif kind is ClauseConj:
            stack.append(c.right)
            stack.append(c.left)


def goal_clauses(g: Goal) -> Iterator[Clause]:
    """Clauses embedded in ``g`` through ``D => G`` (for load-time checks)."""
    stack = [g]
    while stack:
        g = stack.pop()
        kind = type(g)
        if kind is ClauseImpl:
            yield g.clause
            stack.append(g.body)
        elif kind is Conj:
            stack.extend((g.right, g.left))
        elif kind in (LinkImpl, Link, Exists):
            stack.append(g.body)


# ---------------------------------------------------------------------------
# Programs and queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Program:
    """The pair of a clause collection and a macro list (index 0 = most recent).

    Clauses are tried in tuple order; assumptions go to the front.
    """

    clauses: tuple = ()
    macros: tuple = ()

    def assume(self, clause: Clause) -> "Program":
        return Program((clause,) + self.clauses, self.macros)

    def link(self, root: str, defs) -> "Program":
        return Program((MacroRef(root),) + self.clauses, tuple(defs) + self.macros)

    def with_clauses(self, clauses) -> "Program":
        return Program(tuple(clauses) + self.clauses, self.macros)


EMPTY_PROGRAM = Program()


@dataclass(frozen=True)
class Query:
    goal: Goal
    bound: Optional[int] = None

    def __post_init__(self):
        if self.bound is not None and self.bound < 0:
            raise ValueError("a proof-step bound cannot be negative")

    @property
    def variables(self) -> list[str]:
        return [v for v in goal_free_vars(self.goal) if not v.startswith("_")]
