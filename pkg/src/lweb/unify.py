"""Unification, substitutions and standardization apart.

``Store`` is the working representation used by the engine: triangular
bindings plus a trail, so backtracking is an ``undo`` to a mark.
``Substitution`` is the immutable, idempotent value handed to callers; the
functional :func:`unify` runs a ``Store`` and normalizes the result.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from typing import Iterator, Optional

from .ast import (
    Atom,
    Clause,
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
    MacroRef,
    Rule,
    Term,
    Var,
    clause_free_vars,
    goal_free_vars,
    subst_var_clause,
    subst_var_goal,
    term_vars,
)


class FreshSource:
    """Mints variable names containing ``#``, which the parser never produces.

    One source per solver run; it is not shared between threads.
    """

    def __init__(self, start: int = 0):
        self._next = start

    def fresh(self, base: str = "_") -> str:
        n = self._next
        self._next = n + 1
        return f"{base}#{n}"

    def var(self, base: str = "_") -> Var:
        return Var(self.fresh(base))

    def peek(self) -> int:
        """Number the next mint will carry."""
        return self._next


def fresh_index(name: str) -> Optional[int]:
    """Mint number of a fresh variable name, or None for a parsed name."""
    _, sep, digits = name.rpartition("#")
    return int(digits) if sep else None


class Store:
    """Triangular bindings with a trail."""

    __slots__ = ("bindings", "trail", "occurs_check")

    def __init__(self, bindings: Optional[dict] = None, occurs_check: bool = True):
        self.bindings: dict[str, Term] = dict(bindings or {})
        self.trail: list[str] = []
        self.occurs_check = occurs_check

    def walk(self, t: Term) -> Term:
        bindings = self.bindings
        while type(t) is Var:
            nxt = bindings.get(t.name)
            if nxt is None:
                return t
            t = nxt
        return t

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        bindings = self.bindings
        while len(trail) > mark:
            del bindings[trail.pop()]

    def bind(self, name: str, t: Term) -> None:
        self.bindings[name] = t
        self.trail.append(name)

    def occurs(self, name: str, t: Term) -> bool:
        stack = [t]
        while stack:
            t = self.walk(stack.pop())
            if type(t) is Var:
                if t.name == name:
                    return True
            elif type(t) is Compound:
                stack.extend(t.args)
        return False

    def unify(self, a: Term, b: Term) -> bool:
        """Unify in place; on failure every binding made here is undone."""
        mark = len(self.trail)
        stack = [(a, b)]
        walk = self.walk
        while stack:
            a, b = stack.pop()
            a = walk(a)
            b = walk(b)
            if a is b:
                continue
            ta, tb = type(a), type(b)
            if ta is Var:
                if tb is Var and a.name == b.name:
                    continue
                if self.occurs_check and tb is Compound and self.occurs(a.name, b):
                    self.undo(mark)
                    return False
                self.bind(a.name, b)
            elif tb is Var:
                if self.occurs_check and ta is Compound and self.occurs(b.name, a):
                    self.undo(mark)
                    return False
                self.bind(b.name, a)
            elif ta is Compound:
                if tb is not Compound or a.functor != b.functor or len(a.args) != len(b.args):
                    self.undo(mark)
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                self.undo(mark)
                return False
        return True

    def resolve(self, t: Term) -> Term:
        """Fully dereference ``t``."""
        t = self.walk(t)
        if type(t) is Compound:
            return Compound(t.functor, tuple(self.resolve(a) for a in t.args))
        return t

    def substitution(self, names=None) -> "Substitution":
        """Idempotent view of the bindings, optionally restricted to ``names``."""
        if names is None:
            names = list(self.bindings)
        result = {}
        for name in names:
            value = self.resolve(Var(name))
            if value != Var(name):
                result[name] = value
        return Substitution._trusted(result)


class Substitution(Mapping):
    """Immutable, idempotent finite map from variable names to terms.

    The constructor accepts triangular input and normalizes it; cyclic
    input raises ``ValueError``.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, bindings: Optional[Mapping] = None):
        raw = {}
        for name, value in dict(bindings or {}).items():
            if not isinstance(value, (Var, Const, Compound)):
                raise TypeError(f"binding for {name} is not a term: {value!r}")
            if value != Var(name):
                raw[name] = value
        _check_acyclic(raw)
        store = Store(raw)
        normal = {}
        for name in raw:
            value = store.resolve(Var(name))
            if value != Var(name):
                normal[name] = value
        self._map = normal
        self._hash = None

    @classmethod
    def _trusted(cls, normal: dict) -> "Substitution":
        s = cls.__new__(cls)
        s._map = normal
        s._hash = None
        return s

    def __getitem__(self, name: str) -> Term:
        return self._map[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Substitution):
            return self._map == other._map
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v!r}" for k, v in self._map.items())
        return f"Substitution({{{inner}}})"

    def restrict(self, names) -> "Substitution":
        return Substitution._trusted({n: self._map[n] for n in names if n in self._map})

    def apply_term(self, t: Term) -> Term:
        if type(t) is Var:
            return self._map.get(t.name, t)
        if type(t) is Compound:
            return Compound(t.functor, tuple(self.apply_term(a) for a in t.args))
        return t


def _check_acyclic(bindings: dict) -> None:
    done: set = set()
    for root in bindings:
        if root in done:
            continue
        # iterative DFS; 'active' holds the names on the current path
        active: set = set()
        stack = [(root, iter(term_vars(bindings[root])))]
        active.add(root)
        while stack:
            name, children = stack[-1]
            child = next(children, None)
            if child is None:
                stack.pop()
                active.discard(name)
                done.add(name)
            elif child in active:
                raise ValueError(f"cyclic binding through {child}")
            elif child in bindings and child not in done:
                active.add(child)
                stack.append((child, iter(term_vars(bindings[child]))))


EMPTY = Substitution()


def unify(t1: Term, t2: Term, s: Substitution = EMPTY, occurs_check: bool = True) -> Optional[Substitution]:
    """Most general unifier of ``t1`` and ``t2`` extending ``s``, or None."""
    store = Store(s._map, occurs_check=occurs_check)
    if not store.unify(t1, t2):
        return None
    return store.substitution()


def occurs_in(name: str, t: Term) -> bool:
    return name in term_vars(t)


# ---------------------------------------------------------------------------
# Applying substitutions to goals and clauses
# ---------------------------------------------------------------------------


def apply(s: Substitution, value):
    """Apply ``s`` to a term, goal, clause or macro definition.

    Binder-bound occurrences are left alone; a binder whose variable would
    capture a variable of the substituted terms is renamed first.
    """
    if isinstance(value, (Var, Const, Compound)):
        return s.apply_term(value)
    if isinstance(value, MacroDef):
        return MacroDef(value.name, apply(s, value.body), value.kind)
    if not s:
        return value
    if isinstance(value, (Fact, Rule, Forall, ClauseConj)):
        return _apply_clause(s, value)
    return _apply_goal(s, value)


def _range_vars(s: Substitution, names) -> set:
    out: set = set()
    for name in names:
        if name in s:
            out.update(term_vars(s[name]))
    return out


def _unused_name(base: str, avoid: set) -> str:
    for k in itertools.count(1):
        candidate = f"{base}{k}"
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


def _apply_binder(s: Substitution, var: str, body, free_vars, rebuild, recurse):
    inner = s.restrict([n for n in s if n != var])
    if not inner:
        return rebuild(var, body)
    free = free_vars(body)
    if var in _range_vars(inner, free):
        avoid = set(free) | _range_vars(inner, free) | set(inner)
        new = _unused_name(var, avoid)
        if rebuild is Forall:
            body = subst_var_clause(body, var, Var(new))
        else:
            body = subst_var_goal(body, var, Var(new))
        var = new
    return rebuild(var, recurse(inner, body))


def _apply_goal(s: Substitution, g):
    kind = type(g)
    if kind is Atom:
        return Atom(s.apply_term(g.term))
    if kind is MacroRef:
        return g
    if kind is Conj:
        return Conj(_apply_goal(s, g.left), _apply_goal(s, g.right))
    if kind is ClauseImpl:
        return ClauseImpl(_apply_clause(s, g.clause), _apply_goal(s, g.body))
    if kind is LinkImpl:
        return LinkImpl(g.root, g.defs, _apply_goal(s, g.body))
    if kind is Link:
        return Link(g.origin, _apply_goal(s, g.body))
    if kind is Exists:
        return _apply_binder(s, g.var, g.body, goal_free_vars, Exists, _apply_goal)
    raise TypeError(f"not a goal: {g!r}")


def _apply_clause(s: Substitution, c):
    kind = type(c)
    if kind is Fact:
        return Fact(s.apply_term(c.atom))
    if kind is MacroRef:
        return c
    if kind is Rule:
        return Rule(s.apply_term(c.head), _apply_goal(s, c.body))
    if kind is ClauseConj:
        return ClauseConj(_apply_clause(s, c.left), _apply_clause(s, c.right))
    if kind is Forall:
        return _apply_binder(s, c.var, c.body, clause_free_vars, Forall, _apply_clause)
    raise TypeError(f"not a clause: {c!r}")


def rename_apart(c: Clause, fresh: FreshSource) -> Clause:
    """Strip every Forall binder in ``c``, replacing its variable by a fresh one."""
    kind = type(c)
    if kind is Forall:
        body = subst_var_clause(c.body, c.var, fresh.var(c.var))
        return rename_apart(body, fresh)
    if kind is ClauseConj:
        return ClauseConj(rename_apart(c.left, fresh), rename_apart(c.right, fresh))
    return c
