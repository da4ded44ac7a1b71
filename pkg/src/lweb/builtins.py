"""Built-in predicates. Each call is a single proof step and yields at most one answer."""

from __future__ import annotations

from types import MappingProxyType
from typing import Callable, Iterable, Optional

from .ast import Clause, Term, clause_heads, is_ground, predicate_key
from .errors import BuiltinRedefinition, InstantiationError, LWebError
from .render import render_term
from .unify import Store, Substitution

BuiltinFn = Callable[[tuple, Store], bool]


def _neq(args: tuple, store: Store) -> bool:
    left, right = (store.resolve(a) for a in args)
    for t in (left, right):
        if not is_ground(t):
            raise InstantiationError(f"neq: argument {render_term(t)} is not ground")
    return left != right


def _eq(args: tuple, store: Store) -> bool:
    return store.unify(args[0], args[1])


BUILTINS = MappingProxyType({
    ("neq", 2): _neq,
    ("eq", 2): _eq,
})


def lookup(atom: Term) -> Optional[BuiltinFn]:
    return BUILTINS.get(predicate_key(atom))


def eval_builtin(name: str, args, s: Substitution, occurs_check: bool = True) -> Optional[Substitution]:
    """Run builtin ``name`` under ``s``; returns the extended substitution or None on failure."""
    fn = BUILTINS.get((name, len(args)))
    if fn is None:
        raise LWebError(f"unknown builtin {name}/{len(args)}")
    store = Store(dict(s), occurs_check=occurs_check)
    if not fn(tuple(args), store):
        return None
    return store.substitution()


def check_heads(clauses: Iterable[Clause], origin: str = "<input>") -> None:
    """Reject user clauses whose head is a builtin predicate."""
    for clause in clauses:
        for head in clause_heads(clause):
            key = predicate_key(head)
            if key in BUILTINS:
                raise BuiltinRedefinition(key[0], key[1], origin)
