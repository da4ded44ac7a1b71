"""Pretty-printer producing text the parser reads back to the same value."""

from __future__ import annotations

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
    NIL,
    Program,
    Query,
    Rule,
    Var,
    clause_free_vars,
    closure_prefix,
    goal_free_vars,
    is_cons,
)

# precedence levels: a node printed where a higher level is required gets parentheses
FORMULA, ARROW, CONJ, UNIT = 0, 1, 2, 3


def render_var(name: str) -> str:
    if name.startswith("_~"):
        return "_"
    base, sep, digits = name.rpartition("#")
    if sep:
        return f"_G{digits}"
    return name


def render_term(t) -> str:
    kind = type(t)
    if kind is Var:
        return render_var(t.name)
    if kind is Const:
        return str(t.value)
    if is_cons(t):
        items = []
        while is_cons(t):
            items.append(render_term(t.args[0]))
            t = t.args[1]
        inner = ",".join(items)
        if t == NIL:
            return f"[{inner}]"
        return f"[{inner}|{render_term(t)}]"
    if kind is Compound:
        return f"{t.functor}({','.join(render_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def _wrap(text: str, level: int, need: int) -> str:
    return f"({text})" if level < need else text


def render_goal(g, need: int = FORMULA) -> str:
    kind = type(g)
    if kind is Atom:
        return render_term(g.term)
    if kind is MacroRef:
        return f"/{g.name}"
    if kind is Conj:
        text = f"{render_goal(g.left, UNIT)}, {render_goal(g.right, CONJ)}"
        return _wrap(text, CONJ, need)
    if kind is ClauseImpl:
        text = f"{render_clause(g.clause, CONJ)} => {render_goal(g.body, ARROW)}"
        return _wrap(text, ARROW, need)
    if kind is Link:
        return _wrap(f"{g.origin} => {render_goal(g.body, ARROW)}", ARROW, need)
    if kind is LinkImpl:
        defs = " ".join(_render_block_def(d) for d in g.defs)
        text = f"/{g.root} : ({defs}) => {render_goal(g.body, ARROW)}"
        return _wrap(text, ARROW, need)
    if kind is Exists:
        return _wrap(f"exists {render_var(g.var)}. {render_goal(g.body)}", FORMULA, need)
    raise TypeError(f"not a goal: {g!r}")


def render_clause(c, need: int = FORMULA) -> str:
    kind = type(c)
    if kind is Fact:
        return render_term(c.atom)
    if kind is MacroRef:
        return f"/{c.name}"
    if kind is ClauseConj:
        text = f"{render_clause(c.left, UNIT)}, {render_clause(c.right, CONJ)}"
        return _wrap(text, CONJ, need)
    if kind is Rule:
        return _wrap(f"{render_term(c.head)} :- {render_goal(c.body)}", FORMULA, need)
    if kind is Forall:
        return _wrap(f"forall {render_var(c.var)}. {render_clause(c.body)}", FORMULA, need)
    raise TypeError(f"not a clause: {c!r}")


def render_top_clause(c) -> str:
    """A stored clause, leaving its universal closure implicit."""
    names, matrix = closure_prefix(c, Forall)
    if names and names == clause_free_vars(matrix):
        return render_clause(matrix)
    return render_clause(c)


def render_top_goal(g) -> str:
    names, matrix = closure_prefix(g, Exists)
    if names and names == goal_free_vars(matrix):
        return render_goal(matrix)
    return render_goal(g)


def clause_items(c) -> list:
    """Split a clause body along its right spine of conjunctions."""
    items = []
    while type(c) is ClauseConj:
        items.append(c.left)
        c = c.right
    items.append(c)
    return items


def _render_block_def(d: MacroDef) -> str:
    if d.kind is MacroKind.GOAL:
        return f"/{d.name} = {render_top_goal(d.body)}."
    items = " ".join(f"{render_top_clause(i)}." for i in clause_items(d.body))
    return f"/{d.name} = {{ {items} }}"


def render_macro(d: MacroDef) -> str:
    """Module-file form: goal bodies inline, clause bodies on following lines."""
    if d.kind is MacroKind.GOAL:
        return f"/{d.name} = {render_top_goal(d.body)}."
    lines = [f"/{d.name} ="]
    lines.extend(f"    {render_top_clause(i)}." for i in clause_items(d.body))
    return "\n".join(lines)


def render_module(defs) -> str:
    return "\n".join(render_macro(d) for d in defs) + "\n"


def render_query(q: Query) -> str:
    bound = f"({q.bound}) " if q.bound is not None else ""
    return f"?- {bound}{render_goal(q.goal)}."


def render(value) -> str:
    """Render a term, goal, clause, macro definition, query or program."""
    if isinstance(value, (Var, Const, Compound)):
        return render_term(value)
    if isinstance(value, MacroDef):
        return render_macro(value)
    if isinstance(value, Query):
        return render_query(value)
    if isinstance(value, Program):
        clauses = [f"{render_top_clause(c)}." for c in value.clauses]
        macros = [render_macro(d) for d in value.macros]
        return "\n".join(clauses + macros)
    if isinstance(value, (Fact, Rule, Forall, ClauseConj)):
        return render_top_clause(value)
    return render_goal(value)
