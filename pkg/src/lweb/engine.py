"""Proof search over a program of clauses and macro definitions.

The search alternates between goal reduction (a goal against the program)
and backchaining (an atom against one distinguished clause).  It runs on an
explicit continuation and choicepoint stack, so recursion depth in the object
program never touches the Python stack.

The same machine serves both procedures.  With ``budget=None`` it is the
unbounded one (still counting steps).  With a budget each rule application
needs at least one unit of allowance and passes one less to its premise,
except conjunction, whose right side receives what the left side left over.

Under a budget two prunings keep the search polynomial on the usual
left-recursive shapes without changing the set of (answer, length) pairs:
a conjunction skips a right-hand search it has already run from the same
bindings and left length, and an atom called again as a variant with the
same remaining budget replays the answers recorded on its first call.

A proving mode answers only whether some derivation fits the budget. Its
tables ignore the budget, keep the shortest length of each instance, and are
iterated to a fixpoint when a call loops back into one still being built.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from . import builtins
from .ast import (
    Atom,
    ClauseConj,
    ClauseImpl,
    Compound,
    Conj,
    Exists,
    Fact,
    Forall,
    Link,
    LinkImpl,
    MacroDef,
    MacroKind,
    MacroRef,
    Program,
    Rule,
    Var,
    clause_free_vars,
    goal_free_vars,
    subst_var_clause,
    subst_var_goal,
    term_vars,
)
from .errors import IllTaggedMacro, MacroNotFound, UnresolvedLink, WallClockExceeded
from .render import render_clause, render_goal
from .unify import FreshSource, Store, Substitution, apply, fresh_index


class Step(enum.IntEnum):
    """Inference rules, numbered as in the bounded proof procedure."""

    BUILTIN = 1
    LEAF = 2
    BACKCHAIN = 3
    INSTANTIATE = 4
    CLAUSE_LEFT = 5
    CLAUSE_RIGHT = 6
    CLAUSE_MACRO = 7
    DECIDE = 8
    CONJ = 9
    EXISTS = 10
    ASSUME = 11
    LINK = 12
    GOAL_MACRO = 13

    @property
    def backchaining(self) -> bool:
        return Step.LEAF <= self <= Step.CLAUSE_MACRO


@dataclass(frozen=True)
class TraceEvent:
    step: int
    rule: Step
    depth: int
    m: Optional[int]
    goal: str
    clause: Optional[str] = None

    def line(self) -> str:
        rule = "builtin" if self.rule is Step.BUILTIN else int(self.rule)
        m = "inf" if self.m is None else self.m
        return f"step={self.step} rule={rule} m={m} goal={self.goal}"


@dataclass(frozen=True)
class Answer:
    substitution: Substitution
    length: int
    trace: Optional[tuple] = None


@dataclass(frozen=True)
class BackchainState:
    distinguished: object
    program: Program
    goal_atom: object

    def __post_init__(self):
        if type(self.goal_atom) is Var:
            raise ValueError("the goal atom of a backchaining state cannot be a variable")


def lookup_macro(macros, name: str, want: MacroKind) -> MacroDef:
    """Front-most definition of ``/name``, viewed as a ``want`` body.

    A definition written in the other form is accepted when its body is
    made only of atoms, macro references and conjunctions.
    """
    for d in macros:
        if d.name == name:
            if d.kind is want:
                return d
            body = d.as_goal if want is MacroKind.GOAL else d.as_clause
            if body is None:
                raise IllTaggedMacro(name, want.value)
            return MacroDef(d.name, body, want)
    raise MacroNotFound(name)


def _macro_body(macros, name: str, want: MacroKind):
    for d in macros:
        if d.name == name:
            body = d.as_goal if want is MacroKind.GOAL else d.as_clause
            if body is None:
                raise IllTaggedMacro(name, want.value)
            return body
    raise MacroNotFound(name)


# frame tags
(_GOAL, _BACK, _CONJ_RIGHT, _DECIDE_FROM, _CLAUSE_RIGHT,
 _TABLE_END, _TABLE_RESUME, _TABLE_DONE, _TABLE_REPLAY,
 _PROVE_END, _PROVE_DONE, _PROVE_REPLAY) = range(12)

_DEADLINE_CHECK_EVERY = 2048


class _Table:
    """Answers of one tabled call: instances of the call with their lengths."""

    __slots__ = ("answers", "seen", "cuts_at_start", "cuts_elsewhere", "cut")

    def __init__(self, cuts_at_start: int):
        self.answers: list = []
        self.seen: set = set()
        self.cuts_at_start = cuts_at_start
        self.cuts_elsewhere = 0
        self.cut = False


# states of a proving table
_ACTIVE, _EVALUATED, _COMPLETE = range(3)


class _Proved:
    """Shortest known length of each instance of one variant call.

    Unlike ``_Table`` this does not depend on the caller's budget: callers
    take the entries that fit their own allowance. Calls that loop back to a
    table still being evaluated read it as it grows, and the oldest such
    table re-runs its clauses until a whole round adds nothing.
    """

    __slots__ = ("log", "best", "state", "budget", "index", "low", "looped",
                 "members", "size_at_start", "epoch")

    def __init__(self):
        self.log: list = []
        self.best: dict = {}
        self.state = _ACTIVE
        self.budget = 0
        self.index = 0
        self.low = 0
        self.looped = False
        self.members: list = []
        self.size_at_start = 0
        self.epoch = 0


class Search:
    """One proof-search run. Not thread-safe; make one per query.

    ``cut`` becomes true as soon as any branch is abandoned for lack of
    budget; it is meaningful once the answer stream is exhausted.

    ``stop_at_cut`` ends the answer stream at the first cut.

    ``prove`` only cares whether some derivation fits the budget. Calls are
    then tabled per variant rather than per variant and budget, each instance
    is handed over once with its shortest length, and answers no better than
    ones already rejected by the same continuation are skipped. The first
    answer is a genuine derivation within the budget, though not necessarily
    the first in depth-first order, and ``cut`` means nothing in this mode.
    """

    def __init__(
        self,
        program: Program,
        budget: Optional[int] = None,
        *,
        occurs_check: bool = True,
        resolver: Optional[Callable[[str], object]] = None,
        trace: bool = False,
        wall_cap_ms: Optional[int] = None,
        dedupe: Optional[bool] = None,
        stop_at_cut: bool = False,
        prove: bool = False,
    ):
        if budget is not None and budget < 0:
            raise ValueError("budget must be non-negative")
        self.program = program
        self.budget = budget
        self.store = Store(occurs_check=occurs_check)
        self.fresh = FreshSource()
        self.resolver = resolver
        self.trace = [] if trace else None
        self.wall_cap_ms = wall_cap_ms
        # Skipping states already explored is only safe to memoize when the
        # number of distinct states is bounded, i.e. under a budget.
        self.dedupe = budget is not None if dedupe is None else dedupe
        self.stop_at_cut = stop_at_cut
        self.prove = prove and budget is not None
        self.cuts = 0
        self.steps = 0
        self._tables: dict = {}
        self._closed: dict = {}
        self._proved: dict = {}
        self._active: list = []
        self._epoch = 0

    @property
    def cut(self) -> bool:
        """Whether some branch has been abandoned for lack of budget."""
        return self.cuts > 0

    # -- entry points ---------------------------------------------------------

    def solve(self, goal) -> Iterator[Answer]:
        names = goal_free_vars(goal)
        frame = (_GOAL, goal, self.program, self.budget, 0)
        return self._run(frame, names)

    def backchain(self, clause, atom) -> Iterator[Answer]:
        names = list(term_vars(atom))
        frame = (_BACK, clause, self.program, atom, self.budget, 0)
        return self._run(frame, names)

    # -- helpers ----------------------------------------------------------------

    def _make_event(self, step: int, rule: Step, depth: int, m, goal, clause=None) -> TraceEvent:
        """A rule application with ``goal`` rendered under the current bindings.

        Backchaining rules pass the atom and the distinguished clause.
        """
        if clause is not None:
            goal = Atom(goal)
        s = self.store.substitution(goal_free_vars(goal))
        return TraceEvent(
            step, rule, depth, m, render_goal(apply(s, goal)),
            None if clause is None else render_clause(clause),
        )

    def _event(self, rule: Step, depth: int, m, goal, clause=None) -> None:
        self.trace.append(self._make_event(self.steps, rule, depth, m, goal, clause))

    def _state_key(self, trail_mark: int, fresh_mark: int) -> tuple:
        """Bindings made since ``trail_mark`` to variables older than
        ``fresh_mark``, up to renaming of younger variables."""
        store = self.store
        names = sorted(
            n for n in store.trail[trail_mark:]
            if (fresh_index(n) is None or fresh_index(n) < fresh_mark)
        )
        renaming: dict = {}

        def canon(t):
            t = store.walk(t)
            if type(t) is Var:
                k = fresh_index(t.name)
                if k is not None and k >= fresh_mark:
                    return renaming.setdefault(t.name, len(renaming))
                return t
            if type(t) is Compound:
                return (t.functor, tuple(canon(a) for a in t.args))
            return t

        return tuple((n, canon(Var(n))) for n in names)

    def _canon_term(self, t, renaming: dict):
        t = self.store.walk(t)
        kind = type(t)
        if kind is Var:
            name = renaming.get(t.name)
            if name is None:
                name = renaming[t.name] = f"%{len(renaming)}"
            return Var(name)
        if kind is Compound:
            return Compound(t.functor, tuple(self._canon_term(a, renaming) for a in t.args))
        return t

    def _closed_program(self, prog: Program) -> bool:
        """Tabling assumes a call can only bind its own variables."""
        hit = self._closed.get(id(prog))
        if hit is None:
            closed = not any(clause_free_vars(c) for c in prog.clauses) and not any(
                goal_free_vars(d.body) if d.kind is MacroKind.GOAL else clause_free_vars(d.body)
                for d in prog.macros
            )
            hit = self._closed[id(prog)] = (prog, closed)
        return hit[1]

    def _refresh(self, t, renaming: dict):
        kind = type(t)
        if kind is Var:
            v = renaming.get(t.name)
            if v is None:
                v = renaming[t.name] = self.fresh.var()
            return v
        if kind is Compound:
            return Compound(t.functor, tuple(self._refresh(a, renaming) for a in t.args))
        return t

    # -- proving tables -------------------------------------------------------------

    def _prove_call(self, term, prog, m, depth, cont, choices):
        """Continuation for a tabled call in proving mode."""
        key = (id(prog), self._canon_term(term, {}))
        table = self._proved.get(key)
        active = self._active
        if table is not None:
            if table.state == _ACTIVE:
                # a loop back into a table under evaluation
                table.looped = True
                top = active[-1]
                top.low = min(top.low, table.index)
                return (_PROVE_REPLAY, table.log, 0, term, m, {}), cont
            if m <= table.budget and (table.state == _COMPLETE or table.epoch == self._epoch):
                if table.state == _EVALUATED:
                    top = active[-1]
                    top.low = min(top.low, table.low)
                return (_PROVE_REPLAY, table.log, 0, term, m, {}), cont
        else:
            table = self._proved[key] = _Proved()
        table.state = _ACTIVE
        table.budget = m
        table.index = table.low = len(active)
        active.append(table)
        return self._prove_round(table, term, prog, m, depth, cont, choices)

    def _prove_round(self, table, term, prog, m, depth, cont, choices):
        table.looped = False
        table.members = []
        table.size_at_start = len(table.log)
        choices.append(((_PROVE_DONE, table, term, prog, m, depth), cont,
                        len(self.store.trail), self.steps, 0))
        end = (_PROVE_END, table, term, self.steps)
        self.steps += 1
        return (_DECIDE_FROM, prog, 0, term, m - 1, depth + 1), (end, None)

    def _prove_done(self, frame, cont, choices):
        """All clauses tried for this round: repeat, complete, or defer to the leader."""
        _, table, term, prog, m, depth = frame
        active = self._active
        if table.low == table.index:
            grew = any(len(t.log) != t.size_at_start for t in table.members)
            if table.looped and (grew or len(table.log) != table.size_at_start):
                self._epoch += 1
                return self._prove_round(table, term, prog, m, depth, cont, choices)
            table.state = _COMPLETE
            for member in table.members:
                member.state = _COMPLETE
            table.members = []
            active.pop()
        else:
            table.state = _EVALUATED
            table.epoch = self._epoch
            active.pop()
            parent = active[-1]
            parent.low = min(parent.low, table.low)
            parent.members.extend(table.members)
            parent.members.append(table)
            table.members = []
        return (_PROVE_REPLAY, table.log, 0, term, m, {}), cont

    # -- the machine --------------------------------------------------------------

    def _run(self, frame, answer_names) -> Iterator[Answer]:
        store = self.store
        fresh = self.fresh
        trace = self.trace
        choices: list = []
        cont = (frame, None)
        deadline = None
        if self.wall_cap_ms is not None:
            deadline = time.monotonic() + self.wall_cap_ms / 1000.0
        tick = 0
        tabling = self.budget is not None and trace is None

        while True:
            if deadline is not None:
                tick += 1
                if tick >= _DEADLINE_CHECK_EVERY:
                    tick = 0
                    if time.monotonic() > deadline:
                        raise WallClockExceeded(self.wall_cap_ms)

            failed = False
            if cont is None:
                yield Answer(
                    store.substitution(answer_names),
                    self.steps,
                    None if trace is None else tuple(trace),
                )
                failed = True
            else:
                frame, cont = cont
                tag = frame[0]

                if tag == _GOAL:
                    _, goal, prog, m, depth = frame
                    if m is not None and m <= 0:
                        self.cuts += 1
                        failed = True
                    else:
                        m1 = None if m is None else m - 1
                        kind = type(goal)
                        if kind is Atom:
                            term = goal.term
                            fn = builtins.lookup(term)
                            if fn is not None:
                                args = term.args if type(term) is Compound else ()
                                # traced as called, before the builtin binds anything
                                event = None if trace is None else \
                                    self._make_event(self.steps + 1, Step.BUILTIN, depth, m, goal)
                                if fn(args, store):
                                    self.steps += 1
                                    if event is not None:
                                        trace.append(event)
                                else:
                                    failed = True
                            elif tabling and self.prove and self._closed_program(prog):
                                cont = self._prove_call(term, prog, m, depth, cont, choices)
                            elif tabling and self._closed_program(prog):
                                key = (id(prog), m, self._canon_term(term, {}))
                                table = self._tables.get(key)
                                if table is not None:
                                    if table.cut:
                                        self.cuts += 1
                                    cont = ((_TABLE_REPLAY, table, 0, term), cont)
                                else:
                                    table = _Table(self.cuts)
                                    choices.append(((_TABLE_DONE, table, key), None,
                                                    len(store.trail), self.steps, 0))
                                    end = (_TABLE_END, table, term, self.steps)
                                    self.steps += 1
                                    cont = ((_DECIDE_FROM, prog, 0, term, m1, depth + 1), (end, cont))
                            else:
                                self.steps += 1
                                if trace is not None:
                                    self._event(Step.DECIDE, depth, m, goal)
                                cont = ((_DECIDE_FROM, prog, 0, term, m1, depth + 1), cont)
                        elif kind is Conj:
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.CONJ, depth, m, goal)
                            memo = {} if self.dedupe else None
                            right = (_CONJ_RIGHT, goal.right, prog, m1, self.steps, depth + 1,
                                     memo, len(store.trail), fresh.peek())
                            cont = ((_GOAL, goal.left, prog, m1, depth + 1), (right, cont))
                        elif kind is MacroRef:
                            body = _macro_body(prog.macros, goal.name, MacroKind.GOAL)
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.GOAL_MACRO, depth, m, goal)
                            cont = ((_GOAL, body, prog, m1, depth + 1), cont)
                        elif kind is ClauseImpl:
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.ASSUME, depth, m, goal)
                            cont = ((_GOAL, goal.body, prog.assume(goal.clause), m1, depth + 1), cont)
                        elif kind is LinkImpl or kind is Link:
                            if kind is Link:
                                if self.resolver is None:
                                    raise UnresolvedLink(goal.origin)
                                page = self.resolver(goal.origin)
                                root, defs = page.root, page.defs
                            else:
                                root, defs = goal.root, goal.defs
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.LINK, depth, m, goal)
                            cont = ((_GOAL, goal.body, prog.link(root, defs), m1, depth + 1), cont)
                        elif kind is Exists:
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.EXISTS, depth, m, goal)
                            body = subst_var_goal(goal.body, goal.var, fresh.var(goal.var))
                            cont = ((_GOAL, body, prog, m1, depth + 1), cont)
                        else:
                            raise TypeError(f"not a goal: {goal!r}")

                elif tag == _BACK:
                    _, clause, prog, atom, m, depth = frame
                    if m is not None and m <= 0:
                        self.cuts += 1
                        failed = True
                    else:
                        m1 = None if m is None else m - 1
                        kind = type(clause)
                        if kind is Fact:
                            if store.unify(clause.atom, atom):
                                self.steps += 1
                                if trace is not None:
                                    self._event(Step.LEAF, depth, m, atom, clause)
                            else:
                                failed = True
                        elif kind is Rule:
                            if store.unify(clause.head, atom):
                                self.steps += 1
                                if trace is not None:
                                    self._event(Step.BACKCHAIN, depth, m, atom, clause)
                                cont = ((_GOAL, clause.body, prog, m1, depth + 1), cont)
                            else:
                                failed = True
                        elif kind is Forall:
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.INSTANTIATE, depth, m, atom, clause)
                            body = subst_var_clause(clause.body, clause.var, fresh.var(clause.var))
                            cont = ((_BACK, body, prog, atom, m1, depth + 1), cont)
                        elif kind is ClauseConj:
                            choices.append((
                                (_CLAUSE_RIGHT, clause, prog, atom, m, depth),
                                cont, len(store.trail), self.steps,
                                0 if trace is None else len(trace),
                            ))
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.CLAUSE_LEFT, depth, m, atom, clause)
                            cont = ((_BACK, clause.left, prog, atom, m1, depth + 1), cont)
                        elif kind is MacroRef:
                            body = _macro_body(prog.macros, clause.name, MacroKind.CLAUSE)
                            self.steps += 1
                            if trace is not None:
                                self._event(Step.CLAUSE_MACRO, depth, m, atom, clause)
                            cont = ((_BACK, body, prog, atom, m1, depth + 1), cont)
                        else:
                            raise TypeError(f"not a clause: {clause!r}")

                elif tag == _CONJ_RIGHT:
                    _, right, prog, m1, start, depth, memo, trail_mark, fresh_mark = frame
                    used = self.steps - start
                    if memo is not None:
                        state = self._state_key(trail_mark, fresh_mark)
                        tried = memo.get(state)
                        if tried is None:
                            memo[state] = {used}
                        elif used in tried or (self.prove and min(tried) <= used):
                            failed = True
                        else:
                            tried.add(used)
                    if not failed:
                        m2 = None if m1 is None else m1 - used
                        cont = ((_GOAL, right, prog, m2, depth), cont)

                elif tag == _DECIDE_FROM:
                    _, prog, i, atom, m, depth = frame
                    clauses = prog.clauses
                    if i >= len(clauses):
                        failed = True
                    else:
                        if i + 1 < len(clauses):
                            choices.append((
                                (_DECIDE_FROM, prog, i + 1, atom, m, depth),
                                cont, len(store.trail), self.steps,
                                0 if trace is None else len(trace),
                            ))
                        cont = ((_BACK, clauses[i], prog, atom, m, depth), cont)

                elif tag == _TABLE_END:
                    _, table, term, start = frame
                    answer = (self._canon_term(term, {}), self.steps - start)
                    if answer not in table.seen:
                        table.seen.add(answer)
                        table.answers.append(answer)
                    # cuts made by the caller's continuation are not the call's own
                    choices.append(((_TABLE_RESUME, table, self.cuts), None, len(store.trail), self.steps, 0))

                elif tag == _TABLE_RESUME:
                    _, table, cuts_then = frame
                    table.cuts_elsewhere += self.cuts - cuts_then
                    failed = True

                elif tag == _TABLE_DONE:
                    _, table, key = frame
                    table.cut = self.cuts - table.cuts_at_start - table.cuts_elsewhere > 0
                    self._tables[key] = table
                    failed = True

                elif tag == _TABLE_REPLAY:
                    _, table, i, term = frame
                    if i >= len(table.answers):
                        failed = True
                    else:
                        if i + 1 < len(table.answers):
                            choices.append(((_TABLE_REPLAY, table, i + 1, term), cont,
                                            len(store.trail), self.steps, 0))
                        instance, length = table.answers[i]
                        if store.unify(term, self._refresh(instance, {})):
                            self.steps += length
                        else:
                            failed = True

                elif tag == _PROVE_END:
                    _, table, term, start = frame
                    instance = self._canon_term(term, {})
                    length = self.steps - start
                    if length < table.best.get(instance, length + 1):
                        table.best[instance] = length
                        table.log.append((instance, length))
                    # the caller is resumed once the table is evaluated
                    failed = True

                elif tag == _PROVE_DONE:
                    cont = self._prove_done(frame, cont, choices)

                elif tag == _PROVE_REPLAY:
                    _, log, i, term, m, tried = frame
                    while i < len(log):
                        instance, length = log[i]
                        if length <= m and tried.get(instance, length + 1) > length:
                            break
                        i += 1
                    if i >= len(log):
                        failed = True
                    else:
                        choices.append(((_PROVE_REPLAY, log, i + 1, term, m, tried), cont,
                                        len(store.trail), self.steps, 0))
                        tried[instance] = length
                        if store.unify(term, self._refresh(instance, {})):
                            self.steps += length
                        else:
                            failed = True

                else:  # _CLAUSE_RIGHT
                    _, conj, prog, atom, m, depth = frame
                    self.steps += 1
                    if trace is not None:
                        self._event(Step.CLAUSE_RIGHT, depth, m, atom, conj)
                    m1 = None if m is None else m - 1
                    cont = ((_BACK, conj.right, prog, atom, m1, depth + 1), cont)

            if failed:
                if self.stop_at_cut and self.cuts:
                    return
                if not choices:
                    return
                frame, cont, trail_mark, steps, trace_len = choices.pop()
                store.undo(trail_mark)
                self.steps = steps
                if trace is not None:
                    del trace[trace_len:]
                cont = (frame, cont)


# ---------------------------------------------------------------------------
# Unbounded procedure
# ---------------------------------------------------------------------------


def solve(
    program: Program,
    goal,
    *,
    occurs_check: bool = True,
    resolver=None,
    wall_cap_ms: Optional[int] = None,
) -> Iterator[Substitution]:
    """Lazily enumerate answers in depth-first order. May not terminate."""
    search = Search(program, None, occurs_check=occurs_check, resolver=resolver,
                    wall_cap_ms=wall_cap_ms)
    for answer in search.solve(goal):
        yield answer.substitution


def solve_counted(program: Program, goal, **options) -> Iterator[Answer]:
    """Like :func:`solve`, also reporting how many rule applications each proof used."""
    return Search(program, None, **options).solve(goal)


def backchain(state: BackchainState, **options) -> Iterator[Substitution]:
    search = Search(state.program, None, **options)
    for answer in search.backchain(state.distinguished, state.goal_atom):
        yield answer.substitution
