"""Reference implementations the engine is checked against.

None of these share code with the package beyond the AST classes: they have
their own unification, their own search and their own fixpoint evaluation.
They favour obviousness over speed and are only run on small inputs.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional

from lweb.ast import (
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
    Program,
    Rule,
    Var,
    close_clause,
    close_goal,
    make_list,
)

CONSTANTS = ("a", "b")


# ---------------------------------------------------------------------------
# Textbook unification over immutable dict substitutions
# ---------------------------------------------------------------------------


def walk(t, s: dict):
    while isinstance(t, Var):
        nxt = s.get(t.name, t)
        if nxt == t:
            break
        t = nxt
    return t


def resolve(t, s: dict):
    t = walk(t, s)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(resolve(a, s) for a in t.args))
    return t


def occurs(name: str, t, s: dict) -> bool:
    t = walk(t, s)
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Compound):
        return any(occurs(name, a, s) for a in t.args)
    return False


def robinson(t1, t2, s: Optional[dict] = None) -> Optional[dict]:
    """Recursive unification with occurs check; returns a new triangular substitution."""
    s = dict(s or {})
    t1, t2 = walk(t1, s), walk(t2, s)
    if t1 == t2:
        return s
    if isinstance(t1, Var):
        if occurs(t1.name, t2, s):
            return None
        s[t1.name] = t2
        return s
    if isinstance(t2, Var):
        return robinson(t2, t1, s)
    if isinstance(t1, Compound) and isinstance(t2, Compound):
        if t1.functor != t2.functor or len(t1.args) != len(t2.args):
            return None
        for a, b in zip(t1.args, t2.args):
            s = robinson(a, b, s)
            if s is None:
                return None
        return s
    return None


def match(pattern, target, s: dict) -> Optional[dict]:
    """One-way matching: extend ``s`` so that ``pattern`` instantiated equals ``target``."""
    if isinstance(pattern, Var):
        if pattern.name in s:
            return s if s[pattern.name] == target else None
        return {**s, pattern.name: target}
    if isinstance(pattern, Compound):
        if not isinstance(target, Compound) or pattern.functor != target.functor \
                or len(pattern.args) != len(target.args):
            return None
        for p, t in zip(pattern.args, target.args):
            s = match(p, t, s)
            if s is None:
                return None
        return s
    return s if pattern == target else None


def is_instance(general: dict, specific: dict, names) -> bool:
    """Whether ``specific`` restricted to ``names`` factors through ``general``."""
    theta: Optional[dict] = {}
    for n in names:
        theta = match(resolve(Var(n), general), resolve(Var(n), specific), theta)
        if theta is None:
            return False
    return True


def term_var_names(t, acc=None) -> list:
    acc = [] if acc is None else acc
    if isinstance(t, Var):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, Compound):
        for a in t.args:
            term_var_names(a, acc)
    return acc


# -- enumeration oracle --------------------------------------------------------

SMALL_GROUND = tuple(
    [Const(c) for c in CONSTANTS]
    + [Compound("g", (Const(c),)) for c in CONSTANTS]
    + [Compound("f", (Const(x), Const(y))) for x in CONSTANTS for y in CONSTANTS]
)


def ground_unifiers(t1, t2) -> list[dict]:
    """Every assignment of small ground terms to the pair's variables that equates them."""
    names = term_var_names(t2, term_var_names(t1))
    found = []
    for values in itertools.product(SMALL_GROUND, repeat=len(names)):
        theta = dict(zip(names, values))
        if resolve(t1, theta) == resolve(t2, theta):
            found.append(theta)
    return found


def random_term(rng: random.Random, depth: int, var_names=("X", "Y")):
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        return Var(rng.choice(var_names)) if rng.random() < 0.5 else Const(rng.choice(CONSTANTS))
    if roll < 0.6:
        return Compound("g", (random_term(rng, depth - 1, var_names),))
    return Compound("f", (random_term(rng, depth - 1, var_names), random_term(rng, depth - 1, var_names)))


def random_pair(rng: random.Random):
    """Term pairs biased towards unifiable ones: half are two instances of a common pattern."""
    if rng.random() < 0.5:
        return random_term(rng, 2), random_term(rng, 2)
    base = random_term(rng, 2, ("U", "V"))
    s1 = {"U": random_term(rng, 1), "V": random_term(rng, 1)}
    s2 = {"U": random_term(rng, 1), "V": random_term(rng, 1)}
    return resolve(base, s1), resolve(base, s2)


# ---------------------------------------------------------------------------
# Random pure-Horn programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HornClause:
    head: Compound | Const
    body: tuple = ()

    def variables(self) -> list:
        acc: list = []
        for t in (self.head, *self.body):
            term_var_names(t, acc)
        return acc

    def to_clause(self):
        matrix = Fact(self.head) if not self.body else Rule(self.head, _conj(self.body))
        for name in reversed(self.variables()):
            matrix = Forall(name, matrix)
        return matrix


def _conj(atoms):
    goal = Atom(atoms[-1])
    for a in reversed(atoms[:-1]):
        goal = Conj(Atom(a), goal)
    return goal


@dataclass
class HornProgram:
    clauses: list
    arities: dict = field(default_factory=dict)

    def program(self) -> Program:
        return Program(tuple(c.to_clause() for c in self.clauses))

    def ground_atoms(self) -> list:
        atoms = []
        for name, arity in sorted(self.arities.items()):
            for args in itertools.product(CONSTANTS, repeat=arity):
                atoms.append(_atom(name, tuple(Const(a) for a in args)))
        return atoms


def _atom(name, args):
    return Compound(name, args) if args else Const(name)


def random_horn_program(rng: random.Random, max_clauses: int = 4,
                        predicates=("p", "q", "r"), max_body: int = 2) -> HornProgram:
    arities = {p: rng.randint(0, 2) for p in predicates}

    def atom():
        name = rng.choice(predicates)
        args = tuple(
            Var(rng.choice(("X", "Y"))) if rng.random() < 0.6 else Const(rng.choice(CONSTANTS))
            for _ in range(arities[name])
        )
        return _atom(name, args)

    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        body = tuple(atom() for _ in range(rng.choice(range(max_body + 1))))
        clauses.append(HornClause(atom(), body))
    return HornProgram(clauses, arities)


def left_recursive_program(rng: random.Random) -> tuple[Program, object]:
    """A graph walk whose recursive clause calls itself first, plus a ground query."""
    nodes = [Const(f"n{i}") for i in range(rng.randint(2, 6))]
    edges = {(rng.choice(nodes), rng.choice(nodes)) for _ in range(rng.randint(1, 8))}
    X, Y, Z = Var("X"), Var("Y"), Var("Z")
    path = lambda a, b: Compound("path", (a, b))
    edge = lambda a, b: Compound("edge", (a, b))
    clauses = [
        Forall("X", Forall("Y", Forall("Z", Rule(path(X, Y), Conj(Atom(path(X, Z)), Atom(edge(Z, Y))))))),
        Forall("X", Forall("Y", Rule(path(X, Y), Atom(edge(X, Y))))),
    ]
    if rng.random() < 0.5:
        clauses.reverse()
    if rng.random() < 0.3:
        # the doubly left-recursive variant
        clauses.insert(0, Forall("X", Forall("Y", Forall("Z", Rule(
            path(X, Y), Conj(Atom(path(X, Z)), Atom(path(Z, Y))))))))
    clauses += [Fact(edge(a, b)) for a, b in sorted(edges, key=repr)]
    query = Atom(path(rng.choice(nodes), rng.choice(nodes)))
    return Program(tuple(clauses)), query


# ---------------------------------------------------------------------------
# Random programs and goals mixing every form
# ---------------------------------------------------------------------------


def _mixed_term(rng, names=("X", "Y")):
    if names and rng.random() < 0.5:
        return Var(rng.choice(names))
    return Const(rng.choice(CONSTANTS))


def _mixed_atom(rng, arities, names=("X", "Y")):
    name = rng.choice(sorted(arities))
    args = tuple(_mixed_term(rng, names) for _ in range(arities[name]))
    return Compound(name, args) if args else Const(name)


def _mixed_clause(rng, arities, depth):
    roll = rng.random()
    if depth <= 0 or roll < 0.4:
        return Fact(_mixed_atom(rng, arities))
    if roll < 0.6:
        return Rule(_mixed_atom(rng, arities), _mixed_goal(rng, arities, depth - 1))
    if roll < 0.8:
        return Forall(rng.choice("XY"), _mixed_clause(rng, arities, depth - 1))
    if roll < 0.9:
        return ClauseConj(_mixed_clause(rng, arities, depth - 1), _mixed_clause(rng, arities, depth - 1))
    return MacroRef("c")


def _mixed_goal(rng, arities, depth):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        return Atom(_mixed_atom(rng, arities))
    if roll < 0.55:
        return Conj(_mixed_goal(rng, arities, depth - 1), _mixed_goal(rng, arities, depth - 1))
    if roll < 0.7:
        return ClauseImpl(_mixed_clause(rng, arities, depth - 1), _mixed_goal(rng, arities, depth - 1))
    if roll < 0.8:
        return Exists(rng.choice("XY"), _mixed_goal(rng, arities, depth - 1))
    if roll < 0.9:
        return MacroRef("m")
    defs = (MacroDef("c", Fact(_mixed_atom(rng, arities, ())), MacroKind.CLAUSE),)
    return LinkImpl("c", defs, _mixed_goal(rng, arities, depth - 1))


def random_case(rng):
    """A program (with macros /m and /c), a goal and a bound."""
    horn = random_horn_program(rng)
    macros = (
        MacroDef("m", Atom(_mixed_atom(rng, horn.arities, ())), MacroKind.GOAL),
        MacroDef("c", Fact(_mixed_atom(rng, horn.arities, ())), MacroKind.CLAUSE),
    )
    clauses = horn.program().clauses
    if rng.random() < 0.3:
        clauses = (MacroRef("c"),) + clauses
    goal = _mixed_goal(rng, horn.arities, 3)
    return Program(clauses, macros), goal, rng.randint(0, 40)


# ---------------------------------------------------------------------------
# Bottom-up evaluation
# ---------------------------------------------------------------------------


def _ground_instances(clause: HornClause) -> Iterator[tuple]:
    names = clause.variables()
    for values in itertools.product(CONSTANTS, repeat=len(names)):
        theta = {n: Const(v) for n, v in zip(names, values)}
        yield resolve(clause.head, theta), tuple(resolve(b, theta) for b in clause.body), len(names)


def fixpoint(horn: HornProgram) -> set:
    """Least Herbrand model by naive forward chaining."""
    instances = [inst[:2] for c in horn.clauses for inst in _ground_instances(c)]
    model: set = set()
    changed = True
    while changed:
        changed = False
        for head, body in instances:
            if head not in model and all(b in model for b in body):
                model.add(head)
                changed = True
    return model


def min_costs(horn: HornProgram) -> dict:
    """Shortest derivation length of each provable ground atom.

    A clause with k quantified variables and j body atoms costs
    decide + k instantiations + leaf/backchain, plus j - 1 conjunction steps
    and the body atoms' own costs.  Computed Knuth-style (a Dijkstra variant
    for superior functions).
    """
    instances = []
    for c in horn.clauses:
        for head, body, k in _ground_instances(c):
            base = 2 + k + max(len(body) - 1, 0)
            instances.append((head, body, base))
    best: dict = {}
    queue = []
    for head, body, base in instances:
        if not body:
            heapq.heappush(queue, (base, repr(head), head))
    waiting = [(head, body, base) for head, body, base in instances if body]
    while queue:
        cost, _, atom = heapq.heappop(queue)
        if atom in best:
            continue
        best[atom] = cost
        for head, body, base in waiting:
            if head not in best and atom in body and all(b in best for b in body):
                heapq.heappush(queue, (base + sum(best[b] for b in body), repr(head), head))
    return best


# ---------------------------------------------------------------------------
# Literal transcription of the bounded rules
# ---------------------------------------------------------------------------


class Reference:
    """The length-bounded rules as recursive generators of ``(substitution, n)``.

    Only for small budgets: recursion depth grows with ``m``.
    """

    def __init__(self):
        self.cut = False
        self._counter = itertools.count()

    def _fresh(self, base: str) -> Var:
        return Var(f"{base}~ref{next(self._counter)}")

    def goal(self, g, prog: Program, s: dict, m: int):
        if m <= 0:
            self.cut = True
            return
        kind = type(g)
        if kind is Atom:
            term = resolve(g.term, s)
            name = term.functor if isinstance(term, Compound) else term.value
            arity = len(term.args) if isinstance(term, Compound) else 0
            if (name, arity) == ("eq", 2):
                s2 = robinson(term.args[0], term.args[1], s)
                if s2 is not None:
                    yield s2, 1
                return
            if (name, arity) == ("neq", 2):
                left, right = (resolve(a, s) for a in term.args)
                if term_var_names(left) or term_var_names(right):
                    raise ValueError("neq on non-ground arguments")
                if left != right:
                    yield s, 1
                return
            for d in prog.clauses:
                for s2, n in self.back(d, prog, term, s, m - 1):
                    yield s2, n + 1
        elif kind is Conj:
            for s1, n1 in self.goal(g.left, prog, s, m - 1):
                for s2, n2 in self.goal(g.right, prog, s1, m - 1 - n1):
                    yield s2, n1 + n2 + 1
        elif kind is MacroRef:
            body = _lookup(prog, g.name, MacroKind.GOAL)
            for s2, n in self.goal(body, prog, s, m - 1):
                yield s2, n + 1
        elif kind is ClauseImpl:
            for s2, n in self.goal(g.body, prog.assume(g.clause), s, m - 1):
                yield s2, n + 1
        elif kind is LinkImpl:
            for s2, n in self.goal(g.body, prog.link(g.root, g.defs), s, m - 1):
                yield s2, n + 1
        elif kind is Exists:
            body = _rename_goal(g.body, g.var, self._fresh(g.var))
            for s2, n in self.goal(body, prog, s, m - 1):
                yield s2, n + 1
        else:
            raise TypeError(g)

    def back(self, d, prog: Program, atom, s: dict, m: int):
        if m <= 0:
            self.cut = True
            return
        kind = type(d)
        if kind is Fact:
            s2 = robinson(d.atom, atom, s)
            if s2 is not None:
                yield s2, 1
        elif kind is Rule:
            s1 = robinson(d.head, atom, s)
            if s1 is not None:
                for s2, n in self.goal(d.body, prog, s1, m - 1):
                    yield s2, n + 1
        elif kind is Forall:
            body = _rename_clause(d.body, d.var, self._fresh(d.var))
            for s2, n in self.back(body, prog, atom, s, m - 1):
                yield s2, n + 1
        elif kind is ClauseConj:
            for part in (d.left, d.right):
                for s2, n in self.back(part, prog, atom, s, m - 1):
                    yield s2, n + 1
        elif kind is MacroRef:
            body = _lookup(prog, d.name, MacroKind.CLAUSE)
            for s2, n in self.back(body, prog, atom, s, m - 1):
                yield s2, n + 1
        else:
            raise TypeError(d)


def _lookup(prog: Program, name: str, want: MacroKind):
    for d in prog.macros:
        if d.name == name:
            body = d.as_goal if want is MacroKind.GOAL else d.as_clause
            if body is None:
                raise ValueError(f"/{name} cannot be used as a {want.value}")
            return body
    raise KeyError(name)


def _rename_term(t, old: str, new: Var):
    if isinstance(t, Var):
        return new if t.name == old else t
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_rename_term(a, old, new) for a in t.args))
    return t


def _rename_goal(g, old: str, new: Var):
    kind = type(g)
    if kind is Atom:
        return Atom(_rename_term(g.term, old, new))
    if kind is Conj:
        return Conj(_rename_goal(g.left, old, new), _rename_goal(g.right, old, new))
    if kind is ClauseImpl:
        return ClauseImpl(_rename_clause(g.clause, old, new), _rename_goal(g.body, old, new))
    if kind is Exists:
        return g if g.var == old else Exists(g.var, _rename_goal(g.body, old, new))
    if kind is LinkImpl:
        return LinkImpl(g.root, g.defs, _rename_goal(g.body, old, new))
    return g


def _rename_clause(c, old: str, new: Var):
    kind = type(c)
    if kind is Fact:
        return Fact(_rename_term(c.atom, old, new))
    if kind is Rule:
        return Rule(_rename_term(c.head, old, new), _rename_goal(c.body, old, new))
    if kind is Forall:
        return c if c.var == old else Forall(c.var, _rename_clause(c.body, old, new))
    if kind is ClauseConj:
        return ClauseConj(_rename_clause(c.left, old, new), _rename_clause(c.right, old, new))
    return c


def canonical(terms) -> tuple:
    """Tuple of terms with variables renamed by order of first occurrence."""
    names: dict = {}

    def canon(t):
        if isinstance(t, Var):
            return ("var", names.setdefault(t.name, len(names)))
        if isinstance(t, Compound):
            return (t.functor, tuple(canon(a) for a in t.args))
        return t

    return tuple(canon(t) for t in terms)


@dataclass
class ReferenceRun:
    answers: list
    cut: bool

    @property
    def first_length(self) -> Optional[int]:
        return self.answers[0][1] if self.answers else None

    def answer_set(self) -> set:
        return {(a, n) for a, n in self.answers}


def reference_run(program: Program, goal, m: int, names) -> ReferenceRun:
    ref = Reference()
    answers = []
    for s, n in ref.goal(goal, program, {}, m):
        answers.append((canonical([resolve(Var(v), s) for v in names]), n))
    return ReferenceRun(answers, ref.cut)


# ---------------------------------------------------------------------------
# Random syntax trees (user-level variable names only)
# ---------------------------------------------------------------------------

_NAMES = ("p", "q", "edge", "memb")
_VARS = ("X", "Y", "Zs")
_MACROS = ("g", "lib", "m2")


def random_user_term(rng: random.Random, depth: int = 2):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        pick = rng.random()
        if pick < 0.45:
            return Var(rng.choice(_VARS))
        if pick < 0.85:
            return Const(rng.choice(CONSTANTS + ("nil", "tokyo")))
        return Const(rng.randint(-3, 40))
    if roll < 0.55:
        items = [random_user_term(rng, depth - 1) for _ in range(rng.randint(0, 3))]
        tail = Var("T") if items and rng.random() < 0.3 else Const("[]")
        return make_list(items, tail)
    return Compound(rng.choice(("f", "g", "s")),
                    tuple(random_user_term(rng, depth - 1) for _ in range(rng.randint(1, 2))))


def random_atom(rng: random.Random):
    name = rng.choice(_NAMES)
    arity = rng.randint(0, 2)
    return _atom(name, tuple(random_user_term(rng) for _ in range(arity)))


def random_goal(rng: random.Random, depth: int = 3):
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        return Atom(random_atom(rng)) if rng.random() < 0.85 else MacroRef(rng.choice(_MACROS))
    if roll < 0.5:
        return Conj(random_goal(rng, depth - 1), random_goal(rng, depth - 1))
    if roll < 0.65:
        return ClauseImpl(random_clause(rng, depth - 1), random_goal(rng, depth - 1))
    if roll < 0.75:
        return Exists(rng.choice(_VARS), random_goal(rng, depth - 1))
    if roll < 0.85:
        return Link(rng.choice(("www.d.com/lists", "./pages/arcs.lw", "https://example.org/a/b")),
                    random_goal(rng, depth - 1))
    defs = random_defs(rng, depth - 1)
    return LinkImpl(rng.choice(defs).name, defs, random_goal(rng, depth - 1))


def random_clause(rng: random.Random, depth: int = 2):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        return Fact(random_atom(rng)) if rng.random() < 0.85 else MacroRef(rng.choice(_MACROS))
    if roll < 0.65:
        return Rule(random_atom(rng), random_goal(rng, depth - 1))
    if roll < 0.8:
        return Forall(rng.choice(_VARS), random_clause(rng, depth - 1))
    return ClauseConj(random_clause(rng, depth - 1), random_clause(rng, depth - 1))


def random_defs(rng: random.Random, depth: int = 2) -> tuple:
    """Macro definitions as a module file or block would produce them: bodies closed."""
    defs = []
    for name in rng.sample(_MACROS, rng.randint(1, len(_MACROS))):
        if rng.random() < 0.5:
            defs.append(MacroDef(name, close_goal(random_goal(rng, depth)), MacroKind.GOAL))
        else:
            defs.append(MacroDef(name, close_clause(random_clause(rng, depth)), MacroKind.CLAUSE))
    return tuple(defs)


# ---------------------------------------------------------------------------
# Adversarial left recursion
# ---------------------------------------------------------------------------

_ADVERSARIAL_SHAPES = (
    # a graph walk whose recursive clause calls itself first
    """path(X,Y) :- path(X,Z), edge(Z,Y).
path(X,Y) :- edge(X,Y).""",
    # both premises recursive, in the transitive-closure style
    """path(X,Y) :- path(X,Z), path(Z,Y).
path(X,Y) :- edge(X,Y).""",
    # the base case listed last
    """path(X,Y) :- edge(X,Y), fail_never.
path(X,Y) :- path(X,Z), edge(Z,Y).
path(X,Y) :- edge(X,Y).""",
    # mutual left recursion
    """path(X,Y) :- hop(X,Z), edge(Z,Y).
hop(X,Y) :- path(X,Y).
hop(X,X) :- node(X).""",
    # left recursion through a goal that builds ever larger terms
    """path(X,Y) :- walk(X,Y,L).
walk(X,Y,s(L)) :- walk(X,Z,L), edge(Z,Y).
walk(X,Y,z) :- edge(X,Y).""",
    # a pure self loop next to the real definition
    """path(X,Y) :- path(X,Y).
path(X,Y) :- path(Y,X).
path(X,Y) :- edge(X,Y).""",
)


@dataclass(frozen=True)
class AdversarialCase:
    shape: int
    text: str
    query: str
    provable: bool  # by graph reachability, independent of any proof search

    def program(self) -> Program:
        from lweb.parser import parse_program

        return Program(tuple(parse_program(self.text)))


def _reachable(edges, start) -> set:
    seen, todo = set(), [start]
    while todo:
        for a, b in edges:
            if a == todo[-1] and b not in seen:
                seen.add(b)
                todo.append(b)
                break
        else:
            todo.pop()
    return seen


def adversarial_program(rng: random.Random, index: int) -> AdversarialCase:
    """The ``index``-th case: a left-recursive shape over a random small graph."""
    shape = index % len(_ADVERSARIAL_SHAPES)
    nodes = [f"n{i}" for i in range(rng.randint(3, 8))]
    edges = sorted({(rng.choice(nodes), rng.choice(nodes)) for _ in range(rng.randint(2, 12))})
    lines = [_ADVERSARIAL_SHAPES[shape]]
    lines += [f"edge({a},{b})." for a, b in edges]
    lines += [f"node({n})." for n in nodes]
    a, b = rng.choice(nodes), rng.choice(nodes)
    if shape == 5:
        # no transitivity here: just the edges, in either direction
        provable = (a, b) in edges or (b, a) in edges
    else:
        provable = b in _reachable(edges, a)
    return AdversarialCase(shape, "\n".join(lines) + "\n", f"path({a},{b})", provable)
