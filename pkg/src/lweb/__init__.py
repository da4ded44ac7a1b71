"""Horn clauses with embedded implications, macro modules and web-page
modules, with an unbounded and a length-bounded proof procedure."""

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
    Program,
    Query,
    Rule,
    Var,
)
from .bounded import BoundExhausted, Failure, Success, exec, min_proof_length, pv_bounded
from .engine import Answer, BackchainState, Search, Step, TraceEvent, backchain, lookup_macro, solve
from .errors import (
    BuiltinRedefinition,
    FetchError,
    IllTaggedMacro,
    InstantiationError,
    LWebError,
    MacroNotFound,
    ParseError,
    RootMissing,
    UnresolvedLink,
    WallClockExceeded,
)
from .loader import Loader, ModulePage, ResolutionMap, resolve
from .parser import parse_clause, parse_goal, parse_module_file, parse_program, parse_query, parse_term
from .render import render
from .unify import Substitution, apply, rename_apart, unify

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "apply",
    "Atom",
    "backchain",
    "BackchainState",
    "BoundExhausted",
    "BuiltinRedefinition",
    "ClauseConj",
    "ClauseImpl",
    "Compound",
    "Conj",
    "Const",
    "exec",
    "Exists",
    "Fact",
    "Failure",
    "FetchError",
    "Forall",
    "IllTaggedMacro",
    "InstantiationError",
    "Link",
    "LinkImpl",
    "Loader",
    "lookup_macro",
    "LWebError",
    "MacroDef",
    "MacroKind",
    "MacroNotFound",
    "MacroRef",
    "min_proof_length",
    "ModulePage",
    "parse_clause",
    "parse_goal",
    "parse_module_file",
    "parse_program",
    "parse_query",
    "parse_term",
    "ParseError",
    "Program",
    "pv_bounded",
    "Query",
    "rename_apart",
    "render",
    "ResolutionMap",
    "resolve",
    "RootMissing",
    "Rule",
    "Search",
    "solve",
    "Step",
    "Substitution",
    "Success",
    "TraceEvent",
    "unify",
    "UnresolvedLink",
    "Var",
    "WallClockExceeded",
]
