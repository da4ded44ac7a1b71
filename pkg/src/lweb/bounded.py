"""Length-bounded proof search.

``exec(program, goal, m)`` succeeds when some derivation of ``goal`` uses at
most ``m`` rule applications, and reports how many the first one found used.
A search that finds nothing distinguishes "no proof at all" from "no proof
within the allowance".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .ast import Program
from .engine import Search, TraceEvent
from .unify import Substitution


@dataclass(frozen=True)
class Success:
    answer: Substitution
    length: int
    trace: Optional[tuple] = None


@dataclass(frozen=True)
class Failure:
    """The search space was exhausted without any branch hitting the bound."""


@dataclass(frozen=True)
class BoundExhausted:
    """No proof was found, and at least one branch was cut by the bound."""


SolveOutcome = Union[Success, Failure, BoundExhausted]


def exec(program: Program, goal, m: int, *, occurs_check: bool = True,
         resolver=None, trace: bool = False) -> SolveOutcome:
    """Run ``goal`` within ``m`` proof steps.

    The depth-first search runs until its first answer or its first cut.
    Either way that settles the outcome, and if it never cut the reported
    answer is the first in depth-first order. After a cut without an answer,
    a proving search decides whether some derivation fits and reports one.
    """
    options = dict(occurs_check=occurs_check, resolver=resolver, trace=trace)
    search = Search(program, m, stop_at_cut=True, **options)
    answer = next(iter(search.solve(goal)), None)
    if answer is None and search.cut:
        answer = next(iter(Search(program, m, prove=True, **options).solve(goal)), None)
        if answer is None:
            return BoundExhausted()
    if answer is None:
        return Failure()
    assert answer.length <= m, (answer.length, m)
    return Success(answer.substitution, answer.length, answer.trace)


def pv_bounded(program: Program, goal, m: int, **options) -> Iterator[tuple[Substitution, int]]:
    """Every answer within ``m`` steps with its proof length, in search order."""
    search = Search(program, m, **options)
    for answer in search.solve(goal):
        yield answer.substitution, answer.length


def min_proof_length(program: Program, goal, cap: int, **options) -> Optional[int]:
    """Smallest ``n <= cap`` for which ``exec`` succeeds, found by iterative deepening."""
    for m in range(1, cap + 1):
        result = exec(program, goal, m, **options)
        if isinstance(result, Success):
            return m
        if isinstance(result, Failure):
            return None
    return None


def format_trace(events) -> str:
    """One ``step=<i> rule=<id> m=<m> goal=<goal>`` line per event."""
    return "\n".join(e.line() for e in events)


def replay_length(events) -> int:
    """Number of rule applications recorded in a success trace."""
    return sum(1 for e in events if isinstance(e, TraceEvent))
