"""Command-line front end and REPL.

Exit status of a query: 0 proved, 1 no proof, 2 no proof within the bound,
3 error, 4 wall-clock cap hit by an unbounded query.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from typing import Iterator, Optional, TextIO

from . import builtins
from .ast import Program, goal_clauses
from .bounded import BoundExhausted, Success, exec, format_trace
from .engine import Answer, Search
from .errors import LWebError, WallClockExceeded
from .loader import MAP_ENV_VAR, Loader, ResolutionMap, load_into, resolve_links
from .parser import parse_query
from .render import render_term

EXIT_SUCCESS, EXIT_FAILURE, EXIT_BOUND, EXIT_ERROR, EXIT_TIMEOUT = range(5)


@dataclass(frozen=True)
class SessionConfig:
    default_bound: Optional[int] = None
    resolution_map: Optional[str] = None
    occurs_check: bool = True
    trace: bool = False
    max_solutions: Optional[int] = 1  # None: all
    wall_clock_cap_ms: int = 30000


class Session:
    """Program state shared by the queries of one CLI invocation or REPL."""

    def __init__(self, config: SessionConfig = SessionConfig(), out: TextIO = None,
                 err: TextIO = None, loader: Optional[Loader] = None):
        self.config = config
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        if loader is None:
            rmap = ResolutionMap.from_file(config.resolution_map) if config.resolution_map else ResolutionMap()
            loader = Loader(rmap)
        self.loader = loader
        self.program = Program()
        self._pending: Optional[Iterator[Answer]] = None
        self._pending_bounded = False
        self._printed = 0

    def say(self, text: str) -> None:
        print(text, file=self.out)

    def complain(self, text: str) -> None:
        print(f"error: {text}", file=self.err)

    # -- program state ----------------------------------------------------------

    def load(self, origin: str) -> None:
        page = self.loader.resolve(origin)
        self.program = load_into(self.program, page)

    def consult(self, origin: str) -> None:
        self.program = self.program.with_clauses(self.loader.consult(origin))

    # -- queries --------------------------------------------------------------

    def run_query(self, text: str, first_only: bool = False) -> int:
        """Run one query and print its report; returns the exit status.

        With ``first_only`` later answers are left for :meth:`next_answer`.
        """
        self._pending = None
        try:
            query = parse_query(text)
            goal = resolve_links(query.goal, self.loader)
            builtins.check_heads(goal_clauses(goal), "<query>")
        except LWebError as exc:
            self.complain(str(exc))
            return EXIT_ERROR
        bound = query.bound if query.bound is not None else self.config.default_bound
        self._printed = 0
        self._pending_bounded = bound is not None
        if bound is not None and not first_only and self.config.max_solutions == 1:
            return self._run_exec(goal, bound)
        search = Search(
            self.program,
            bound,
            occurs_check=self.config.occurs_check,
            resolver=self.loader,
            trace=self.config.trace,
            wall_cap_ms=None if bound is not None else self.config.wall_clock_cap_ms,
        )
        answers = search.solve(goal)
        status = self._emit(answers, 1 if first_only else self.config.max_solutions)
        if status is not None:
            return status
        if self._printed:
            return EXIT_SUCCESS
        if bound is not None and search.cut:
            self.say("unknown (bound exhausted)")
            return EXIT_BOUND
        self.say("no")
        return EXIT_FAILURE

    def _run_exec(self, goal, bound: int) -> int:
        """A single bounded answer: decided by :func:`exec`."""
        try:
            result = exec(self.program, goal, bound, occurs_check=self.config.occurs_check,
                          resolver=self.loader, trace=self.config.trace)
        except LWebError as exc:
            self.complain(str(exc))
            return EXIT_ERROR
        except RecursionError:
            self.complain("term too deep to process")
            return EXIT_ERROR
        if isinstance(result, Success):
            self._print_answer(Answer(result.answer, result.length, result.trace))
            return EXIT_SUCCESS
        if isinstance(result, BoundExhausted):
            self.say("unknown (bound exhausted)")
            return EXIT_BOUND
        self.say("no")
        return EXIT_FAILURE

    def next_answer(self) -> int:
        """Continue the last query by one more answer (the REPL's ``;``)."""
        limit = self.config.max_solutions
        if self._pending is None:
            self.say("no more answers")
            return EXIT_FAILURE
        if limit is not None and self._printed >= limit:
            self.say(f"no more answers (max solutions = {limit})")
            return EXIT_FAILURE
        before = self._printed
        status = self._emit(self._pending, 1)
        if status is not None:
            return status
        if self._printed == before:
            self.say("no more answers")
            return EXIT_FAILURE
        return EXIT_SUCCESS

    def _emit(self, answers: Iterator[Answer], count: Optional[int]) -> Optional[int]:
        """Print up to ``count`` answers; returns an exit status only on error or timeout."""
        self._pending = None
        printed_here = 0
        try:
            while count is None or printed_here < count:
                answer = next(answers, None)
                if answer is None:
                    return None
                self._print_answer(answer)
                printed_here += 1
                self._printed += 1
        except WallClockExceeded as exc:
            if self._printed:
                self.say(f"(stopped looking for more answers: {exc})")
                return None
            self.say(f"timeout ({exc})")
            return EXIT_TIMEOUT
        except LWebError as exc:
            self.complain(str(exc))
            return EXIT_ERROR
        except RecursionError:
            self.complain("term too deep to process")
            return EXIT_ERROR
        self._pending = answers
        return None

    def _print_answer(self, answer: Answer) -> None:
        if answer.trace is not None:
            self.say(format_trace(answer.trace))
        bindings = ", ".join(
            f"{name} = {render_term(value)}"
            for name, value in answer.substitution.items()
            if not name.startswith("_")
        )
        text = bindings or "yes"
        if self._pending_bounded:
            text += f", length = {answer.length}"
        self.say(text)


# ---------------------------------------------------------------------------
# REPL
# ---------------------------------------------------------------------------

HELP = """commands:
  ?- [(N)] goal.      run a query (the '?-' may be omitted)
  ;                   next answer of the last query
  :load ORIGIN        add a page's definitions to the session program
  :consult FILE       add plain clauses to the session program
  :bound N|off        default proof-step bound
  :trace on|off       print the rule applications of each proof
  :max N|all          cap on the answers reachable with ';'
  :help               this text
  :quit               leave"""


def run_repl(session: Session, stdin: TextIO = None, interactive: Optional[bool] = None) -> int:
    stdin = stdin or sys.stdin
    if interactive is None:
        interactive = stdin.isatty()
    buffer = ""
    while True:
        if interactive:
            session.out.write("| " if buffer else "lweb> ")
            session.out.flush()
        line = stdin.readline()
        if not line:
            if buffer:
                session.complain("incomplete query at end of input (missing '.')")
            return EXIT_SUCCESS
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        if buffer and line.startswith((":", ";")):
            session.complain("incomplete query discarded (missing '.')")
            buffer = ""
        if buffer:
            buffer += " " + line
            if not buffer.endswith("."):
                continue
            line, buffer = buffer, ""
        elif not line.startswith((":", ";")) and not line.endswith("."):
            buffer = line
            continue
        try:
            if _repl_command(session, line) == "quit":
                return EXIT_SUCCESS
        except KeyboardInterrupt:
            session.say("interrupted")
        except LWebError as exc:
            session.complain(str(exc))


def _repl_command(session: Session, line: str) -> Optional[str]:
    if line == ";":
        session.next_answer()
        return None
    if line.startswith(":"):
        command, _, arg = line[1:].partition(" ")
        arg = arg.strip()
        config = session.config
        if command in ("quit", "q", "halt"):
            return "quit"
        if command == "help":
            session.say(HELP)
        elif command == "load":
            session.load(arg)
            session.say(f"loaded {arg}")
        elif command == "consult":
            session.consult(arg)
            session.say(f"consulted {arg}")
        elif command == "bound":
            if arg in ("off", "none"):
                session.config = replace(config, default_bound=None)
            elif arg.isdigit():
                session.config = replace(config, default_bound=int(arg))
            else:
                session.complain(":bound expects a non-negative integer or 'off'")
                return None
            session.say(f"bound = {session.config.default_bound if session.config.default_bound is not None else 'off'}")
        elif command == "trace":
            if arg not in ("on", "off"):
                session.complain(":trace expects 'on' or 'off'")
                return None
            session.config = replace(config, trace=arg == "on")
        elif command == "max":
            if arg == "all":
                session.config = replace(config, max_solutions=None)
            elif arg.isdigit() and int(arg) > 0:
                session.config = replace(config, max_solutions=int(arg))
            else:
                session.complain(":max expects a positive integer or 'all'")
        else:
            session.complain(f"unknown command :{command} (try :help)")
        return None
    if not line.startswith("?-"):
        line = "?- " + line
    session.run_query(line, first_only=True)
    return None


# ---------------------------------------------------------------------------
# main
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lweb",
        description="Horn clauses with embedded implications, macro modules and length-bounded queries.",
    )
    parser.add_argument("query", nargs="?", help="query such as '?- (1000) p(X).'; omit for the REPL")
    parser.add_argument("--bound", type=int, metavar="N", help="default proof-step bound")
    parser.add_argument("--map", metavar="FILE", default=os.environ.get(MAP_ENV_VAR),
                        help=f"resolution map file (default: ${MAP_ENV_VAR})")
    parser.add_argument("--no-occurs-check", action="store_true", help="unify without the occurs check")
    parser.add_argument("--trace", action="store_true", help="print the rule applications of each proof")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true", help="print every answer")
    group.add_argument("--max-solutions", type=int, metavar="N",
                       help="answers to print (default 1; in the REPL, answers reachable with ';')")
    parser.add_argument("--wall-cap", type=int, metavar="MS", default=30000,
                        help="wall-clock cap for unbounded queries in milliseconds (default 30000)")
    parser.add_argument("--load", action="append", default=[], metavar="ORIGIN",
                        help="page to add to the program (repeatable)")
    parser.add_argument("--consult", action="append", default=[], metavar="FILE",
                        help="plain clause file to add to the program (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.bound is not None and args.bound < 0:
        print("error: --bound must be non-negative", file=sys.stderr)
        return EXIT_ERROR
    if args.max_solutions is not None and args.max_solutions < 1:
        print("error: --max-solutions must be positive", file=sys.stderr)
        return EXIT_ERROR
    config = SessionConfig(
        default_bound=args.bound,
        resolution_map=args.map,
        occurs_check=not args.no_occurs_check,
        trace=args.trace,
        max_solutions=None if args.all else args.max_solutions or (1 if args.query else None),
        wall_clock_cap_ms=args.wall_cap,
    )
    try:
        session = Session(config)
        for origin in args.consult:
            session.consult(origin)
        for origin in args.load:
            session.load(origin)
    except LWebError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.query is None:
        return run_repl(session)
    return session.run_query(args.query)


if __name__ == "__main__":
    sys.exit(main())
