"""Web-page modules: resolve a link origin to its macro definitions.

An origin is rewritten by a :class:`ResolutionMap` (first matching prefix
wins, one pass), then read from disk (``file:`` URIs and bare paths) or
fetched over HTTP.  Pages are cached per process by their rewritten origin.
"""

from __future__ import annotations

import os
import threading
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from . import builtins
from .ast import ClauseImpl, Conj, Exists, Link, LinkImpl, MacroKind, Program
from .errors import FetchError, LWebError, RootMissing
from .parser import parse_module_file, parse_program

MAP_ENV_VAR = "LWEB_MAP"
DEFAULT_TIMEOUT = 10.0
MAX_REDIRECTS = 3
PAGE_SUFFIX = ".lw"


@dataclass(frozen=True)
class ModulePage:
    origin: str
    defs: tuple
    root: str

    def __post_init__(self):
        if not any(d.name == self.root for d in self.defs):
            raise RootMissing(self.origin, self.root)


@dataclass(frozen=True)
class ResolutionMap:
    rules: tuple = ()

    @classmethod
    def parse(cls, text: str, base_dir: Optional[Path] = None) -> "ResolutionMap":
        """One ``prefix -> replacement`` per line; ``#`` starts a comment.

        Relative local replacements are taken relative to ``base_dir``.
        """
        rules = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "->" not in line:
                raise LWebError(f"resolution map line {lineno}: expected 'prefix -> replacement'")
            prefix, replacement = (part.strip() for part in line.split("->", 1))
            if not prefix or not replacement:
                raise LWebError(f"resolution map line {lineno}: empty prefix or replacement")
            if base_dir is not None and not _is_remote(replacement) and not replacement.startswith("file:"):
                if not os.path.isabs(replacement):
                    trailing = "/" if replacement.endswith("/") else ""
                    replacement = str((base_dir / replacement).resolve()) + trailing
            rules.append((prefix, replacement))
        return cls(tuple(rules))

    @classmethod
    def from_file(cls, path) -> "ResolutionMap":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise LWebError(f"cannot read resolution map {path}: {exc}") from exc
        return cls.parse(text, path.parent)

    @classmethod
    def from_env(cls) -> "ResolutionMap":
        path = os.environ.get(MAP_ENV_VAR)
        return cls.from_file(path) if path else cls()

    def apply(self, origin: str) -> str:
        for prefix, replacement in self.rules:
            if origin.startswith(prefix):
                return replacement + origin[len(prefix):]
        return origin


def _is_remote(location: str) -> bool:
    return location.startswith(("http://", "https://"))


class _LimitedRedirects(urllib.request.HTTPRedirectHandler):
    max_redirections = MAX_REDIRECTS


def fetch_text(location: str, timeout: float = DEFAULT_TIMEOUT) -> str:
    """Read a page body from disk or over HTTP."""
    if _is_remote(location):
        opener = urllib.request.build_opener(_LimitedRedirects)
        request = urllib.request.Request(location, headers={"Accept": "text/plain"})
        try:
            with opener.open(request, timeout=timeout) as response:
                ctype = response.headers.get_content_type()
                if not ctype.startswith("text/"):
                    raise FetchError(location, f"response is {ctype}, not text")
                charset = response.headers.get_content_charset() or "utf-8"
                return response.read().decode(charset)
        except FetchError:
            raise
        except (urllib.error.URLError, OSError, ValueError, UnicodeDecodeError) as exc:
            raise FetchError(location, exc) from exc
    if location.startswith("file:"):
        parsed = urllib.parse.urlparse(location)
        if parsed.netloc not in ("", "localhost"):
            raise FetchError(location, "file URIs must name a local path")
        path = urllib.parse.unquote(parsed.path)
    else:
        path = location
    candidates = [path] if path.endswith(PAGE_SUFFIX) else [path, path + PAGE_SUFFIX]
    for candidate in candidates:
        if os.path.isfile(candidate):
            try:
                return Path(candidate).read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                raise FetchError(location, exc) from exc
    raise FetchError(location, "no such file")


def page_root(origin: str) -> str:
    """Macro name a page is expected to define: its final path segment, sans suffix."""
    path = urllib.parse.urlparse(origin).path if _is_remote(origin) else origin
    segment = path.rstrip("/").rsplit("/", 1)[-1]
    if segment.endswith(PAGE_SUFFIX):
        segment = segment[: -len(PAGE_SUFFIX)]
    return segment


class Loader:
    """Resolves origins to pages, fetching each rewritten origin at most once."""

    def __init__(
        self,
        resolution_map: Optional[ResolutionMap] = None,
        fetcher: Optional[Callable[[str], str]] = None,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self.resolution_map = resolution_map or ResolutionMap()
        self.fetcher = fetcher or (lambda location: fetch_text(location, timeout))
        self._cache: dict[str, ModulePage] = {}
        self._lock = threading.Lock()

    def resolve(self, origin: str) -> ModulePage:
        location = self.resolution_map.apply(origin)
        page = self._cache.get(location)
        if page is not None:
            return page
        text = self.fetcher(location)
        defs = tuple(parse_module_file(text, origin))
        builtins.check_heads((d.body for d in defs if d.kind is MacroKind.CLAUSE), origin)
        root = page_root(origin)
        if not any(d.name == root for d in defs):
            fallback = page_root(location)
            if not any(d.name == fallback for d in defs):
                raise RootMissing(origin, root)
            root = fallback
        page = ModulePage(origin, defs, root)
        with self._lock:
            return self._cache.setdefault(location, page)

    def __call__(self, origin: str) -> ModulePage:
        return self.resolve(origin)

    def consult(self, origin: str) -> list:
        """Plain clause file (no macro headers) for adding clauses directly to a program."""
        location = self.resolution_map.apply(origin)
        clauses = parse_program(self.fetcher(location), origin)
        builtins.check_heads(clauses, origin)
        return clauses


def resolve(origin: str, resolution_map: Optional[ResolutionMap] = None,
            cache: Optional[Loader] = None) -> ModulePage:
    """Functional entry point; pass the same ``cache`` loader to share fetches."""
    loader = cache if cache is not None else Loader(resolution_map)
    return loader.resolve(origin)


def desugar_link(page: ModulePage, body) -> LinkImpl:
    return LinkImpl(page.root, page.defs, body)


def resolve_links(goal, loader: Loader):
    """Replace every hyperlink goal reachable without entering a macro body."""
    kind = type(goal)
    if kind is Link:
        return desugar_link(loader.resolve(goal.origin), resolve_links(goal.body, loader))
    if kind is Conj:
        return Conj(resolve_links(goal.left, loader), resolve_links(goal.right, loader))
    if kind is ClauseImpl:
        return ClauseImpl(goal.clause, resolve_links(goal.body, loader))
    if kind is LinkImpl:
        return LinkImpl(goal.root, goal.defs, resolve_links(goal.body, loader))
    if kind is Exists:
        return Exists(goal.var, resolve_links(goal.body, loader))
    return goal


def load_into(program: Program, page: ModulePage) -> Program:
    """Program extended as if every later goal ran under ``page``'s link."""
    return program.link(page.root, page.defs)
