"""Grid-game description language: AST, parser, printer and validator.

Games are written as parenthesized programs::

    (game "tic-tac-toe" (board 3 3)
      (play (order (cycle 1 2)) (place))
      (end (win (line 3 (dirs h v d1 d2)))))

Named shapes are sugar for explicit offset sets:

* ``(square n)``: the ``n`` by ``n`` block.
* ``(plus n)``: a plus sign with ``n = 4a + 1`` cells (centre plus four arms
  of length ``a``); ``(plus 5)`` is the familiar five-cell cross.
* ``(ell n)``: an L with ``n >= 3`` cells, a vertical leg of
  ``ceil((n + 1) / 2)`` cells and a foot running right from its bottom cell.

Named shapes allow every rotation and reflection.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Union

DIRECTIONS = ("h", "v", "d1", "d2")
STEPS = {"h": (0, 1), "v": (1, 0), "d1": (1, 1), "d2": (1, -1)}

EFFECTS = ("win", "lose", "draw", "win-for")


class DSLError(ValueError):
    """Raised for malformed or invalid game programs."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Line:
    k: int
    dirs: tuple[str, ...] = DIRECTIONS

    def __post_init__(self):
        dirs = tuple(d for d in DIRECTIONS if d in self.dirs)
        extra = tuple(d for d in self.dirs if d not in DIRECTIONS)
        object.__setattr__(self, "dirs", dirs + extra)


@dataclass(frozen=True)
class Shape:
    cells: tuple[tuple[int, int], ...]
    rotations: bool = False
    reflections: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cells", canonical_offsets(self.cells))

    def orientations(self) -> list[tuple[tuple[int, int], ...]]:
        """Distinct canonical footprints admitted by the orientation flags."""
        variants = [self.cells]
        if self.rotations:
            cur = self.cells
            for _ in range(3):
                cur = tuple((c, -r) for r, c in cur)
                variants.append(cur)
        if self.reflections:
            variants += [tuple((r, -c) for r, c in v) for v in variants]
        seen = []
        for v in variants:
            v = canonical_offsets(v)
            if v not in seen:
                seen.append(v)
        return seen


@dataclass(frozen=True)
class Count:
    n: int
    inner: "Condition"


@dataclass(frozen=True)
class And:
    children: tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Condition", ...]


@dataclass(frozen=True)
class Full:
    pass


Condition = Union[Line, Shape, Count, And, Or, Full]


@dataclass(frozen=True)
class EndClause:
    """One end rule.

    ``effect`` is one of ``win``/``lose`` (for the player who just moved),
    ``win-for`` (``player`` wins) or ``draw``.  ``by`` restricts the clause to
    one mover; ``None`` means either player.
    """

    effect: str
    condition: Condition
    player: int | None = None
    by: int | None = None


@dataclass(frozen=True)
class Board:
    rows: int
    cols: int

    @property
    def cells(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Schedule:
    prefix: tuple[int, ...] = ()
    cycle: tuple[int, ...] = (1, 2)

    def mover(self, ply: int) -> int:
        if ply < len(self.prefix):
            return self.prefix[ply]
        return self.cycle[(ply - len(self.prefix)) % len(self.cycle)]


@dataclass(frozen=True)
class GameSpec:
    name: str
    board: Board
    schedule: Schedule = field(default_factory=Schedule)
    clauses: tuple[EndClause, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str

    def __str__(self):
        return f"{self.severity}: {self.message}"


def canonical_offsets(cells) -> tuple[tuple[int, int], ...]:
    cells = [(int(r), int(c)) for r, c in cells]
    if not cells:
        return ()
    r0, c0 = min(cells)
    return tuple(sorted((r - r0, c - c0) for r, c in cells))


def square(n: int) -> Shape:
    return Shape(tuple((r, c) for r in range(n) for c in range(n)), True, True)


def plus(n: int) -> Shape:
    if n < 1 or (n - 1) % 4:
        raise DSLError(f"plus size must be 4a+1, got {n}")
    a = (n - 1) // 4
    cells = {(0, 0)}
    for i in range(1, a + 1):
        cells |= {(i, 0), (-i, 0), (0, i), (0, -i)}
    return Shape(tuple(cells), True, True)


def ell(n: int) -> Shape:
    if n < 3:
        raise DSLError(f"ell size must be at least 3, got {n}")
    leg = math.ceil((n + 1) / 2)
    cells = [(r, 0) for r in range(leg)]
    cells += [(leg - 1, c) for c in range(1, n - leg + 1)]
    return Shape(tuple(cells), True, True)


def line_game(name, rows, cols, k, dirs=DIRECTIONS) -> GameSpec:
    """Convenience constructor for a plain m,n,k game with alternating turns."""
    return normalize(GameSpec(name, Board(rows, cols), Schedule(),
                              (EndClause("win", Line(k, tuple(dirs))),)))


# ---------------------------------------------------------------------------
# tree helpers


def walk(cond: Condition) -> Iterator[Condition]:
    yield cond
    if isinstance(cond, Count):
        yield from walk(cond.inner)
    elif isinstance(cond, (And, Or)):
        for child in cond.children:
            yield from walk(child)


def normalize(spec: GameSpec) -> GameSpec:
    """Append the board-full draw clause when the program has no draw rule."""
    if any(c.effect == "draw" for c in spec.clauses):
        return spec
    return replace(spec, clauses=spec.clauses + (EndClause("draw", Full()),))


def swap_players(spec: GameSpec) -> GameSpec:
    """Exchange the roles of player 1 and player 2 throughout a game."""
    def sw(p):
        return None if p is None else 3 - p

    return replace(
        spec,
        schedule=Schedule(tuple(3 - p for p in spec.schedule.prefix),
                          tuple(3 - p for p in spec.schedule.cycle)),
        clauses=tuple(replace(c, player=sw(c.player), by=sw(c.by))
                      for c in spec.clauses),
    )


# ---------------------------------------------------------------------------
# tokenizer / reader

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>-?\d+(?![^\s()]))
  | (?P<sym>[^\s()";]+)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Atom:
    kind: str  # "int" | "string" | "sym"
    value: object
    line: int
    column: int


@dataclass
class _List:
    items: list
    line: int
    column: int


def _read(text: str) -> _List:
    stack: list[_List] = [_List([], 1, 1)]
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise DSLError(f"unexpected character {text[pos]!r}", line, col)
        kind, tok = m.lastgroup, m.group()
        if kind == "lpar":
            stack.append(_List([], line, col))
        elif kind == "rpar":
            if len(stack) == 1:
                raise DSLError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
        elif kind == "string":
            value = re.sub(r"\\(.)", r"\1", tok[1:-1])
            stack[-1].items.append(_Atom("string", value, line, col))
        elif kind == "int":
            stack[-1].items.append(_Atom("int", int(tok), line, col))
        elif kind == "sym":
            stack[-1].items.append(_Atom("sym", tok.lower(), line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    if len(stack) > 1:
        open_ = stack[-1]
        raise DSLError("unclosed '('", open_.line, open_.column)
    return stack[0]


def _head(node) -> str | None:
    if isinstance(node, _List) and node.items:
        first = node.items[0]
        if isinstance(first, _Atom) and first.kind == "sym":
            return first.value
    return None


def _where(node):
    return node.line, node.column


def _expect_list(node, what):
    if not isinstance(node, _List):
        raise DSLError(f"expected {what}", *_where(node))
    return node


def _int(node, what) -> int:
    if not (isinstance(node, _Atom) and node.kind == "int"):
        raise DSLError(f"expected integer for {what}", *_where(node))
    return node.value


def _arity(node, n, what):
    if len(node.items) != n:
        raise DSLError(f"{what} takes {n - 1} argument(s), got {len(node.items) - 1}",
                       *_where(node))


# ---------------------------------------------------------------------------
# parser


def parse(text: str) -> GameSpec:
    """Parse, normalize and validate a game program.

    Raises :class:`DSLError` on syntax errors, unknown keywords, wrong arity
    and invariant violations.
    """
    top = _read(text)
    if len(top.items) != 1:
        raise DSLError(f"expected exactly one (game ...) form, found {len(top.items)}")
    node = _expect_list(top.items[0], "(game ...)")
    if _head(node) != "game":
        raise DSLError("program must start with (game", *_where(node))
    _arity(node, 5, "game")
    name_node = node.items[1]
    if not (isinstance(name_node, _Atom) and name_node.kind == "string"):
        raise DSLError("game name must be a string", *_where(name_node))
    board = _parse_board(node.items[2])
    schedule = _parse_play(node.items[3])
    clauses = _parse_end(node.items[4])
    spec = normalize(GameSpec(name_node.value, board, schedule, clauses))
    errors = [d for d in validate(spec) if d.severity == "error"]
    if errors:
        raise DSLError("invalid game: " + "; ".join(d.message for d in errors))
    return spec


def _parse_board(node) -> Board:
    node = _expect_list(node, "(board ...)")
    if _head(node) != "board":
        raise DSLError("expected (board rows cols)", *_where(node))
    _arity(node, 3, "board")
    return Board(_int(node.items[1], "rows"), _int(node.items[2], "cols"))


def _parse_play(node) -> Schedule:
    node = _expect_list(node, "(play ...)")
    if _head(node) != "play":
        raise DSLError("expected (play ...)", *_where(node))
    rest = node.items[1:]
    schedule = Schedule()
    if rest and _head(rest[0]) == "order":
        schedule = _parse_order(rest[0])
        rest = rest[1:]
    if len(rest) != 1 or _head(rest[0]) != "place" or len(rest[0].items) != 1:
        raise DSLError("play must end with (place)", *_where(node))
    return schedule


def _parse_order(node) -> Schedule:
    parts = node.items[1:]
    prefix: tuple[int, ...] = ()
    if parts and _head(parts[0]) == "prefix":
        prefix = tuple(_int(x, "prefix player") for x in parts[0].items[1:])
        parts = parts[1:]
    if len(parts) != 1 or _head(parts[0]) != "cycle":
        raise DSLError("order requires a (cycle ...) form", *_where(node))
    cycle = tuple(_int(x, "cycle player") for x in parts[0].items[1:])
    if not cycle:
        raise DSLError("cycle must list at least one player", *_where(parts[0]))
    return Schedule(prefix, cycle)


def _parse_end(node) -> tuple[EndClause, ...]:
    node = _expect_list(node, "(end ...)")
    if _head(node) != "end":
        raise DSLError("expected (end ...)", *_where(node))
    if len(node.items) < 2:
        raise DSLError("end requires at least one clause", *_where(node))
    return tuple(_parse_clause(c) for c in node.items[1:])


def _parse_clause(node) -> EndClause:
    node = _expect_list(node, "end clause")
    if not node.items:
        raise DSLError("empty clause", *_where(node))
    first = node.items[0]
    player = None
    if isinstance(first, _List):
        if _head(first) != "win-for":
            raise DSLError("expected (win-for player)", *_where(first))
        _arity(first, 2, "win-for")
        effect, player = "win-for", _int(first.items[1], "win-for player")
    elif isinstance(first, _Atom) and first.kind == "sym" and first.value in ("win", "lose", "draw"):
        effect = first.value
    else:
        raise DSLError(f"unknown clause effect {getattr(first, 'value', '?')!r}", *_where(first))
    rest = node.items[1:]
    by = None
    if rest and _head(rest[0]) == "by":
        _arity(rest[0], 2, "by")
        by = _int(rest[0].items[1], "by player")
        rest = rest[1:]
    if len(rest) != 1:
        raise DSLError("clause takes exactly one condition", *_where(node))
    return EndClause(effect, _parse_cond(rest[0]), player, by)


def _parse_cond(node) -> Condition:
    node = _expect_list(node, "condition")
    head = _head(node)
    args = node.items[1:]
    if head == "line":
        if not 1 <= len(args) <= 2:
            raise DSLError("line takes a length and optional (dirs ...)", *_where(node))
        k = _int(args[0], "line length")
        dirs = DIRECTIONS
        if len(args) == 2:
            d = _expect_list(args[1], "(dirs ...)")
            if _head(d) != "dirs" or len(d.items) < 2:
                raise DSLError("expected (dirs h|v|d1|d2 ...)", *_where(d))
            dirs = []
            for a in d.items[1:]:
                if not (isinstance(a, _Atom) and a.value in DIRECTIONS):
                    raise DSLError(f"unknown direction {getattr(a, 'value', '?')!r}", *_where(a))
                dirs.append(a.value)
            dirs = tuple(dirs)
        return Line(k, dirs)
    if head == "shape":
        if not args or _head(args[0]) != "cells":
            raise DSLError("shape requires (cells (r c) ...)", *_where(node))
        pairs = []
        for p in args[0].items[1:]:
            p = _expect_list(p, "(row col) pair")
            if len(p.items) != 2:
                raise DSLError("cell offset needs two integers", *_where(p))
            pairs.append((_int(p.items[0], "row offset"), _int(p.items[1], "col offset")))
        if not pairs:
            raise DSLError("shape needs at least one cell", *_where(node))
        if len(set(pairs)) != len(pairs):
            raise DSLError("shape cells must be distinct", *_where(node))
        flags = []
        for a in args[1:]:
            if not (isinstance(a, _Atom) and a.value in ("rot", "refl")):
                raise DSLError("shape flags are 'rot' and 'refl'", *_where(a))
            flags.append(a.value)
        if flags not in ([], ["rot"], ["refl"], ["rot", "refl"]):
            raise DSLError("shape flags must be 'rot' then 'refl', each at most once",
                           *_where(node))
        return Shape(tuple(pairs), "rot" in flags, "refl" in flags)
    if head in ("square", "plus", "ell"):
        _arity(node, 2, head)
        n = _int(args[0], f"{head} size")
        if n < 1:
            raise DSLError(f"{head} size must be positive", *_where(node))
        try:
            return {"square": square, "plus": plus, "ell": ell}[head](n)
        except DSLError as e:
            raise DSLError(str(e), *_where(node)) from None
    if head == "count":
        _arity(node, 3, "count")
        return Count(_int(args[0], "count"), _parse_cond(args[1]))
    if head in ("and", "or"):
        if not args:
            raise DSLError(f"{head} needs at least one condition", *_where(node))
        children = tuple(_parse_cond(a) for a in args)
        return And(children) if head == "and" else Or(children)
    if head == "full":
        _arity(node, 1, "full")
        return Full()
    raise DSLError(f"unknown condition {head!r}", *_where(node))


# ---------------------------------------------------------------------------
# printer


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_condition(cond: Condition) -> str:
    if isinstance(cond, Line):
        return f"(line {cond.k} (dirs {' '.join(cond.dirs)}))"
    if isinstance(cond, Shape):
        cells = " ".join(f"({r} {c})" for r, c in cond.cells)
        flags = (" rot" if cond.rotations else "") + (" refl" if cond.reflections else "")
        return f"(shape (cells {cells}){flags})"
    if isinstance(cond, Count):
        return f"(count {cond.n} {print_condition(cond.inner)})"
    if isinstance(cond, (And, Or)):
        head = "and" if isinstance(cond, And) else "or"
        return f"({head} " + " ".join(print_condition(c) for c in cond.children) + ")"
    if isinstance(cond, Full):
        return "(full)"
    raise TypeError(f"not a condition: {cond!r}")


def _print_clause(c: EndClause) -> str:
    effect = f"(win-for {c.player})" if c.effect == "win-for" else c.effect
    by = f" (by {c.by})" if c.by is not None else ""
    return f"({effect}{by} {print_condition(c.condition)})"


def print_game(spec: GameSpec) -> str:
    """Canonical one-line program text; ``parse(print_game(s)) == s``."""
    sched = spec.schedule
    prefix = f"(prefix {' '.join(map(str, sched.prefix))}) " if sched.prefix else ""
    order = f"(order {prefix}(cycle {' '.join(map(str, sched.cycle))}))"
    clauses = " ".join(_print_clause(c) for c in spec.clauses)
    return (f"(game {_quote(spec.name)} (board {spec.board.rows} {spec.board.cols}) "
            f"(play {order} (place)) (end {clauses}))")


# ---------------------------------------------------------------------------
# validation


def max_pieces(spec: GameSpec, player: int) -> int:
    """Pieces ``player`` holds once the board is full."""
    sched = spec.schedule
    return sum(1 for ply in range(spec.board.cells) if sched.mover(ply) == player)


def validate(spec: GameSpec) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    err = lambda m: out.append(Diagnostic("error", m))  # noqa: E731
    board = spec.board
    if not isinstance(spec.name, str):
        err("name must be text")
    if not (isinstance(board.rows, int) and board.rows >= 1):
        err(f"board rows must be a positive integer, got {board.rows!r}")
    if not (isinstance(board.cols, int) and board.cols >= 1):
        err(f"board cols must be a positive integer, got {board.cols!r}")
    if not spec.schedule.cycle:
        err("schedule cycle must be nonempty")
    for p in spec.schedule.prefix + spec.schedule.cycle:
        if p not in (1, 2):
            err(f"schedule entry {p!r} is not a player id (1 or 2)")
    if not spec.clauses:
        err("game needs at least one end clause")
    for i, clause in enumerate(spec.clauses):
        where = f"clause {i + 1}"
        if clause.effect not in EFFECTS:
            err(f"{where}: unknown effect {clause.effect!r}")
        if clause.effect == "win-for" and clause.player not in (1, 2):
            err(f"{where}: win-for player must be 1 or 2, got {clause.player!r}")
        if clause.by is not None and clause.by not in (1, 2):
            err(f"{where}: by player must be 1 or 2, got {clause.by!r}")
        for cond in walk(clause.condition):
            err_msg = _condition_error(cond)
            if err_msg:
                err(f"{where}: {err_msg}")
    if any(d.severity == "error" for d in out):
        return out
    for i, clause in enumerate(spec.clauses):
        if isinstance(clause.condition, Full):
            continue
        players = [clause.by] if clause.by else [1, 2]
        need = _min_witness(clause.condition, board.rows, board.cols)
        if need is None or all(need > max_pieces(spec, p) for p in players):
            out.append(Diagnostic("warning", f"clause {i + 1}: condition unsatisfiable on board"))
    return out


def _condition_error(cond) -> str | None:
    if isinstance(cond, Line):
        if not (isinstance(cond.k, int) and cond.k >= 1):
            return f"line length must be >= 1, got {cond.k!r}"
        if not cond.dirs:
            return "line needs at least one direction"
        bad = [d for d in cond.dirs if d not in DIRECTIONS]
        if bad:
            return f"unknown direction(s) {bad}"
    elif isinstance(cond, Shape):
        if not cond.cells:
            return "shape needs at least one cell"
        if len(set(cond.cells)) != len(cond.cells):
            return "shape cells must be distinct"
    elif isinstance(cond, Count):
        if not (isinstance(cond.n, int) and cond.n >= 1):
            return f"count must be >= 1, got {cond.n!r}"
    elif isinstance(cond, (And, Or)):
        if not cond.children:
            return f"{type(cond).__name__.lower()} needs at least one condition"
    elif not isinstance(cond, Full):
        return f"unknown condition {cond!r}"
    return None


def _min_witness(cond, rows, cols) -> int | None:
    """Lower bound on own pieces needed to satisfy ``cond``; None if it cannot fit."""
    if isinstance(cond, Line):
        longest = {"h": cols, "v": rows, "d1": min(rows, cols), "d2": min(rows, cols)}
        return cond.k if any(cond.k <= longest[d] for d in cond.dirs) else None
    if isinstance(cond, Shape):
        for cells in cond.orientations():
            h = max(r for r, _ in cells) - min(r for r, _ in cells) + 1
            w = max(c for _, c in cells) - min(c for _, c in cells) + 1
            if h <= rows and w <= cols:
                return len(cells)
        return None
    if isinstance(cond, Full):
        return 0
    if isinstance(cond, Or):
        sizes = [s for s in (_min_witness(c, rows, cols) for c in cond.children) if s is not None]
        return min(sizes) if sizes else None
    if isinstance(cond, And):
        sizes = [_min_witness(c, rows, cols) for c in cond.children]
        return None if None in sizes else max(sizes)
    if isinstance(cond, Count):
        inner = _min_witness(cond.inner, rows, cols)
        if inner is None:
            return None
        from .engine import packing_exists
        fits = packing_exists(cond, rows, cols)
        if fits is False:
            return None
        return cond.n * inner
    raise TypeError(cond)


def in_restricted_grammar(spec: GameSpec) -> bool:
    """True for line-completion games with win/lose effects and any turn order."""
    for clause in spec.clauses:
        if clause.effect == "draw":
            if not isinstance(clause.condition, Full):
                return False
            continue
        if clause.effect not in ("win", "lose"):
            return False
        if not isinstance(clause.condition, Line):
            return False
    return True
