"""Game execution: immutable states, transitions, end-rule evaluation and goal progress.

Conditions are evaluated on a pair of boolean grids, ``own`` (the player's
pieces) and ``opp`` (cells the player cannot use).  Instances of a condition
(a concrete run, a concrete shape placement, ...) are represented as Python
int bitmasks over row-major cell indices so disjointness is a single ``&``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .dsl import (STEPS, And, Condition, Count, Full, GameSpec, Line, Or, Shape)

EMPTY = 0


class Outcome(enum.IntEnum):
    DRAW = 0
    P1_WIN = 1
    P2_WIN = 2

    @classmethod
    def win_for(cls, player: int) -> "Outcome":
        return cls.P1_WIN if player == 1 else cls.P2_WIN


class IllegalMove(ValueError):
    pass


class GameOver(IllegalMove):
    """Raised when a move or move query is made on a finished game."""


@dataclass(frozen=True, eq=False)
class GameState:
    spec: GameSpec
    cells: np.ndarray  # (rows, cols) int8: 0 empty, 1/2 player pieces
    ply: int
    outcome: Outcome | None = None

    @property
    def mover(self) -> int:
        return self.spec.schedule.mover(self.ply)

    @property
    def terminal(self) -> bool:
        return self.outcome is not None

    @classmethod
    def from_cells(cls, spec: GameSpec, cells) -> "GameState":
        """Build a state from an explicit grid (ply inferred from the piece count)."""
        cells = np.array(cells, dtype=np.int8)
        if cells.shape != (spec.board.rows, spec.board.cols):
            raise ValueError(f"grid shape {cells.shape} does not match the board")
        cells.setflags(write=False)
        state = cls(spec, cells, int(np.count_nonzero(cells)))
        return cls(spec, cells, state.ply, terminal_status(state))

    def __eq__(self, other):
        return (isinstance(other, GameState) and self.spec == other.spec
                and self.ply == other.ply and np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash((self.spec, self.ply, self.cells.tobytes()))

    def __str__(self):
        glyph = {0: ".", 1: "X", 2: "O"}
        return "\n".join(" ".join(glyph[int(v)] for v in row) for row in self.cells)


def new_state(spec: GameSpec) -> GameState:
    cells = np.zeros((spec.board.rows, spec.board.cols), dtype=np.int8)
    cells.setflags(write=False)
    return GameState(spec, cells, 0)


def legal_moves(state: GameState) -> list[tuple[int, int]]:
    if state.terminal:
        raise GameOver("game is over; no legal moves")
    rows, cols = np.nonzero(state.cells == EMPTY)
    return list(zip(rows.tolist(), cols.tolist()))


def apply_move(state: GameState, cell) -> GameState:
    if state.terminal:
        raise GameOver("game is over")
    r, c = cell
    rows, cols = state.cells.shape
    if not (0 <= r < rows and 0 <= c < cols):
        raise IllegalMove(f"cell {cell} is off the {rows}x{cols} board")
    if state.cells[r, c] != EMPTY:
        raise IllegalMove(f"cell {cell} is occupied")
    cells = state.cells.copy()
    cells[r, c] = state.mover
    cells.setflags(write=False)
    nxt = GameState(state.spec, cells, state.ply + 1)
    return GameState(state.spec, cells, nxt.ply, terminal_status(nxt))


def _view(cells: np.ndarray, player: int):
    return cells == player, cells == 3 - player


def check_condition(state: GameState, player: int, cond: Condition) -> bool:
    return check(cond, *_view(state.cells, player))


def condition_progress(state: GameState, player: int, cond: Condition,
                       and_mode: str = "mean") -> float:
    return progress(cond, *_view(state.cells, player), and_mode=and_mode)


def terminal_status(state: GameState, spec: GameSpec | None = None) -> Outcome | None:
    """Outcome of the game after the last placement, or None if play continues."""
    spec = spec or state.spec
    if state.ply == 0:
        return None
    mover = spec.schedule.mover(state.ply - 1)
    own, opp = _view(state.cells, mover)
    for clause in spec.clauses:
        if clause.by is not None and clause.by != mover:
            continue
        if check(clause.condition, own, opp):
            return _resolve(clause, mover)
    if state.ply >= state.cells.size:
        return Outcome.DRAW
    return None


def _resolve(clause, mover: int) -> Outcome:
    if clause.effect == "win":
        return Outcome.win_for(mover)
    if clause.effect == "lose":
        return Outcome.win_for(3 - mover)
    if clause.effect == "win-for":
        return Outcome.win_for(clause.player)
    return Outcome.DRAW


# ---------------------------------------------------------------------------
# geometry


@lru_cache(maxsize=None)
def board_lines(rows: int, cols: int, direction: str) -> tuple[tuple[int, ...], ...]:
    """Maximal straight lines of flat cell indices along ``direction``."""
    dr, dc = STEPS[direction]
    lines = []
    for r in range(rows):
        for c in range(cols):
            pr, pc = r - dr, c - dc
            if 0 <= pr < rows and 0 <= pc < cols:
                continue  # not a line start
            cells = []
            rr, cc = r, c
            while 0 <= rr < rows and 0 <= cc < cols:
                cells.append(rr * cols + cc)
                rr, cc = rr + dr, cc + dc
            lines.append(tuple(cells))
    return tuple(lines)


@lru_cache(maxsize=None)
def shape_placements(shape: Shape, rows: int, cols: int) -> np.ndarray:
    """(placements, size) array of flat indices for every on-board placement."""
    out = []
    for offsets in shape.orientations():
        off = np.array(offsets)
        rmin, cmin = off.min(axis=0)
        rmax, cmax = off.max(axis=0)
        for r in range(-rmin, rows - rmax):
            for c in range(-cmin, cols - cmax):
                out.append((off[:, 0] + r) * cols + off[:, 1] + c)
    if not out:
        return np.zeros((0, len(shape.cells)), dtype=np.int64)
    return np.unique(np.sort(np.array(out), axis=1), axis=0)


def _mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


# ---------------------------------------------------------------------------
# condition semantics


def check(cond: Condition, own: np.ndarray, opp: np.ndarray) -> bool:
    if isinstance(cond, Line):
        return _line_check(cond, own)
    if isinstance(cond, Shape):
        pl = shape_placements(cond, *own.shape)
        return bool(len(pl)) and bool(own.ravel()[pl].all(axis=1).any())
    if isinstance(cond, Full):
        return bool((own | opp).all())
    if isinstance(cond, And):
        return all(check(c, own, opp) for c in cond.children)
    if isinstance(cond, Or):
        return any(check(c, own, opp) for c in cond.children)
    if isinstance(cond, Count):
        return len(max_packing(instances(cond.inner, own, opp), cond.n)) >= cond.n
    raise TypeError(f"not a condition: {cond!r}")


def _line_check(cond: Line, own: np.ndarray) -> bool:
    rows, cols = own.shape
    flat = own.ravel()
    k = cond.k
    for d in cond.dirs:
        for line in board_lines(rows, cols, d):
            if len(line) < k:
                continue
            run = 0
            for i in line:
                run = run + 1 if flat[i] else 0
                if run >= k:
                    return True
    return False


def line_value(values, k: int) -> float:
    """Best extendable-run fraction along one line.

    ``values`` holds 1 for own, -1 for blocked and 0 for empty cells.  A run of
    own pieces counts only if the unblocked segment around it has room for k.
    """
    best = 0.0
    n = len(values)
    i = 0
    while i < n:
        if values[i] < 0:
            i += 1
            continue
        j = i
        run = longest = 0
        while j < n and values[j] >= 0:
            run = run + 1 if values[j] > 0 else 0
            longest = max(longest, run)
            j += 1
        if j - i >= k and longest:
            best = max(best, min(longest, k) / k)
        i = j
    return best


def _line_progress(cond: Line, own, opp) -> float:
    rows, cols = own.shape
    vals = own.ravel().astype(np.int8) - opp.ravel().astype(np.int8)
    best = 0.0
    for d in cond.dirs:
        for line in board_lines(rows, cols, d):
            if len(line) >= cond.k:
                best = max(best, line_value(vals[list(line)], cond.k))
    return best


def progress(cond: Condition, own: np.ndarray, opp: np.ndarray,
             and_mode: str = "mean") -> float:
    """Normalized goal progress in [0, 1]; equals 1 exactly when ``check`` holds."""
    if isinstance(cond, Line):
        return _line_progress(cond, own, opp)
    if isinstance(cond, Shape):
        pl = shape_placements(cond, *own.shape)
        if not len(pl):
            return 0.0
        usable = ~opp.ravel()[pl].any(axis=1)
        if not usable.any():
            return 0.0
        counts = own.ravel()[pl[usable]].sum(axis=1)
        return float(counts.max()) / pl.shape[1]
    if isinstance(cond, Full):
        return float((own | opp).mean())
    if isinstance(cond, Or):
        return max(progress(c, own, opp, and_mode) for c in cond.children)
    if isinstance(cond, And):
        vals = [progress(c, own, opp, and_mode) for c in cond.children]
        return min(vals) if and_mode == "min" else sum(vals) / len(vals)
    if isinstance(cond, Count):
        packing = max_packing(instances(cond.inner, own, opp), cond.n)
        if len(packing) >= cond.n:
            return 1.0
        # the used cells are unavailable to the next instance
        used = np.zeros(own.size, dtype=bool)
        for inst in packing:
            used[[i for i in range(own.size) if inst >> i & 1]] = True
        used = used.reshape(own.shape)
        extra = progress(cond.inner, own & ~used, opp | used, and_mode)
        return min(1.0, (len(packing) + extra) / cond.n)
    raise TypeError(f"not a condition: {cond!r}")


INSTANCE_LIMIT = 20000


class TooManyInstances(RuntimeError):
    pass


def instances(cond: Condition, own: np.ndarray, opp: np.ndarray) -> list[int]:
    """Distinct completed instances of ``cond`` as cell bitmasks, in a fixed order."""
    rows, cols = own.shape
    flat = own.ravel()
    if isinstance(cond, Line):
        out = []
        for d in cond.dirs:
            for line in board_lines(rows, cols, d):
                run = 0
                for j, i in enumerate(line):
                    run = run + 1 if flat[i] else 0
                    if run >= cond.k:
                        out.append(_mask(line[j - cond.k + 1:j + 1]))
        return list(dict.fromkeys(out))
    if isinstance(cond, Shape):
        pl = shape_placements(cond, rows, cols)
        if not len(pl):
            return []
        return [_mask(p) for p in pl[flat[pl].all(axis=1)]]
    if isinstance(cond, Full):
        return [0] if bool((own | opp).all()) else []
    if isinstance(cond, Or):
        out = []
        for c in cond.children:
            out += instances(c, own, opp)
        return list(dict.fromkeys(out))
    if isinstance(cond, And):
        parts = [instances(c, own, opp) for c in cond.children]
        total = 1
        for p in parts:
            total *= len(p)
        if total > INSTANCE_LIMIT:
            raise TooManyInstances(f"{total} combined instances")
        out = []
        for combo in product(*parts):
            m = 0
            for x in combo:
                m |= x
            out.append(m)
        return list(dict.fromkeys(out))
    if isinstance(cond, Count):
        inner = instances(cond.inner, own, opp)
        out = []
        _packings(inner, cond.n, 0, 0, 0, out)
        return list(dict.fromkeys(out))
    raise TypeError(f"not a condition: {cond!r}")


def _packings(items, n, start, used, depth, out):
    if depth == n:
        out.append(used)
        if len(out) > INSTANCE_LIMIT:
            raise TooManyInstances("too many packings")
        return
    for i in range(start, len(items)):
        if not items[i] & used:
            _packings(items, n, i + 1, used | items[i], depth + 1, out)


def max_packing(items: list[int], n: int) -> list[int]:
    """A largest set of pairwise disjoint instances, searched up to size ``n``.

    Backtracking in list order, so the first packing found is deterministic.
    """
    best: list[int] = []
    chosen: list[int] = []

    def rec(start, used):
        nonlocal best
        if len(chosen) > len(best):
            best = chosen.copy()
        if len(best) >= n:
            return True
        if len(chosen) + (len(items) - start) <= len(best):
            return False
        for i in range(start, len(items)):
            if not items[i] & used:
                chosen.append(items[i])
                if rec(i + 1, used | items[i]):
                    return True
                chosen.pop()
        return False

    rec(0, 0)
    return best[:n]


def packing_exists(cond: Count, rows: int, cols: int) -> bool | None:
    """Whether ``cond.n`` disjoint instances fit on an all-own board (None if too costly)."""
    own = np.ones((rows, cols), dtype=bool)
    try:
        inner = instances(cond.inner, own, ~own)
    except TooManyInstances:
        return None
    return len(max_packing(inner, cond.n)) >= cond.n
