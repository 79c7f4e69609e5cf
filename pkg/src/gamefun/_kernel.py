"""Compiled playout loop for games whose end rules use only lines and board-full.

Mirrors :mod:`gamefun.engine` / :mod:`gamefun.agents` exactly; the Python
path is the reference and the tests compare the two move for move.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .dsl import DIRECTIONS, Full, GameSpec, Line
from .engine import board_lines

EFF_WIN, EFF_LOSE, EFF_WINFOR, EFF_DRAW = 0, 1, 2, 3
COND_LINE, COND_FULL = 0, 1
_EFFECT_CODE = {"win": EFF_WIN, "lose": EFF_LOSE, "win-for": EFF_WINFOR, "draw": EFF_DRAW}

RANDOM, GAMER = 0, 1


@dataclass(frozen=True, eq=False)
class CompiledGame:
    rows: int
    cols: int
    prefix: np.ndarray
    cycle: np.ndarray
    clauses: np.ndarray      # (C, 6) int64: effect, target, scope, ctype, k, dirmask
    line_id: np.ndarray      # (4, ncells)
    line_cells: np.ndarray   # (4, nlines, maxlen), -1 padded
    line_len: np.ndarray     # (4, nlines)
    n_lines: np.ndarray      # (4,)


def compile_game(spec: GameSpec) -> CompiledGame | None:
    """Array form of ``spec``, or None when a clause uses shapes/counts/composition."""
    rows, cols = spec.board.rows, spec.board.cols
    table = []
    for c in spec.clauses:
        cond = c.condition
        if isinstance(cond, Line):
            mask = sum(1 << DIRECTIONS.index(d) for d in cond.dirs)
            table.append((_EFFECT_CODE[c.effect], c.player or 0, c.by or 0, COND_LINE, cond.k, mask))
        elif isinstance(cond, Full):
            table.append((_EFFECT_CODE[c.effect], c.player or 0, c.by or 0, COND_FULL, 0, 0))
        else:
            return None
    n = rows * cols
    maxlen = max(rows, cols)
    nl_max = rows + cols - 1
    line_id = np.full((4, n), -1, dtype=np.int64)
    line_cells = np.full((4, nl_max, maxlen), -1, dtype=np.int64)
    line_len = np.zeros((4, nl_max), dtype=np.int64)
    n_lines = np.zeros(4, dtype=np.int64)
    for d, name in enumerate(DIRECTIONS):
        lines = board_lines(rows, cols, name)
        n_lines[d] = len(lines)
        for lid, cells in enumerate(lines):
            line_len[d, lid] = len(cells)
            line_cells[d, lid, :len(cells)] = cells
            line_id[d, list(cells)] = lid
    return CompiledGame(rows, cols,
                        np.array(spec.schedule.prefix, dtype=np.int64),
                        np.array(spec.schedule.cycle, dtype=np.int64),
                        np.array(table, dtype=np.int64).reshape(-1, 6),
                        line_id, line_cells, line_len, n_lines)


@nb.njit(cache=True)
def _mover(prefix, cycle, ply):
    if ply < prefix.shape[0]:
        return prefix[ply]
    return cycle[(ply - prefix.shape[0]) % cycle.shape[0]]


@nb.njit(cache=True)
def _line_value(board, cells, length, player, k, ov_cell, ov_val):
    # mirrors engine.line_value; ov_cell is treated as holding ov_val
    best = 0.0
    i = 0
    while i < length:
        ci = cells[i]
        v = ov_val if ci == ov_cell else board[ci]
        if v != 0 and v != player:
            i += 1
            continue
        j = i
        run = 0
        longest = 0
        while j < length:
            cj = cells[j]
            w = ov_val if cj == ov_cell else board[cj]
            if w != 0 and w != player:
                break
            if w == player:
                run += 1
                if run > longest:
                    longest = run
            else:
                run = 0
            j += 1
        if j - i >= k and longest > 0:
            val = min(longest, k) / k
            if val > best:
                best = val
        i = j
    return best


@nb.njit(cache=True)
def _tops(board, player, k, dmask, line_cells, line_len, n_lines, out1, out1_lid, out2):
    for d in range(4):
        out1[d] = 0.0
        out1_lid[d] = -1
        out2[d] = 0.0
        if not (dmask >> d) & 1:
            continue
        for lid in range(n_lines[d]):
            ln = line_len[d, lid]
            if ln < k:
                continue
            v = _line_value(board, line_cells[d, lid], ln, player, k, -1, 0)
            if v > out1[d]:
                out2[d] = out1[d]
                out1[d] = v
                out1_lid[d] = lid
            elif v > out2[d]:
                out2[d] = v


@nb.njit(cache=True)
def _run_through(board, cell, player, rows, cols, dr, dc):
    r = cell // cols
    c = cell % cols
    n = 1
    rr, cc = r + dr, c + dc
    while 0 <= rr < rows and 0 <= cc < cols and board[rr * cols + cc] == player:
        n += 1
        rr += dr
        cc += dc
    rr, cc = r - dr, c - dc
    while 0 <= rr < rows and 0 <= cc < cols and board[rr * cols + cc] == player:
        n += 1
        rr -= dr
        cc -= dc
    return n


_DR = np.array([0, 1, 1, 1], dtype=np.int64)
_DC = np.array([1, 0, 1, -1], dtype=np.int64)


@nb.njit(cache=True)
def _outcome_after(board, cell, mover, filled_after, ncells, clauses, rows, cols, dr, dc):
    # board already holds mover's piece at cell; -1 = play continues, 0 draw, 1/2 winner
    for ci in range(clauses.shape[0]):
        eff = clauses[ci, 0]
        scope = clauses[ci, 2]
        if scope != 0 and scope != mover:
            continue
        fired = False
        if clauses[ci, 3] == 1:
            fired = filled_after == ncells
        else:
            k = clauses[ci, 4]
            dmask = clauses[ci, 5]
            for d in range(4):
                if (dmask >> d) & 1 and _run_through(board, cell, mover, rows, cols, dr[d], dc[d]) >= k:
                    fired = True
                    break
        if fired:
            if eff == 0:
                return mover
            if eff == 1:
                return 3 - mover
            if eff == 2:
                return clauses[ci, 1]
            return 0
    if filled_after == ncells:
        return 0
    return -1


@nb.njit(cache=True)
def _relevance(clauses, player):
    # +1 goal, -1 hazard, 0 ignored, per clause for this player
    out = np.zeros(clauses.shape[0], dtype=np.int64)
    for ci in range(clauses.shape[0]):
        eff = clauses[ci, 0]
        scope = clauses[ci, 2]
        if eff == 3 or (scope != 0 and scope != player):
            continue
        if eff == 0 or (eff == 2 and clauses[ci, 1] == player):
            out[ci] = 1
        else:
            out[ci] = -1
    return out


@nb.njit(cache=True)
def _move_values(board, ply, mover, clauses, rows, cols, line_id, line_cells, line_len,
                 n_lines, w_win, w_lose, w_self, w_block, moves, nmoves, values):
    ncells = rows * cols
    C = clauses.shape[0]
    opp = 3 - mover
    rel = np.zeros((2, C), dtype=np.int64)
    rel[0] = _relevance(clauses, mover)
    rel[1] = _relevance(clauses, opp)
    t1 = np.zeros((2, C, 4))
    t1l = np.full((2, C, 4), -1, dtype=np.int64)
    t2 = np.zeros((2, C, 4))
    before = np.zeros((2, C))
    filled = ply
    for side in range(2):
        pl = mover if side == 0 else opp
        for ci in range(C):
            if rel[side, ci] == 0:
                continue
            if clauses[ci, 3] == 1:
                before[side, ci] = filled / ncells
                continue
            _tops(board, pl, clauses[ci, 4], clauses[ci, 5], line_cells, line_len, n_lines,
                  t1[side, ci], t1l[side, ci], t2[side, ci])
            b = 0.0
            for d in range(4):
                if t1[side, ci, d] > b:
                    b = t1[side, ci, d]
            before[side, ci] = b
    goal_before = np.zeros(2)
    for side in range(2):
        g = 0.0
        h = 0.0
        for ci in range(C):
            if rel[side, ci] == 1 and before[side, ci] > g:
                g = before[side, ci]
            elif rel[side, ci] == -1 and before[side, ci] > h:
                h = before[side, ci]
        goal_before[side] = g - h

    for mi in range(nmoves):
        m = moves[mi]
        board[m] = mover
        out = _outcome_after(board, m, mover, filled + 1, ncells, clauses, rows, cols, _DR, _DC)
        board[m] = 0
        goal_after = np.zeros(2)
        for side in range(2):
            pl = mover if side == 0 else opp
            g = 0.0
            h = 0.0
            for ci in range(C):
                r = rel[side, ci]
                if r == 0:
                    continue
                if clauses[ci, 3] == 1:
                    a = (filled + 1) / ncells
                else:
                    k = clauses[ci, 4]
                    dmask = clauses[ci, 5]
                    a = 0.0
                    for d in range(4):
                        if not (dmask >> d) & 1:
                            continue
                        lid = line_id[d, m]
                        other = t2[side, ci, d] if t1l[side, ci, d] == lid else t1[side, ci, d]
                        if other > a:
                            a = other
                        ln = line_len[d, lid]
                        if ln >= k:
                            v = _line_value(board, line_cells[d, lid], ln, pl, k, m, mover)
                            if v > a:
                                a = v
                if r == 1:
                    if a > g:
                        g = a
                elif a > h:
                    h = a
            goal_after[side] = g - h
        v = 0.0
        if out == mover:
            v += w_win
        elif out == opp:
            v += w_lose
        v += w_self * (goal_after[0] - goal_before[0])
        v += w_block * (goal_before[1] - goal_after[1])
        values[mi] = v


@nb.njit(cache=True)
def _softmax_pick(values, n, temperature, u):
    vmax = values[0]
    for i in range(1, n):
        if values[i] > vmax:
            vmax = values[i]
    total = 0.0
    for i in range(n):
        total += np.exp((values[i] - vmax) / temperature)
    target = u * total
    acc = 0.0
    for i in range(n):
        acc += np.exp((values[i] - vmax) / temperature)
        if target < acc:
            return i
    return n - 1


@nb.njit(cache=True)
def playout(rows, cols, prefix, cycle, clauses, line_id, line_cells, line_len, n_lines,
            kinds, params, rng):
    """Play one game; ``kinds[p-1]`` / ``params[p-1]`` = (tau, w_win, w_lose, w_self, w_block).

    Returns (outcome code, number of placements).
    """
    ncells = rows * cols
    board = np.zeros(ncells, dtype=np.int8)
    moves = np.zeros(ncells, dtype=np.int64)
    values = np.zeros(ncells)
    ply = 0
    while True:
        mover = _mover(prefix, cycle, ply)
        n = 0
        for i in range(ncells):
            if board[i] == 0:
                moves[n] = i
                n += 1
        p = params[mover - 1]
        u = rng.random()
        if kinds[mover - 1] == 0:
            idx = int(u * n)
            if idx >= n:
                idx = n - 1
        else:
            _move_values(board, ply, mover, clauses, rows, cols, line_id, line_cells,
                         line_len, n_lines, p[1], p[2], p[3], p[4], moves, n, values)
            idx = _softmax_pick(values, n, p[0], u)
        m = moves[idx]
        board[m] = mover
        ply += 1
        out = _outcome_after(board, m, mover, ply, ncells, clauses, rows, cols, _DR, _DC)
        if out >= 0:
            return out, ply


def move_values_array(game: CompiledGame, cells: np.ndarray, ply: int, mover: int, weights):
    """Values of every empty cell (row-major) for ``mover``; test hook for the kernel."""
    board = np.ascontiguousarray(cells, dtype=np.int8).ravel().copy()
    moves = np.flatnonzero(board == 0).astype(np.int64)
    values = np.zeros(len(moves))
    _move_values(board, ply, mover, game.clauses, game.rows, game.cols, game.line_id,
                 game.line_cells, game.line_len, game.n_lines, float(weights.w_win),
                 float(weights.w_lose), float(weights.w_self), float(weights.w_block),
                 moves, len(moves), values)
    return moves, values


def run(game: CompiledGame, kinds: np.ndarray, params: np.ndarray, rng: np.random.Generator):
    out, length = playout(game.rows, game.cols, game.prefix, game.cycle, game.clauses,
                          game.line_id, game.line_cells, game.line_len, game.n_lines,
                          kinds, params, rng)
    return int(out), int(length)
