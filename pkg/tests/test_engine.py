import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gamefun.dsl import (DIRECTIONS, And, Count, Full, Line, Or, Shape, ell, line_game, parse,
                         plus, square)
from gamefun.engine import (GameOver, GameState, IllegalMove, Outcome, apply_move, check,
                            check_condition, condition_progress, legal_moves, max_packing,
                            new_state, progress, terminal_status)
from game_corpus import TTT


def grid(spec, rows):
    """State from strings like 'X.O' (X = player 1, O = player 2)."""
    m = {".": 0, "X": 1, "O": 2}
    return GameState.from_cells(spec, [[m[ch] for ch in r] for r in rows])


ttt = parse(TTT)


def test_new_state():
    s = new_state(ttt)
    assert s.cells.shape == (3, 3) and not s.cells.any()
    assert s.ply == 0 and s.mover == 1 and not s.terminal
    one = new_state(line_game("u", 1, 1, 1))
    assert one.cells.shape == (1, 1)


def test_prefix_schedule_movers():
    spec = parse('(game "p" (board 4 4) (play (order (prefix 1 1) (cycle 2 1)) (place)) '
                 '(end (win (line 4))))')
    s = new_state(spec)
    movers = []
    for cell in [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0)]:
        movers.append(s.mover)
        s = apply_move(s, cell)
    assert movers == [1, 1, 2, 1, 2]


def test_cycle_with_double_move():
    spec = parse('(game "p" (board 4 4) (play (order (cycle 1 2 2)) (place)) (end (win (line 4))))')
    s = apply_move(new_state(spec), (0, 0))
    assert s.mover == 2
    s = apply_move(s, (1, 1))
    assert s.mover == 2
    assert apply_move(s, (2, 2)).mover == 1


def test_legal_moves_and_apply():
    s = new_state(ttt)
    assert legal_moves(s) == [(r, c) for r in range(3) for c in range(3)]
    t = apply_move(s, (0, 0))
    assert t.cells[0, 0] == 1 and t.mover == 2
    assert len(legal_moves(t)) == 8
    assert not s.cells.any()  # value semantics
    with pytest.raises(IllegalMove, match="occupied"):
        apply_move(t, (0, 0))
    with pytest.raises(IllegalMove, match="off"):
        apply_move(t, (3, 0))
    with pytest.raises(ValueError):
        t.cells[1, 1] = 2


def test_full_board_is_terminal():
    s = grid(ttt, ["XOX", "XOO", "OXX"])
    assert s.outcome == Outcome.DRAW
    with pytest.raises(GameOver):
        legal_moves(s)
    with pytest.raises(GameOver):
        apply_move(s, (0, 0))


def test_ttt_win_and_misere_loss():
    s = new_state(ttt)
    for cell in [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)]:
        s = apply_move(s, cell)
    assert s.outcome == Outcome.P1_WIN
    assert terminal_status(s) == Outcome.P1_WIN

    misere = parse('(game "m" (board 4 4) (play (place)) (end (lose (line 3))))')
    s = new_state(misere)
    for cell in [(0, 0), (1, 0), (0, 1), (1, 2), (0, 2)]:
        s = apply_move(s, cell)
    assert s.outcome == Outcome.P2_WIN


def test_full_board_draw_and_clause_order():
    s = grid(ttt, ["XOX", "XOO", "OXX"])
    assert terminal_status(s) == Outcome.DRAW
    spec = parse('(game "d" (board 3 3) (play (place)) (end (draw (full)) (win (line 3))))')
    s = new_state(spec)
    for cell in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 1), (2, 0), (2, 2)]:
        s = apply_move(s, cell)
    # the last move completes a diagonal but the draw clause comes first
    assert check_condition(s, 1, Line(3, DIRECTIONS))
    assert s.outcome == Outcome.DRAW


def test_only_mover_scope():
    spec = parse('(game "a" (board 4 4) (play (place)) (end (win (by 2) (line 2 (dirs h)))))')
    s = new_state(spec)
    s = apply_move(s, (0, 0))
    s = apply_move(s, (3, 3))
    s = apply_move(s, (0, 1))  # player 1 has a horizontal pair but the clause is for player 2
    assert not s.terminal
    s = apply_move(s, (3, 2))
    assert s.outcome == Outcome.P2_WIN


def test_win_for_clause():
    spec = parse('(game "w" (board 3 3) (play (place)) (end ((win-for 2) (line 2 (dirs h)))))')
    s = apply_move(apply_move(apply_move(new_state(spec), (0, 0)), (2, 2)), (0, 1))
    assert s.outcome == Outcome.P2_WIN


def test_check_condition_examples():
    s = grid(ttt, ["XXX", "OO.", "..."])
    assert check_condition(s, 1, Line(3, ("h",)))
    assert not check_condition(s, 2, Line(3, ("h",)))
    sq = grid(line_game("b", 4, 4, 4), ["XX..", "XX..", "O.O.", "O..."])
    assert check_condition(sq, 1, square(2))
    assert not check_condition(sq, 2, square(2))


def test_count_requires_disjoint_instances():
    spec = line_game("b", 1, 8, 8)
    # runs of 4 at columns 0-3 and 2-5 share cells; total run length 6 < 8
    s = grid(spec, ["XXXXXX.."])
    assert check_condition(s, 1, Line(4, ("h",)))
    assert not check_condition(s, 1, Count(2, Line(4, ("h",))))
    s = grid(spec, ["XXXXXXXX"])
    assert check_condition(s, 1, Count(2, Line(4, ("h",))))


def test_max_packing_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        items = [int(x) for x in rng.integers(1, 1 << 10, size=int(rng.integers(0, 8)))]
        best = 0
        for r in range(len(items) + 1):
            for combo in itertools.combinations(items, r):
                if all(a & b == 0 for a, b in itertools.combinations(combo, 2)):
                    best = max(best, r)
        got = max_packing(items, 10)
        assert len(got) == best
        assert all(a & b == 0 for a, b in itertools.combinations(got, 2))


def test_progress_examples():
    spec = line_game("t", 3, 3, 3)
    assert condition_progress(new_state(spec), 1, Line(3, DIRECTIONS)) == 0.0
    s = grid(spec, [".XX", "...", "..."])
    assert condition_progress(s, 1, Line(3, ("h",))) == pytest.approx(2 / 3)
    blocked = grid(spec, ["OXX", "O.O", "O.O"])
    assert condition_progress(blocked, 1, Line(3, ("h",))) == 0.0
    edge = grid(line_game("w", 1, 4, 3), ["XX.O"])
    assert condition_progress(edge, 1, Line(3, ("h",))) == pytest.approx(2 / 3)
    edge = grid(line_game("w", 1, 4, 3), [".XXO"])
    assert condition_progress(edge, 1, Line(3, ("h",))) == pytest.approx(2 / 3)
    cramped = grid(line_game("w", 1, 4, 3), ["OXXO"])
    assert condition_progress(cramped, 1, Line(3, ("h",))) == 0.0


def test_progress_composites():
    spec = line_game("b", 4, 4, 4)
    s = grid(spec, ["XX..", "X...", "....", "OOO."])
    assert condition_progress(s, 1, square(2)) == pytest.approx(3 / 4)
    a, b = Line(3, ("h",)), square(2)
    pa, pb = condition_progress(s, 1, a), condition_progress(s, 1, b)
    assert condition_progress(s, 1, And((a, b))) == pytest.approx((pa + pb) / 2)
    assert condition_progress(s, 1, And((a, b)), and_mode="min") == pytest.approx(min(pa, pb))
    assert condition_progress(s, 1, Or((a, b))) == pytest.approx(max(pa, pb))
    assert condition_progress(s, 1, Full()) == pytest.approx(6 / 16)


def test_count_progress_partial():
    spec = line_game("r", 1, 7, 2)
    s = grid(spec, ["XX.X..O"])
    # one completed pair, and the next pair is half done
    assert condition_progress(s, 1, Count(2, Line(2, ("h",)))) == pytest.approx((1 + 0.5) / 2)
    assert condition_progress(s, 1, Count(3, Line(2, ("h",)))) == pytest.approx((1 + 0.5) / 3)


BATTERY = [Line(3, DIRECTIONS), Line(2, ("h",)), Line(3, ("d1", "d2")), square(2),
           Shape(((0, 0), (0, 1), (1, 1)), True, True), Count(2, Line(2, ("h", "v"))),
           Count(2, square(1)), And((Line(3, ("h",)), square(2))),
           Or((Line(3, ("v",)), square(2))), Or((Count(2, Line(2, ("h",))), Line(3, ("d1",))))]


def all_views(rows, cols):
    """Every (own, opp) pair whose piece counts differ by at most one."""
    for t in itertools.product((0, 1, 2), repeat=rows * cols):
        if abs(t.count(1) - t.count(2)) <= 1:
            g = np.array(t, dtype=np.int8).reshape(rows, cols)
            yield g == 1, g == 2


def test_progress_soundness_3x3():
    for own, opp in all_views(3, 3):
        for cond in BATTERY:
            p = progress(cond, own, opp)
            assert 0.0 <= p <= 1.0
            assert (p == 1.0) == check(cond, own, opp), (cond, own, opp)


def test_direction_completeness():
    rng = np.random.default_rng(11)
    every = Line(3, DIRECTIONS)
    singles = [Line(3, (d,)) for d in DIRECTIONS]
    for _ in range(500):
        g = rng.integers(0, 3, size=(int(rng.integers(1, 6)), int(rng.integers(1, 6))))
        own, opp = g == 1, g == 2
        assert check(every, own, opp) == any(check(c, own, opp) for c in singles)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_player_swap_symmetry(rows, cols, data):
    flat = data.draw(st.lists(st.sampled_from([0, 1, 2]), min_size=rows * cols,
                              max_size=rows * cols))
    g = np.array(flat, dtype=np.int8).reshape(rows, cols)
    swapped = np.where(g == 0, 0, 3 - g)
    spec = line_game("s", rows, cols, 3)
    a = GameState(spec, g, int(np.count_nonzero(g)))
    b = GameState(spec, swapped, int(np.count_nonzero(g)))
    for cond in [Line(2, DIRECTIONS), square(2), Count(2, Line(2, ("h",))), plus(5), ell(3)]:
        assert check_condition(a, 1, cond) == check_condition(b, 2, cond)
        assert check_condition(a, 2, cond) == check_condition(b, 1, cond)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_play_conservation(seed):
    rng = np.random.default_rng(seed)
    spec = parse('(game "x" (board 4 5) (play (order (prefix 2) (cycle 1 1 2)) (place)) '
                 '(end (win (or (line 4) (square 2)))))')
    s = new_state(spec)
    while not s.terminal:
        moves = legal_moves(s)
        nxt = apply_move(s, moves[int(rng.integers(len(moves)))])
        assert np.count_nonzero(nxt.cells) == nxt.ply == s.ply + 1
        if not nxt.terminal:
            assert len(legal_moves(nxt)) == len(moves) - 1
        s = nxt
    with pytest.raises(GameOver):
        apply_move(s, (0, 0))
