"""Write a game down, watch two simulated novices play it."""
from gamefun import IntuitiveGamer, apply_move, choose_move, move_values, new_state, parse, rng_stream
from gamefun.dsl import print_game

# player 1 wins with a diagonal three, player 2 with a horizontal or vertical three
program = """
(game "diagonals vs rows"
  (board 6 6)
  (play (order (cycle 1 2)) (place))
  (end (win (by 1) (line 3 (dirs d1 d2)))
       (win (by 2) (line 3 (dirs h v)))))
"""
spec = parse(program)
print(print_game(spec))  # canonical form, with the implicit full-board draw added

# heuristic values on the empty board: any first piece is a third of a line,
# and nothing is blocked yet, so every cell scores the same
values = move_values(new_state(spec))
for r in range(6):
    print(" ".join(f"{values[(r, c)]:5.2f}" for c in range(6)))

# one playout at temperature 1
agent = IntuitiveGamer(temperature=1.0)
rng = rng_stream(seed=1)
state = new_state(spec)
while not state.terminal:
    state = apply_move(state, choose_move(agent, state, spec, rng))
print()
print(state)
print("outcome:", state.outcome.name, "after", state.ply, "placements")
