"""Score three familiar line games and place them against the shipped reference set."""
from gamefun import FunnessConfig, funness, line_game, percentile
from gamefun.reference import reference_scores

config = FunnessConfig()           # 200 self-play and 100 vs-random playouts per game
reference = reference_scores(config)

games = {
    "2x3, 3 in a row": line_game("2x3", 2, 3, 3),
    "tic-tac-toe": line_game("ttt", 3, 3, 3),
    "10x10, 5 in a row": line_game("gomoku", 10, 10, 5),
}

print(f"{'game':<20}{'u_sim':>7}{'pct':>7}{'balance':>9}{'challenge':>11}{'length':>8}  p1/draw/p2")
for name, spec in games.items():
    s = funness(spec, config, seed=0)
    d = s.selfplay.dist
    print(f"{name:<20}{s.u_sim:7.3f}{percentile(s.u_sim, reference):7.1f}{s.balance:9.3f}"
          f"{s.challenge:11.3f}{s.mean_length:8.1f}  {d.p1:.2f}/{d.draw:.2f}/{d.p2:.2f}")

# 2x3 is nearly always a draw, so it scores low on balance
# tic-tac-toe favours the first player, and the agent beats a random opponent easily
