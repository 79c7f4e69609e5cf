"""Draw random line games the way a normalization set is built."""
from collections import Counter

from gamefun import SamplerConfig, in_restricted_grammar, rng_stream, sample_unique_games
from gamefun.dsl import print_game
from gamefun.sampler import DEVIATIONS, sample_with_deviations

config = SamplerConfig(deviation_prob=0.1)
games = sample_unique_games(10, rng_stream(3), config)
for g in games:
    print(print_game(g))
assert all(in_restricted_grammar(g) for g in games)

# how often each deviation from plain m,n,k fires
rng = rng_stream(4)
fired = Counter()
n = 20_000
for _ in range(n):
    _, f = sample_with_deviations(rng, config)
    fired.update(k for k, v in f.items() if v)
for name in DEVIATIONS:
    print(f"{name:<14}{fired[name] / n:.3f}")
