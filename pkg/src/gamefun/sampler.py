"""Random generator over line-completion games, used to build normalization sets."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dsl import DIRECTIONS, Board, EndClause, GameSpec, Line, Schedule, normalize, print_game

# nonempty proper subsets of the four directions, in a fixed order
DIRECTION_SUBSETS = tuple(c for r in range(1, 4) for c in combinations(DIRECTIONS, r))
DEVIATIONS = ("asymmetric_k", "directions", "double_open", "misere")


class SamplerExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    board_min: int = 1
    board_max: int = 12
    deviation_prob: float = 0.1
    k_min: int = 2
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.board_min <= self.board_max:
            raise ValueError("need 1 <= board_min <= board_max")
        if not 0.0 <= self.deviation_prob <= 1.0:
            raise ValueError("deviation_prob must lie in [0, 1]")
        if self.k_min < 1:
            raise ValueError("k_min must be >= 1")


def sample_with_deviations(rng: np.random.Generator, config: SamplerConfig):
    """Sample one game and report which deviations from Tic-Tac-Toe fired."""
    rows = int(rng.integers(config.board_min, config.board_max + 1))
    cols = int(rng.integers(config.board_min, config.board_max + 1))
    k_hi = max(config.k_min, rows, cols)
    k1 = int(rng.integers(config.k_min, k_hi + 1))
    fired = {name: bool(rng.random() < config.deviation_prob) for name in DEVIATIONS}

    k2 = int(rng.integers(config.k_min, k_hi + 1)) if fired["asymmetric_k"] else k1
    dirs = {1: DIRECTIONS, 2: DIRECTIONS}
    if fired["directions"]:
        who = int(rng.integers(3))  # 0: player 1, 1: player 2, 2: both
        for p in (1, 2):
            if who == 2 or who == p - 1:
                dirs[p] = DIRECTION_SUBSETS[int(rng.integers(len(DIRECTION_SUBSETS)))]
    schedule = Schedule()
    if fired["double_open"]:
        p = int(rng.integers(1, 3))
        schedule = Schedule((p, p), (3 - p, p))
    effect = "lose" if fired["misere"] else "win"

    if fired["asymmetric_k"] or fired["directions"]:
        clauses = (EndClause(effect, Line(k1, dirs[1]), by=1),
                   EndClause(effect, Line(k2, dirs[2]), by=2))
    else:
        clauses = (EndClause(effect, Line(k1)),)
    spec = normalize(GameSpec("sampled", Board(rows, cols), schedule, clauses))
    return spec, fired


def sample_game(rng: np.random.Generator, config: SamplerConfig | None = None) -> GameSpec:
    return sample_with_deviations(rng, config or SamplerConfig())[0]


def sample_unique_games(n: int, rng: np.random.Generator,
                        config: SamplerConfig | None = None) -> list[GameSpec]:
    """Rejection-sample ``n`` structurally distinct games, in sampling order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    config = config or SamplerConfig()
    seen: set[str] = set()
    out: list[GameSpec] = []
    rejections = 0
    while len(out) < n:
        spec = sample_game(rng, config)
        key = print_game(spec)
        if key in seen:
            rejections += 1
            if rejections >= 100 * n:
                raise SamplerExhausted(
                    f"{rejections} consecutive duplicates after {len(out)} unique games; "
                    f"the design space is smaller than {n}")
            continue
        rejections = 0
        seen.add(key)
        out.append(spec)
    return out
