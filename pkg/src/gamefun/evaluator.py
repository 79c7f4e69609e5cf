"""Monte Carlo playouts and the funness readouts built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernel
from .agents import AgentWeights, IntuitiveGamer, Policy, UniformRandom, choose_move, rng_stream
from .dsl import GameSpec
from .engine import Outcome, apply_move, new_state

DEFAULT_MAX_CELLS = 144
# vs-random playouts use stream ids offset from the self-play ones
CHALLENGE_STREAM_OFFSET = 1_000_000


class BoardTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OutcomeDist:
    p1: float
    draw: float
    p2: float

    def __post_init__(self):
        vals = (self.p1, self.draw, self.p2)
        if any(not 0.0 <= v <= 1.0 for v in vals) or abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError(f"not a distribution over outcomes: {vals}")

    @classmethod
    def from_counts(cls, p1: int, draw: int, p2: int) -> "OutcomeDist":
        n = p1 + draw + p2
        return cls(p1 / n, draw / n, p2 / n)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p1, self.draw, self.p2)

    def reversed(self) -> "OutcomeDist":
        return OutcomeDist(self.p2, self.draw, self.p1)


@dataclass(frozen=True)
class PlayoutStats:
    dist: OutcomeDist
    mean_length: float
    n: int
    seed: int


@dataclass(frozen=True)
class FunnessConfig:
    n_selfplay: int = 200
    selfplay_temperature: float = 1.0
    n_vs_random: int = 100
    vs_random_temperature: float = 0.2
    c0: float = -2.2
    c_balance: float = 2.5
    c_challenge: float = 1.5
    c_length: float = 1.5
    length_target_fraction: float = 0.4
    length_width_fraction: float = 0.3
    weights: AgentWeights = field(default_factory=AgentWeights)
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self):
        if self.n_selfplay < 1 or self.n_vs_random < 1:
            raise ValueError("playout counts must be >= 1")
        if not (self.selfplay_temperature > 0 and self.vs_random_temperature > 0):
            raise ValueError("temperatures must be positive")
        if not 0 < self.length_target_fraction <= 1:
            raise ValueError("length_target_fraction must lie in (0, 1]")
        if not self.length_width_fraction > 0:
            raise ValueError("length_width_fraction must be positive")


@dataclass(frozen=True)
class FunnessScore:
    balance: float
    challenge: float
    length_score: float
    mean_length: float
    u_sim: float
    selfplay: PlayoutStats
    n_vs_random: int


def logistic(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


# ---------------------------------------------------------------------------
# playouts


@lru_cache(maxsize=4096)
def _compiled(spec: GameSpec):
    return _kernel.compile_game(spec)


def _policy_arrays(policies):
    kinds = np.zeros(2, dtype=np.int64)
    params = np.zeros((2, 5))
    for i, pol in enumerate(policies):
        if isinstance(pol, IntuitiveGamer):
            w = pol.weights
            kinds[i] = _kernel.GAMER
            params[i] = (pol.temperature, w.w_win, w.w_lose, w.w_self, w.w_block)
        elif not isinstance(pol, UniformRandom):
            raise TypeError(f"unknown policy {pol!r}")
    return kinds, params


def _check_size(spec: GameSpec, max_cells: int):
    if spec.board.cells > max_cells:
        raise BoardTooLarge(f"{spec.board.rows}x{spec.board.cols} board exceeds the "
                            f"{max_cells}-cell cap")


def run_playout(spec: GameSpec, policy1: Policy, policy2: Policy, rng: np.random.Generator,
                *, max_cells: int = DEFAULT_MAX_CELLS, reference: bool = False) -> tuple[Outcome, int]:
    """Play ``spec`` to the end; returns (outcome, number of placements).

    ``reference=True`` forces the pure-Python engine even for line games.
    """
    _check_size(spec, max_cells)
    game = None if reference else _compiled(spec)
    if game is not None:
        kinds, params = _policy_arrays((policy1, policy2))
        out, length = _kernel.run(game, kinds, params, rng)
        return Outcome(out), length
    state = new_state(spec)
    policies = {1: policy1, 2: policy2}
    while not state.terminal:
        state = apply_move(state, choose_move(policies[state.mover], state, spec, rng))
    return state.outcome, state.ply


def _tally(spec, seats, seed, stream0, max_cells):
    """Run one playout per seat pair; returns (counts[draw, p1, p2], total length)."""
    game = _compiled(spec)
    counts = np.zeros(3, dtype=np.int64)
    total = 0
    if game is not None:
        arrays = {}
        for i, (a, b) in enumerate(seats):
            key = (id(a), id(b))
            if key not in arrays:
                arrays[key] = _policy_arrays((a, b))
            out, length = _kernel.run(game, *arrays[key], rng_stream(seed, stream0 + i))
            counts[out] += 1
            total += length
        return counts, total
    for i, (a, b) in enumerate(seats):
        out, length = run_playout(spec, a, b, rng_stream(seed, stream0 + i), max_cells=max_cells)
        counts[int(out)] += 1
        total += length
    return counts, total


def self_play_stats(spec: GameSpec, config: FunnessConfig | None = None, seed: int = 0,
                    policy: Policy | None = None) -> PlayoutStats:
    """Aggregate ``n_selfplay`` playouts of one policy against itself.

    Playout ``i`` uses stream ``i`` of ``seed``.  ``policy`` defaults to the
    Intuitive Gamer at the self-play temperature.
    """
    config = config or FunnessConfig()
    _check_size(spec, config.max_cells)
    policy = policy or IntuitiveGamer(config.weights, config.selfplay_temperature)
    n = config.n_selfplay
    counts, total = _tally(spec, [(policy, policy)] * n, seed, 0, config.max_cells)
    dist = OutcomeDist.from_counts(int(counts[1]), int(counts[0]), int(counts[2]))
    return PlayoutStats(dist, total / n, n, seed)


def challenge_score(spec: GameSpec, config: FunnessConfig | None = None, seed: int = 0) -> float:
    """Score rate (wins + draws/2) of the sharpened agent against a random opponent.

    The agent takes seat 1 in even-numbered playouts and seat 2 in odd ones.
    """
    config = config or FunnessConfig()
    _check_size(spec, config.max_cells)
    agent = IntuitiveGamer(config.weights, config.vs_random_temperature)
    rand = UniformRandom()
    n = config.n_vs_random
    seats = [(agent, rand) if i % 2 == 0 else (rand, agent) for i in range(n)]
    game = _compiled(spec)
    score = 0.0
    for i, (a, b) in enumerate(seats):
        rng = rng_stream(seed, CHALLENGE_STREAM_OFFSET + i)
        if game is not None:
            out, _ = _kernel.run(game, *_policy_arrays((a, b)), rng)
        else:
            out, _ = run_playout(spec, a, b, rng, max_cells=config.max_cells)
        agent_seat = 1 if i % 2 == 0 else 2
        if out == 0:
            score += 0.5
        elif out == agent_seat:
            score += 1.0
    return score / n


# ---------------------------------------------------------------------------
# readouts


def balance_emd(dist: OutcomeDist) -> float:
    """Normalized 1-D earth mover's distance from the ideal (1/2, 0, 1/2) outcome split.

    Support is ordered (P1 win, draw, P2 win) with unit spacing; the largest
    possible distance on it is 1, so no rescaling is needed.
    """
    target = (0.5, 0.0, 0.5)
    cd = ct = emd = 0.0
    for p, t in zip(dist.as_tuple()[:2], target[:2]):
        cd += p
        ct += t
        emd += abs(cd - ct)
    return emd


def expected_payoff(dist: OutcomeDist) -> float:
    return dist.p1 - dist.p2


def outcome_entropy(dist: OutcomeDist) -> float:
    return -sum(p * math.log(p) for p in dist.as_tuple() if p > 0)


def length_score(mean_length: float, spec: GameSpec, config: FunnessConfig | None = None) -> float:
    config = config or FunnessConfig()
    cells = spec.board.cells
    target = config.length_target_fraction * cells
    width = config.length_width_fraction * cells
    return math.exp(-(((mean_length - target) / width) ** 2))


def combine(balance: float, challenge: float, length: float, config: FunnessConfig) -> float:
    return logistic(config.c0 + config.c_balance * balance
                    + config.c_challenge * challenge + config.c_length * length)


def funness(spec: GameSpec, config: FunnessConfig | None = None, seed: int = 0) -> FunnessScore:
    config = config or FunnessConfig()
    stats = self_play_stats(spec, config, seed)
    challenge = challenge_score(spec, config, seed)
    balance = 1.0 - balance_emd(stats.dist)
    ls = length_score(stats.mean_length, spec, config)
    return FunnessScore(balance, challenge, ls, stats.mean_length,
                        combine(balance, challenge, ls, config), stats, config.n_vs_random)


def percentile(u: float, reference) -> float:
    """Mid-rank percentile of ``u`` within ``reference`` (ties count half)."""
    ref = np.asarray(reference, dtype=float)
    if ref.size == 0:
        raise ValueError("reference set is empty")
    below = np.count_nonzero(ref < u)
    ties = np.count_nonzero(ref == u)
    return 100.0 * (below + 0.5 * ties) / ref.size
