"""Move-selection policies: the goal-directed Intuitive Gamer and a uniform baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .dsl import GameSpec
from .engine import GameState, Outcome, apply_move, legal_moves, progress


@dataclass(frozen=True)
class AgentWeights:
    """Linear move-value weights.

    These defaults are modelling choices, not fitted values.
    """

    w_win: float = 10.0
    w_lose: float = -10.0
    w_self: float = 1.0
    w_block: float = 1.0

    def __post_init__(self):
        for name in ("w_win", "w_lose", "w_self", "w_block"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class IntuitiveGamer:
    weights: AgentWeights = field(default_factory=AgentWeights)
    temperature: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class UniformRandom:
    pass


Policy = Union[IntuitiveGamer, UniformRandom]


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for (seed, stream); same pair, same draws."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def clause_relevance(spec: GameSpec, player: int) -> list[int]:
    """Per clause: +1 if firing helps ``player`` as mover, -1 if it hurts, 0 if ignored."""
    out = []
    for c in spec.clauses:
        if c.effect == "draw" or (c.by is not None and c.by != player):
            out.append(0)
        elif c.effect == "win" or (c.effect == "win-for" and c.player == player):
            out.append(1)
        else:
            out.append(-1)
    return out


def goal_score(cells: np.ndarray, spec: GameSpec, player: int) -> float:
    """Best goal progress minus best progress toward a self-inflicted loss."""
    own, opp = cells == player, cells == 3 - player
    good = bad = 0.0
    for rel, clause in zip(clause_relevance(spec, player), spec.clauses):
        if rel == 0:
            continue
        p = progress(clause.condition, own, opp)
        if rel > 0:
            good = max(good, p)
        else:
            bad = max(bad, p)
    return good - bad


def move_values(state: GameState, spec: GameSpec | None = None,
                weights: AgentWeights | None = None) -> dict[tuple[int, int], float]:
    """Heuristic value of every legal move for the player to move (row-major order)."""
    spec = spec or state.spec
    weights = weights or AgentWeights()
    moves = legal_moves(state)
    mover = state.mover
    opp = 3 - mover
    self_before = goal_score(state.cells, spec, mover)
    opp_before = goal_score(state.cells, spec, opp)
    values = {}
    for m in moves:
        nxt = apply_move(state, m)
        v = 0.0
        if nxt.outcome == Outcome.win_for(mover):
            v += weights.w_win
        elif nxt.outcome == Outcome.win_for(opp):
            v += weights.w_lose
        v += weights.w_self * (goal_score(nxt.cells, spec, mover) - self_before)
        v += weights.w_block * (opp_before - goal_score(nxt.cells, spec, opp))
        values[m] = v
    return values


def softmax_probs(values, temperature: float) -> np.ndarray:
    v = np.asarray(list(values), dtype=float)
    z = np.exp((v - v.max()) / temperature)
    return z / z.sum()


def softmax_sample(values: dict, temperature: float, rng: np.random.Generator):
    """Draw a key with probability proportional to exp(value / temperature)."""
    if not values:
        raise ValueError("cannot sample from an empty value map")
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    keys = list(values)
    vals = [values[k] for k in keys]
    vmax = max(vals)
    weights = [math.exp((v - vmax) / temperature) for v in vals]
    target = rng.random() * sum(weights)
    acc = 0.0
    for key, w in zip(keys, weights):
        acc += w
        if target < acc:
            return key
    return keys[-1]


def best_move(values: dict):
    """Greedy choice; ties go to the first (lowest row-major) move."""
    return max(values, key=lambda m: (values[m], tuple(-x for x in m)))


def choose_move(policy: Policy, state: GameState, spec: GameSpec | None, rng: np.random.Generator):
    spec = spec or state.spec
    if isinstance(policy, UniformRandom):
        moves = legal_moves(state)
        return moves[min(int(rng.random() * len(moves)), len(moves) - 1)]
    return softmax_sample(move_values(state, spec, policy.weights), policy.temperature, rng)
