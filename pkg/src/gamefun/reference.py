"""The shipped reference corpus used to turn funness scores into percentiles.

The corpus stands in for a set of hand-designed games: sampled
line-completion games, deduplicated, keeping only games that are decisive
under self-play (draw rate at most ``MAX_DRAW_RATE``).  Each row stores the
raw readouts so scores can be recombined under other combiner coefficients
without replaying.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .agents import rng_stream
from .dsl import GameSpec, parse, print_game
from .evaluator import FunnessConfig, combine, funness, length_score
from .sampler import SamplerConfig, sample_game

REFERENCE_SIZE = 121
REFERENCE_SAMPLER_SEED = 2025
REFERENCE_EVAL_SEED = 0
MAX_DRAW_RATE = 0.5

@dataclass(frozen=True)
class ReferenceGame:
    id: str
    spec: GameSpec
    balance: float
    challenge: float
    mean_length: float
    draw_rate: float

    def u_sim(self, config: FunnessConfig) -> float:
        ls = length_score(self.mean_length, self.spec, config)
        return combine(self.balance, self.challenge, ls, config)


def simulation_key(config: FunnessConfig) -> dict:
    """The config fields that change simulated readouts (as opposed to the combiner)."""
    w = config.weights
    return {"n_selfplay": config.n_selfplay,
            "selfplay_temperature": config.selfplay_temperature,
            "n_vs_random": config.n_vs_random,
            "vs_random_temperature": config.vs_random_temperature,
            "w_win": w.w_win, "w_lose": w.w_lose, "w_self": w.w_self, "w_block": w.w_block}


def build_reference(config: FunnessConfig | None = None, n: int = REFERENCE_SIZE,
                    sampler_seed: int = REFERENCE_SAMPLER_SEED,
                    eval_seed: int = REFERENCE_EVAL_SEED) -> list[ReferenceGame]:
    config = config or FunnessConfig()
    rng = rng_stream(sampler_seed)
    sampler = SamplerConfig(seed=sampler_seed)
    seen: set[str] = set()
    out: list[ReferenceGame] = []
    while len(out) < n:
        spec = sample_game(rng, sampler)
        key = print_game(spec)
        if key in seen:
            continue
        seen.add(key)
        score = funness(spec, config, eval_seed)
        if score.selfplay.dist.draw <= MAX_DRAW_RATE:
            out.append(ReferenceGame(f"ref-{len(out):03d}", spec, score.balance,
                                     score.challenge, score.mean_length,
                                     score.selfplay.dist.draw))
    return out


def save_reference(games: list[ReferenceGame], path, config: FunnessConfig) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"simulation": simulation_key(config)}) + "\n")
        for g in games:
            fh.write(json.dumps({"id": g.id, "program": print_game(g.spec),
                                 "balance": g.balance, "challenge": g.challenge,
                                 "mean_length": g.mean_length, "draw_rate": g.draw_rate}) + "\n")


def load_reference(path=None) -> tuple[dict, list[ReferenceGame]]:
    if path is None:
        text = resources.files("gamefun").joinpath("data/reference.jsonl").read_text()
    else:
        text = Path(path).read_text()
    lines = [json.loads(x) for x in text.splitlines() if x.strip()]
    header, rows = lines[0], lines[1:]
    games = [ReferenceGame(r["id"], parse(r["program"]), r["balance"], r["challenge"],
                           r["mean_length"], r["draw_rate"]) for r in rows]
    return header.get("simulation", {}), games


def reference_scores(config: FunnessConfig | None = None, path=None) -> list[float]:
    """u_sim of every reference game under ``config``.

    Uses the stored readouts when ``config`` simulates the way the stored file
    did; otherwise the reference games are replayed under ``config``.
    """
    config = config or FunnessConfig()
    stored, games = load_reference(path)
    if stored == simulation_key(config):
        return [g.u_sim(config) for g in games]
    return [funness(g.spec, config, REFERENCE_EVAL_SEED).u_sim for g in games]


if __name__ == "__main__":
    # regenerate the shipped file: python -m gamefun.reference src/gamefun/data/reference.jsonl
    import sys

    cfg = FunnessConfig()
    save_reference(build_reference(cfg), sys.argv[1], cfg)
