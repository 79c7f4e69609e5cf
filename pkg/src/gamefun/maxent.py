"""Presence-only maximum-entropy analysis of which games people invent.

Each game g gets the score ``f(g; theta) = logp_base(g) + theta * u_sim(g)``;
probabilities are normalized over a background set of games, and theta is
chosen on a grid by maximizing the L1-penalized log likelihood of the
presence (human-created) games.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp


@dataclass(frozen=True)
class ScoredGame:
    id: str
    logp_base: float
    u_sim: float
    is_presence: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.logp_base) and np.isfinite(self.u_sim)):
            raise ValueError(f"{self.id}: logp_base and u_sim must be finite")


def default_grid() -> np.ndarray:
    return np.round(np.arange(0, 201) * 0.1, 10)


@dataclass(frozen=True)
class FitConfig:
    theta_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_grid()))
    lam: float = 0.1

    def __post_init__(self):
        grid = np.asarray(self.theta_grid, dtype=float)
        if grid.size == 0 or not np.any(grid == 0.0):
            raise ValueError("theta grid must be nonempty and contain 0")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("theta grid must be strictly ascending")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


@dataclass(frozen=True)
class MaxEntFit:
    theta_hat: float
    loglik_at_theta_hat: float      # penalized
    loglik_at_zero: float
    unpenalized_at_theta_hat: float
    unpenalized_at_zero: float
    curve: list                     # (theta, penalized loglik) per grid point
    n_presence: int
    n_background: int


def _arrays(games):
    return (np.array([g.logp_base for g in games], dtype=float),
            np.array([g.u_sim for g in games], dtype=float))


def game_score(g: ScoredGame, theta: float) -> float:
    return g.logp_base + theta * g.u_sim


def log_partition(background, theta: float) -> float:
    if len(background) == 0:
        raise ValueError("background set is empty")
    logp, u = _arrays(background)
    return float(logsumexp(logp + theta * u))


def probabilities(background, theta: float) -> np.ndarray:
    """P(g | theta) for every background game."""
    logp, u = _arrays(background)
    f = logp + theta * u
    return np.exp(f - logsumexp(f))


def dataset_log_likelihood(presence, background, theta: float, lam: float = 0.0) -> float:
    """Sum of presence scores minus N log Z(theta) minus lam * |theta|."""
    if len(presence) == 0:
        raise ValueError("presence set is empty")
    logp, u = _arrays(presence)
    total = float(np.sum(logp + theta * u))
    return total - len(presence) * log_partition(background, theta) - lam * abs(theta)


def _curves(presence, background, grid):
    if len(presence) == 0:
        raise ValueError("presence set is empty")
    if len(background) == 0:
        raise ValueError("background set is empty")
    lp, up = _arrays(presence)
    lb, ub = _arrays(background)
    grid = np.asarray(grid, dtype=float)
    sums = lp.sum() + grid * up.sum()
    logz = logsumexp(lb[None, :] + grid[:, None] * ub[None, :], axis=1)
    return sums - len(presence) * logz


def fit_sweep(presence, background, config: FitConfig | None = None) -> MaxEntFit:
    config = config or FitConfig()
    grid = np.asarray(config.theta_grid, dtype=float)
    raw = _curves(presence, background, grid)
    pen = raw - config.lam * np.abs(grid)
    best = int(np.argmax(pen))  # first maximum, i.e. the smallest theta on ties
    zero = int(np.flatnonzero(grid == 0.0)[0])
    return MaxEntFit(float(grid[best]), float(pen[best]), float(pen[zero]),
                     float(raw[best]), float(raw[zero]),
                     [(float(t), float(v)) for t, v in zip(grid, pen)],
                     len(presence), len(background))


def likelihood_ratio_test(fit: MaxEntFit) -> tuple[float, int]:
    """Likelihood-ratio statistic of the fitted theta against theta = 0 (1 degree of freedom)."""
    return 2.0 * (fit.unpenalized_at_theta_hat - fit.unpenalized_at_zero), 1
