"""Grid-game description language, novice-play simulation, funness scoring and
presence-only MaxEnt analysis of invented games."""
from .agents import (AgentWeights, IntuitiveGamer, UniformRandom, choose_move, move_values,
                     rng_stream, softmax_sample)
from .dsl import (DSLError, GameSpec, in_restricted_grammar, line_game, parse, print_game,
                  swap_players, validate)
from .engine import (GameState, Outcome, apply_move, check_condition, condition_progress,
                     legal_moves, new_state, terminal_status)
from .evaluator import (FunnessConfig, FunnessScore, OutcomeDist, balance_emd, challenge_score,
                        expected_payoff, funness, length_score, outcome_entropy, percentile,
                        run_playout, self_play_stats)
from .maxent import (FitConfig, MaxEntFit, ScoredGame, dataset_log_likelihood, fit_sweep,
                     game_score, likelihood_ratio_test, log_partition)
from .sampler import SamplerConfig, sample_game, sample_unique_games

__version__ = "0.1.0"
