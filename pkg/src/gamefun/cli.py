"""Command-line entry point: ``gamefun <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import io
from .agents import rng_stream
from .dsl import in_restricted_grammar, print_game, validate
from .evaluator import FunnessConfig
from .maxent import FitConfig, fit_sweep, likelihood_ratio_test
from .reference import load_reference, reference_scores
from .sampler import SamplerConfig, sample_unique_games


def _grid(text: str) -> tuple[float, ...]:
    lo, hi, step = (float(x) for x in text.split(":"))
    n = int(round((hi - lo) / step))
    return tuple(np.round(lo + step * np.arange(n + 1), 10))


def cmd_validate(args):
    corpus = io.load_corpus(args.corpus)
    status = 0
    for r in corpus:
        diags = validate(r.spec)
        print(f"{r.id}\t" + ("ok" if not diags else "; ".join(map(str, diags))))
    for q in corpus.quarantined:
        print(f"{q.id or f'line {q.line}'}\terror: {q.message}")
        status = 1
    return status


def cmd_restricted(args):
    corpus = io.load_corpus(args.corpus)
    for r in corpus:
        print(f"{r.id}\t{'true' if in_restricted_grammar(r.spec) else 'false'}")
    return 0


def cmd_eval(args):
    config = io.load_config(args.config) if args.config else FunnessConfig()
    if args.max_cells is not None:
        config = replace(config, max_cells=args.max_cells)
    corpus = io.load_corpus(args.corpus)
    refs = reference_scores(config, args.reference)
    rows = io.evaluate_corpus(corpus.records, config, args.seed, refs, workers=args.workers)
    io.write_report(rows, args.out or sys.stdout)
    return 0


def cmd_sample(args):
    cfg = SamplerConfig(deviation_prob=args.deviation_prob, seed=args.seed)
    games = sample_unique_games(args.n, rng_stream(args.seed), cfg)
    io.write_corpus([io.record_for(g, f"sample-{i:05d}") for i, g in enumerate(games)], args.out)
    return 0


def cmd_fit(args):
    presence = io.read_scored(args.presence)
    background = io.read_scored(args.background)
    fit = fit_sweep(presence, background, FitConfig(_grid(args.grid), args.lam))
    stat, df = likelihood_ratio_test(fit)
    if args.curve:
        with open(args.curve, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("theta", "penalized_loglik"))
            w.writerows((f"{t:.6f}", f"{v:.6f}") for t, v in fit.curve)
    print(json.dumps({"theta_hat": fit.theta_hat, "loglik_at_theta_hat": fit.loglik_at_theta_hat,
                      "loglik_at_zero": fit.loglik_at_zero, "lrt_statistic": stat, "df": df,
                      "n_presence": fit.n_presence, "n_background": fit.n_background}, indent=2))
    return 0


def cmd_score_proposal(args):
    cfg = io.load_endpoint_config(args.endpoint_config)
    corpus = io.load_corpus(args.corpus)
    programs = {r.id: r.program for r in corpus}
    _, ref = load_reference()
    default_context = [print_game(g.spec) for g in ref[:11]]
    for r in corpus:
        context = [programs[c] for c in r.context_ids if c in programs] or default_context
        print(f"{r.id}\t{io.score_proposal(r.program, context, cfg):.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gamefun", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="parse and validate every program in a corpus")
    s.add_argument("corpus")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("restricted", help="report restricted-grammar membership")
    s.add_argument("corpus")
    s.set_defaults(func=cmd_restricted)

    s = sub.add_parser("eval", help="simulate funness for every game in a corpus")
    s.add_argument("corpus")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", help="key=value run configuration file")
    s.add_argument("--reference", help="reference corpus (defaults to the shipped one)")
    s.add_argument("--max-cells", type=int, help="raise the board-size cap")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="report CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("sample", help="sample distinct random games")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--deviation-prob", type=float, default=0.1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("fit", help="fit the presence-only MaxEnt weight on funness")
    s.add_argument("--presence", required=True)
    s.add_argument("--background", required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=0.1)
    s.add_argument("--grid", default="0:20:0.1", help="lo:hi:step")
    s.add_argument("--curve", help="write the likelihood curve CSV here")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("score-proposal", help="score programs with a token-logprob endpoint")
    s.add_argument("corpus")
    s.add_argument("--endpoint-config", required=True)
    s.set_defaults(func=cmd_score_proposal)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
