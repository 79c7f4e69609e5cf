"""Corpus files, run configuration, evaluation reports and proposal scoring.

Corpus files hold one JSON object per line::

    {"id": "g1", "program": "(game ...)", "logp_base": -1.3,
     "context_ids": ["ttt", "g7"], "meta": {"source": "human"}}

``logp_base``, ``context_ids`` and ``meta`` are optional.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import httpx

from .agents import AgentWeights
from .dsl import DSLError, GameSpec, in_restricted_grammar, parse, print_game
from .evaluator import (FunnessConfig, expected_payoff, funness, outcome_entropy, percentile)

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    program: str
    logp_base: float | None = None
    context_ids: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)
    spec: GameSpec | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Quarantined:
    line: int
    id: str | None
    message: str


@dataclass
class Corpus:
    """Loaded records plus the lines that could not be used."""

    records: list[CorpusRecord]
    quarantined: list[Quarantined]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]


def load_corpus(path) -> Corpus:
    """Read a corpus file; malformed lines and unparseable programs are quarantined."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CorpusError(f"cannot read corpus {path}: {e}") from e
    records, bad, ids = [], [], set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            rid, program = obj["id"], obj["program"]
            if not isinstance(rid, str) or not isinstance(program, str):
                raise TypeError("id and program must be strings")
        except (ValueError, KeyError, TypeError) as e:
            bad.append(Quarantined(lineno, None, f"malformed record: {e}"))
            continue
        if rid in ids:
            raise CorpusError(f"duplicate id {rid!r} on line {lineno}")
        ids.add(rid)
        try:
            spec = parse(program)
        except DSLError as e:
            bad.append(Quarantined(lineno, rid, str(e)))
            continue
        logp = obj.get("logp_base")
        records.append(CorpusRecord(rid, program, None if logp is None else float(logp),
                                    tuple(obj.get("context_ids") or ()),
                                    dict(obj.get("meta") or {}), spec))
    for q in bad:
        log.warning("quarantined line %d (%s): %s", q.line, q.id, q.message)
    return Corpus(records, bad)


def write_corpus(records, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            obj = {"id": r.id, "program": r.program}
            if r.logp_base is not None:
                obj["logp_base"] = r.logp_base
            if r.context_ids:
                obj["context_ids"] = list(r.context_ids)
            if r.metadata:
                obj["meta"] = r.metadata
            fh.write(json.dumps(obj) + "\n")


def record_for(spec: GameSpec, id: str, **kw) -> CorpusRecord:
    return CorpusRecord(id, print_game(spec), spec=spec, **kw)


# ---------------------------------------------------------------------------
# run configuration (flat key=value text)

_WEIGHT_KEYS = {f.name for f in fields(AgentWeights)}
_CONFIG_KEYS = {f.name for f in fields(FunnessConfig)} - {"weights"}


def parse_config(text: str) -> FunnessConfig:
    """Parse ``key = value`` lines (``#`` comments) into a :class:`FunnessConfig`."""
    top, weights = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _WEIGHT_KEYS:
            weights[key] = float(value)
        elif key in _CONFIG_KEYS:
            top[key] = int(value) if key in ("n_selfplay", "n_vs_random", "max_cells") else float(value)
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return FunnessConfig(weights=AgentWeights(**weights), **top)


def load_config(path) -> FunnessConfig:
    return parse_config(Path(path).read_text())


def format_config(config: FunnessConfig) -> str:
    out = [f"{k} = {v}" for k, v in asdict(config).items() if k != "weights"]
    out += [f"{k} = {v}" for k, v in asdict(config.weights).items()]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# evaluation reports

REPORT_COLUMNS = ("id", "rows", "cols", "restricted", "u_sim", "balance", "challenge",
                  "length_score", "mean_length", "p1", "draw", "p2", "payoff", "entropy",
                  "percentile", "logp_base", "n_selfplay", "n_vs_random", "seed")


@dataclass(frozen=True)
class EvalRow:
    id: str
    rows: int
    cols: int
    restricted: bool
    u_sim: float
    balance: float
    challenge: float
    length_score: float
    mean_length: float
    p1: float
    draw: float
    p2: float
    payoff: float
    entropy: float
    percentile: float | None
    logp_base: float | None
    n_selfplay: int
    n_vs_random: int
    seed: int


def evaluate_record(record: CorpusRecord, config: FunnessConfig, seed: int,
                    reference=None) -> EvalRow:
    spec = record.spec or parse(record.program)
    score = funness(spec, config, seed)
    dist = score.selfplay.dist
    return EvalRow(record.id, spec.board.rows, spec.board.cols, in_restricted_grammar(spec),
                   score.u_sim, score.balance, score.challenge, score.length_score,
                   score.mean_length, dist.p1, dist.draw, dist.p2, expected_payoff(dist),
                   outcome_entropy(dist),
                   None if reference is None else percentile(score.u_sim, reference),
                   record.logp_base, config.n_selfplay, config.n_vs_random, seed)


def _evaluate_chunk(args):
    records, config, seed, reference = args
    return [evaluate_record(r, config, seed, reference) for r in records]


def evaluate_corpus(records, config: FunnessConfig, seed: int, reference=None,
                    workers: int = 1) -> list[EvalRow]:
    """Evaluate every record; output order follows input order for any ``workers``."""
    records = [replace(r, spec=r.spec or parse(r.program)) for r in records]
    for r in records:
        if r.spec.board.cells > config.max_cells:
            raise ValueError(f"{r.id}: {r.spec.board.rows}x{r.spec.board.cols} board exceeds "
                             f"max_cells={config.max_cells}")
    if workers <= 1 or len(records) < 2:
        return [evaluate_record(r, config, seed, reference) for r in records]
    chunks = [records[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_evaluate_chunk, [(c, config, seed, reference) for c in chunks]))
    out = [None] * len(records)
    for w, part in enumerate(parts):
        out[w::workers] = part
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def write_report(rows, path) -> None:
    """Write report rows as CSV to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(rows, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(rows, fh)


def _write_rows(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in rows:
        w.writerow([_fmt(getattr(row, c)) for c in REPORT_COLUMNS])


def read_scored(path) -> list:
    """Read (id, logp_base, u_sim) rows from a report CSV or a JSON-lines file."""
    from .maxent import ScoredGame

    path = Path(path)
    if path.suffix == ".csv":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    else:
        rows = [json.loads(x) for x in path.read_text().splitlines() if x.strip()]
    out = []
    for r in rows:
        if r.get("logp_base") in (None, ""):
            raise ValueError(f"{r.get('id')}: missing logp_base")
        out.append(ScoredGame(str(r["id"]), float(r["logp_base"]), float(r["u_sim"])))
    return out


# ---------------------------------------------------------------------------
# proposal scoring against a completions-style endpoint


class EndpointError(RuntimeError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    api_key_env: str = "GAMEFUN_API_KEY"
    model: str = ""
    temperature: float = 0.5
    timeout: float = 60.0
    max_retries: int = 2

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def load_endpoint_config(path) -> EndpointConfig:
    kv = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            k, v = (s.strip() for s in line.split("=", 1))
            kv[k] = v
    conv = {"temperature": float, "timeout": float, "max_retries": int}
    return EndpointConfig(**{k: conv.get(k, str)(v) for k, v in kv.items()})


PROMPT_HEADER = (
    "You are designing a new two-player strategy game played by placing pieces on a grid.\n"
    "Games are written in a small description language. Here are some games written in it:\n"
)
PROMPT_FOOTER = "Write one new game in the same language.\n"


def build_prompt(context) -> str:
    """Instructions followed by each context program, one per block, in order."""
    blocks = [f"Example {i + 1}:\n{program}\n" for i, program in enumerate(context)]
    return PROMPT_HEADER + "\n" + "\n".join(blocks) + "\n" + PROMPT_FOOTER


_TRANSIENT = {408, 425, 429, 500, 502, 503, 504}


def score_proposal(program: str, context, cfg: EndpointConfig,
                   client: httpx.Client | None = None, backoff: float = 0.5) -> float:
    """Mean token log-probability of ``program`` given a prompt built from ``context``.

    Sends the prompt plus program with ``echo`` and ``logprobs`` and averages
    the log-probabilities of tokens that start inside the program span.
    """
    prompt = build_prompt(context)
    body = {"prompt": prompt + program, "max_tokens": 0, "echo": True, "logprobs": 1,
            "temperature": cfg.temperature}
    if cfg.model:
        body["model"] = cfg.model
    headers = {}
    key = os.environ.get(cfg.api_key_env)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    own = client is None
    client = client or httpx.Client(timeout=cfg.timeout)
    try:
        last = None
        for attempt in range(cfg.max_retries + 1):
            try:
                resp = client.post(cfg.base_url.rstrip("/") + "/completions", json=body,
                                   headers=headers)
            except httpx.TransportError as e:
                last = f"transport error: {e}"
            else:
                if resp.status_code in _TRANSIENT:
                    last = f"HTTP {resp.status_code}"
                elif resp.status_code >= 400:
                    raise EndpointError(f"endpoint returned HTTP {resp.status_code}")
                else:
                    return _mean_target_logprob(resp.json(), len(prompt))
            if attempt < cfg.max_retries and backoff:
                time.sleep(backoff * 2 ** attempt)
        raise EndpointError(f"endpoint failed after {cfg.max_retries + 1} attempts ({last})")
    finally:
        if own:
            client.close()


def _mean_target_logprob(payload: dict, start: int) -> float:
    try:
        lp = payload["choices"][0]["logprobs"]
        offsets, values = lp["text_offset"], lp["token_logprobs"]
    except (KeyError, IndexError, TypeError):
        raise EndpointError("endpoint response has no token log-probabilities") from None
    target = [v for off, v in zip(offsets, values) if off >= start and v is not None]
    if not target:
        raise EndpointError("no scored tokens fall inside the target program")
    if not all(math.isfinite(v) for v in target):
        raise EndpointError("non-finite token log-probability")
    return sum(target) / len(target)
