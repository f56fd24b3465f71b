"""Monte-Carlo simulation of the data-availability sampling game.

An adversary commits to a coded block but withholds a hide set; m players
each sample s base-layer positions and accept iff every query is answered;
the oracle pools everything outside the hide set and tries to decode.  The
adversary wins a round when at least one player accepts while the oracle
neither decodes nor produces a fraud proof.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .cmt import CodedMerkleTree
from .codes import (
    CodeError,
    ParameterError,
    SparseParityMatrix,
    find_small_stopping_set,
    peel_pattern,
)
from .fraud import Fraud, FullyDecoded, hash_aware_decode

POISON_MARKER = b"POISON"


def default_validity(block_symbols) -> bool:
    """Block validity rule: invalid iff any symbol contains the poison marker."""
    return not any(POISON_MARKER in s for s in block_symbols)


@dataclass(frozen=True)
class WeakRandom:
    """Hide a uniformly random fraction of the base layer."""

    alpha: float


@dataclass(frozen=True)
class StrongStoppingSet:
    """Hide a set containing a stopping set, padded to the target fraction.

    With ``assumed_undecodable`` the hide set is a plain random subset that
    is decreed to stall the oracle; this models an adversary with stopping
    sets beyond what desk-scale search can certify.
    """

    alpha: float
    assumed_undecodable: bool = False
    search_trials: int = 50


@dataclass(frozen=True)
class ExplicitHideSet:
    positions: frozenset[int]


@dataclass(frozen=True)
class HonestAvailable:
    pass


AdversaryStrategy = Union[WeakRandom, StrongStoppingSet, ExplicitHideSet, HonestAvailable]

WITH_REPLACEMENT = "with_replacement"
WITHOUT_REPLACEMENT = "without_replacement"


@dataclass(frozen=True)
class Challenge:
    h_u: bytes
    h_c: tuple[bytes, ...]
    validity: bool


@dataclass(frozen=True)
class GameConfig:
    m: int
    s: int
    n: int
    adversary: AdversaryStrategy
    sampling: str = WITH_REPLACEMENT
    trials: int = 1000
    seed: int = 0

    def validate(self) -> None:
        if self.m < 1 or self.s < 1 or self.trials < 1:
            raise ParameterError("m, s, trials must be >= 1")
        if self.sampling not in (WITH_REPLACEMENT, WITHOUT_REPLACEMENT):
            raise ParameterError(f"unknown sampling mode {self.sampling!r}")
        if self.sampling == WITHOUT_REPLACEMENT and self.s > self.n:
            raise ParameterError("s must not exceed n without replacement")
        a = self.adversary
        if isinstance(a, (WeakRandom, StrongStoppingSet)):
            if not 0.0 <= a.alpha <= 1.0:
                raise ParameterError(f"alpha {a.alpha} outside [0,1]")
        elif isinstance(a, ExplicitHideSet):
            if a.positions and (min(a.positions) < 0 or max(a.positions) >= self.n):
                raise ParameterError("hide set index out of range")
        elif not isinstance(a, HonestAvailable):
            raise ParameterError(f"unknown strategy {type(a).__name__}")


@dataclass(frozen=True)
class GameResult:
    accepted_players: int
    oracle_decoded: bool
    fraud_proof_emitted: bool
    adversary_success: bool
    soundness_violated: bool
    hide_set: frozenset[int] = field(default_factory=frozenset, repr=False)

    def __post_init__(self):
        expect = (
            self.accepted_players >= 1
            and not self.oracle_decoded
            and not self.fraud_proof_emitted
        )
        assert self.adversary_success == expect, "round adjudication inconsistent"
        assert self.soundness_violated == self.adversary_success


class StoppingSetUnavailableError(CodeError):
    """No stopping set small enough for the requested hide fraction."""


def adversary_hide_set(
    strategy: AdversaryStrategy,
    code_or_n: Union[SparseParityMatrix, int],
    seed: int = 0,
) -> frozenset[int]:
    """Draw the hide set one adversary commits to for a round."""
    n = code_or_n.n_cols if isinstance(code_or_n, SparseParityMatrix) else int(code_or_n)
    rng = random.Random(seed)
    if isinstance(strategy, HonestAvailable):
        return frozenset()
    if isinstance(strategy, ExplicitHideSet):
        return frozenset(strategy.positions)
    h = math.ceil(strategy.alpha * n)
    if h == 0:
        return frozenset()
    if isinstance(strategy, WeakRandom):
        return frozenset(rng.sample(range(n), h))
    if strategy.assumed_undecodable:
        return frozenset(rng.sample(range(n), h))
    if not isinstance(code_or_n, SparseParityMatrix):
        raise ParameterError("stopping-set search needs the parity-check matrix")
    report = find_small_stopping_set(code_or_n, trials=strategy.search_trials,
                                     seed=seed)
    if not report.is_stopping or len(report.positions) > h:
        raise StoppingSetUnavailableError(
            f"no stopping set of size <= {h} found"
        )
    core = set(report.positions)
    pad = [j for j in range(n) if j not in core]
    rng.shuffle(pad)
    core.update(pad[: h - len(core)])
    return frozenset(core)


def _draw_queries(rng: np.random.Generator, config: GameConfig) -> np.ndarray:
    if config.sampling == WITH_REPLACEMENT:
        return rng.integers(0, config.n, size=(config.m, config.s))
    return np.stack(
        [rng.choice(config.n, size=config.s, replace=False) for _ in range(config.m)]
    )


def _oracle_outcome(context, config: GameConfig, hide: frozenset[int]):
    """(decoded, fraud_emitted) when everything outside the hide set is known."""
    a = config.adversary
    if not hide and not isinstance(context, CodedMerkleTree):
        return True, False
    if isinstance(context, CodedMerkleTree):
        words = [list(layer) for layer in context.layers]
        for p in hide:
            words[0][p] = None
        outcome = hash_aware_decode(context.root, words, context.params)
        if isinstance(outcome, FullyDecoded):
            return True, False
        if isinstance(outcome, Fraud):
            return False, True
        return False, False
    if isinstance(a, StrongStoppingSet) and a.assumed_undecodable:
        return False, False
    if isinstance(context, SparseParityMatrix):
        return not peel_pattern(context, hide), False
    raise ParameterError(
        "oracle needs a parity-check matrix or tree for this strategy"
    )


def play_round(
    config: GameConfig,
    context: Union[SparseParityMatrix, CodedMerkleTree, None] = None,
    rng: Optional[np.random.Generator] = None,
) -> GameResult:
    """One full game round with the index-based reply policy."""
    config.validate()
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed]))
    code = context
    if isinstance(context, CodedMerkleTree):
        code = context.params.layer_codes[0]
    hide_seed = int(rng.integers(0, 2**32))
    hide = adversary_hide_set(
        config.adversary,
        code if isinstance(code, SparseParityMatrix) else config.n,
        hide_seed,
    )
    queries = _draw_queries(rng, config)
    mask = np.zeros(config.n, dtype=bool)
    if hide:
        mask[list(hide)] = True
    accepted = int((~mask[queries].any(axis=1)).sum())
    decoded, fraud = _oracle_outcome(context, config, hide)
    success = accepted >= 1 and not decoded and not fraud
    return GameResult(accepted, decoded, fraud, success, success, hide)


def _fast_path_ok(config: GameConfig, context) -> bool:
    """Vectorizable: fixed-size hide set, decode verdict independent of draws."""
    a = config.adversary
    if config.sampling != WITH_REPLACEMENT:
        return False
    if isinstance(a, (HonestAvailable, ExplicitHideSet)):
        return True
    if isinstance(a, StrongStoppingSet) and a.assumed_undecodable:
        return True
    return False


def _estimate_fast(config: GameConfig, context) -> tuple[float, float]:
    """Chunked vectorized estimate for strategies with one committed hide set."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed]))
    hide_seed = int(rng.integers(0, 2**32))
    hide = adversary_hide_set(config.adversary, config.n, hide_seed)
    mask = np.zeros(config.n, dtype=bool)
    if hide:
        mask[list(hide)] = True
    if mask.all():
        return 0.0, 0.0
    decoded, fraud = _oracle_outcome(context, config, hide)
    if decoded or fraud:
        return 0.0, 0.0
    successes = 0
    done = 0
    chunk = 4096
    while done < config.trials:
        t = min(chunk, config.trials - done)
        draws = rng.integers(0, config.n, size=(t, config.m, config.s))
        accept = ~mask[draws].any(axis=2)
        successes += int(accept.any(axis=1).sum())
        done += t
    p = successes / config.trials
    return p, math.sqrt(p * (1.0 - p) / config.trials)


def estimate_asp(
    config: GameConfig,
    context: Union[SparseParityMatrix, CodedMerkleTree, None] = None,
) -> tuple[float, float]:
    """Monte-Carlo estimate of the adversary's winning probability."""
    config.validate()
    if config.trials < 100:
        raise ParameterError("need at least 100 trials for a stable estimate")
    if _fast_path_ok(config, context):
        return _estimate_fast(config, context)
    successes = 0
    for t in range(config.trials):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, t]))
        result = play_round(config, context, rng)
        successes += result.adversary_success
    p = successes / config.trials
    return p, math.sqrt(p * (1.0 - p) / config.trials)


def player_accept_probability(n: int, hide_size: int, s: int,
                              sampling: str = WITH_REPLACEMENT) -> float:
    """Closed-form acceptance probability of one player given a hide set size."""
    if not 0 <= hide_size <= n:
        raise ParameterError("hide size out of range")
    if sampling == WITH_REPLACEMENT:
        return (1.0 - hide_size / n) ** s
    if sampling == WITHOUT_REPLACEMENT:
        p = 1.0
        for j in range(s):
            p *= (n - hide_size - j) / (n - j)
            if p == 0.0:
                break
        return p
    raise ParameterError(f"unknown sampling mode {sampling!r}")


def any_player_accept_probability(n: int, hide_size: int, m: int, s: int,
                                  sampling: str = WITH_REPLACEMENT) -> float:
    """P(at least one of m independent players accepts)."""
    p = player_accept_probability(n, hide_size, s, sampling)
    return -math.expm1(m * math.log1p(-p)) if p < 1.0 else 1.0


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def strategy_to_json_obj(strategy: AdversaryStrategy) -> dict:
    if isinstance(strategy, WeakRandom):
        return {"kind": "weak_random", "alpha": strategy.alpha}
    if isinstance(strategy, StrongStoppingSet):
        return {
            "kind": "strong_stopping_set",
            "alpha": strategy.alpha,
            "assumed_undecodable": strategy.assumed_undecodable,
            "search_trials": strategy.search_trials,
        }
    if isinstance(strategy, ExplicitHideSet):
        return {"kind": "explicit_hide_set", "positions": sorted(strategy.positions)}
    if isinstance(strategy, HonestAvailable):
        return {"kind": "honest_available"}
    raise ParameterError(f"unknown strategy {type(strategy).__name__}")


def strategy_from_json_obj(obj: dict) -> AdversaryStrategy:
    kind = obj.get("kind")
    if kind == "weak_random":
        return WeakRandom(obj["alpha"])
    if kind == "strong_stopping_set":
        return StrongStoppingSet(
            obj["alpha"],
            obj.get("assumed_undecodable", False),
            obj.get("search_trials", 50),
        )
    if kind == "explicit_hide_set":
        return ExplicitHideSet(frozenset(obj["positions"]))
    if kind == "honest_available":
        return HonestAvailable()
    raise ParameterError(f"unknown strategy kind {kind!r}")


def config_to_json(config: GameConfig) -> str:
    return json.dumps(
        {
            "m": config.m,
            "s": config.s,
            "n": config.n,
            "adversary": strategy_to_json_obj(config.adversary),
            "sampling": config.sampling,
            "trials": config.trials,
            "seed": config.seed,
        },
        indent=2,
    )


def config_from_json(text: str) -> GameConfig:
    obj = json.loads(text)
    config = GameConfig(
        obj["m"], obj["s"], obj["n"],
        strategy_from_json_obj(obj["adversary"]),
        obj.get("sampling", WITH_REPLACEMENT),
        obj.get("trials", 1000),
        obj.get("seed", 0),
    )
    config.validate()
    return config
