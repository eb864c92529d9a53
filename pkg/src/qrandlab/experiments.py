"""The boxed security experiments and the moment-closeness statistic.

Each experiment runs independent trials, each on its own child rng
stream, so a run can be sharded and merged without changing a single
draw.  Advantage is always reported as success rate minus 1/2, with a
Wilson 95% interval.

The per-trial draw order is part of the reproducibility contract:
``key, b, (challenge randomness if b = 1), generator evaluations,
adversary``.  With a deterministic never-aborting generator this makes
the single-query abort game couple exactly with the plain
distinguishing game under a shared seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .primitives import BotValue, GeneratorHandle, is_bot
from .qcore import MemoryBudgetError, StateVector, symmetric_moment
from .rng import SeededRng, int_to_bits

Z95 = 1.959963984540054  # two-sided 95% normal quantile


class BudgetExceededError(RuntimeError):
    pass


class CallBudget:
    """Counts an adversary's oracle/generator calls against its declared budget."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def charge(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceededError(
                f"adversary exceeded its declared budget of {self.limit} calls"
            )


@dataclass(frozen=True)
class AdversaryHandle:
    """A strategy plus its declared work budget.

    ``decide`` receives (challenge, budget, rng); the challenge is an
    s-bit string for the distinguishing game, a tuple of outputs for
    the abort game, and a tuple of state copies for the inversion game.
    """

    strategy_id: str
    work_budget: int
    decide: Callable = field(compare=False)
    oracle_access: tuple[str, ...] = ()


def coin_flip_adversary() -> AdversaryHandle:
    return AdversaryHandle("coin-flip", 0, lambda challenge, budget, rng: rng.bit())


def constant_adversary(bit: int) -> AdversaryHandle:
    return AdversaryHandle(f"constant-{bit}", 0, lambda challenge, budget, rng: bit)


def padding_check_adversary(lam: int) -> AdversaryHandle:
    """Perfect distinguisher for the zero-padding generator."""

    def decide(challenge: str, budget, rng) -> int:
        return 0 if set(challenge[lam:]) <= {"0"} else 1

    return AdversaryHandle("padding-check", 0, decide)


def bot_count_adversary() -> AdversaryHandle:
    """Guess from the abort pattern only; zero advantage by design of the game."""

    def decide(challenge: Sequence[BotValue], budget, rng) -> int:
        return 1 if any(v.is_bot for v in challenge) else 0

    return AdversaryHandle("bot-count", 0, decide)


def bruteforce_prg_handle(candidate: GeneratorHandle) -> AdversaryHandle:
    """Image-membership search over the candidate's whole key space."""
    from .oracles import bruteforce_prg_adversary

    def decide(challenge: str, budget: CallBudget, rng) -> int:
        budget.charge(1 << candidate.input_len)
        return bruteforce_prg_adversary(candidate, challenge)

    return AdversaryHandle("bruteforce-image", 1 << 20, decide)


def bruteforce_owsg_handle(gen: GeneratorHandle) -> AdversaryHandle:
    """Maximum-likelihood key search over the generator's whole key space."""
    from .oracles import bruteforce_owsg_adversary

    def decide(copies: Sequence[StateVector], budget: CallBudget, rng) -> str:
        budget.charge(1 << gen.input_len)
        return bruteforce_owsg_adversary(gen, list(copies))

    return AdversaryHandle("bruteforce-ml", 1 << 20, decide)


def owsg_coin_flip_adversary() -> AdversaryHandle:
    """Null strategy for the inversion game: measure the first copy to read
    off a key, then on a fair coin either return it or flip its last bit.

    Against an injective orthogonal-output generator the final
    verification succeeds exactly half the time, which is the Bernoulli
    null the calibration needs.
    """

    def decide(copies: Sequence[StateVector], budget, rng) -> str:
        from .qcore import measure_computational

        first = copies[0]
        lam = first.dim.bit_length() - 1
        key = int_to_bits(measure_computational(first, rng), lam)
        if rng.bit():
            return key
        return key[:-1] + ("1" if key[-1] == "0" else "0")

    return AdversaryHandle("coin-flip", 0, decide)


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    parameters: dict
    seed: int
    trials: int
    successes: int
    advantage: float
    ci95: tuple[float, float]
    wallclock_ms: float

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes out of range")

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "seed": self.seed,
            "trials": self.trials,
            "successes": self.successes,
            "advantage": self.advantage,
            "ci95": list(self.ci95),
            "wallclock_ms": self.wallclock_ms,
        }


def advantage_ci(successes: int, trials: int) -> tuple[float, tuple[float, float]]:
    """Wilson 95% interval for the success probability, shifted by -1/2."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p = successes / trials
    z2 = Z95 * Z95
    denom = 1 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = Z95 * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return p - 0.5, (center - half - 0.5, center + half - 0.5)


def _finalize(name, parameters, seed, trials, successes, t0) -> ExperimentReport:
    adv, ci = advantage_ci(successes, trials)
    return ExperimentReport(
        name=name,
        parameters=parameters,
        seed=seed,
        trials=trials,
        successes=successes,
        advantage=adv,
        ci95=ci,
        wallclock_ms=(time.perf_counter() - t0) * 1e3,
    )


def merge_reports(reports: Sequence[ExperimentReport]) -> ExperimentReport:
    """Combine shards of one experiment by summing successes and trials.

    Associative and order-independent; shards must agree on name and
    parameters.
    """
    if not reports:
        raise ValueError("nothing to merge")
    head = reports[0]

    def shared(params):  # shards differ exactly in their trial window
        return {k: v for k, v in params.items() if k != "first_trial"}

    for rep in reports[1:]:
        if rep.name != head.name or shared(rep.parameters) != shared(head.parameters):
            raise ValueError("cannot merge reports of different experiments")
    trials = sum(r.trials for r in reports)
    successes = sum(r.successes for r in reports)
    adv, ci = advantage_ci(successes, trials)
    parameters = dict(head.parameters)
    if "first_trial" in parameters:
        parameters["first_trial"] = min(r.parameters["first_trial"] for r in reports)
    return ExperimentReport(
        name=head.name,
        parameters=parameters,
        seed=head.seed,
        trials=trials,
        successes=successes,
        advantage=adv,
        ci95=ci,
        wallclock_ms=sum(r.wallclock_ms for r in reports),
    )


def _challenge_bits(value) -> str:
    if isinstance(value, BotValue):
        if value.is_bot:
            raise ValueError("generator aborted inside the distinguishing game")
        return value.payload
    return value


def exp_prg(
    gen: GeneratorHandle,
    adversary: AdversaryHandle,
    trials: int,
    rng: SeededRng,
    first_trial: int = 0,
) -> ExperimentReport:
    """Distinguishing game: generator output vs uniform string.

    Keys come from the generator's own sampler when it has one,
    uniformly otherwise.
    """
    t0 = time.perf_counter()
    s = gen.output_len
    successes = 0
    for i in range(first_trial, first_trial + trials):
        trial = rng.child(i)
        key = gen.sample_key(trial)
        b = trial.bit()
        if b == 0:
            y = _challenge_bits(gen.eval(key, trial))
        else:
            y = trial.bits(s)
        guess = adversary.decide(y, CallBudget(adversary.work_budget), trial)
        successes += guess == b
    params = {
        "generator": gen.description,
        "adversary": adversary.strategy_id,
        "output_len": s,
        "first_trial": first_trial,
    }
    return _finalize("prg", params, rng.seed, trials, successes, t0)


def exp_botprg(
    gen: GeneratorHandle,
    adversary: AdversaryHandle,
    q: int,
    trials: int,
    rng: SeededRng,
    first_trial: int = 0,
) -> ExperimentReport:
    """Abort-aware distinguishing game with q queries per trial.

    The random branch hides abort events: each query is the abort-hiding
    combinator applied to a fresh generator evaluation and one fixed
    uniform string, so abort patterns match across branches.
    """
    if q < 1:
        raise ValueError("need q >= 1 queries")
    t0 = time.perf_counter()
    m = gen.output_len
    successes = 0
    for i in range(first_trial, first_trial + trials):
        trial = rng.child(i)
        key = gen.sample_key(trial)
        b = trial.bit()
        if b == 0:
            ys = tuple(_as_bot(gen.eval(key, trial)) for _ in range(q))
        else:
            y = trial.bits(m)
            ys = tuple(is_bot(_as_bot(gen.eval(key, trial)), y) for _ in range(q))
        guess = adversary.decide(ys, CallBudget(adversary.work_budget), trial)
        successes += guess == b
    params = {
        "generator": gen.description,
        "adversary": adversary.strategy_id,
        "q": q,
        "output_len": m,
        "first_trial": first_trial,
    }
    return _finalize("bot-prg", params, rng.seed, trials, successes, t0)


def _as_bot(value) -> BotValue:
    return value if isinstance(value, BotValue) else BotValue.of(value)


def exp_owsg(
    gen: GeneratorHandle,
    adversary: AdversaryHandle,
    t: int,
    trials: int,
    rng: SeededRng,
    first_trial: int = 0,
) -> ExperimentReport:
    """Inversion game: recover a key whose state passes projective verification.

    The final measurement is realized analytically as a Bernoulli draw
    from the exact fidelity between the guessed key's state and a
    regenerated copy.
    """
    if t < 1:
        raise ValueError("need t >= 1 copies")
    t0 = time.perf_counter()
    successes = 0
    for i in range(first_trial, first_trial + trials):
        trial = rng.child(i)
        key = trial.bits(gen.input_len)
        copies = tuple(gen.eval(key, trial) for _ in range(t))
        guess = adversary.decide(copies, CallBudget(adversary.work_budget), trial)
        verifier_state = gen.eval(key, trial)
        prob = gen.eval(guess, trial).fidelity(verifier_state)
        successes += trial.uniform() < prob
    params = {
        "generator": gen.description,
        "adversary": adversary.strategy_id,
        "t": t,
        "first_trial": first_trial,
    }
    return _finalize("owsg", params, rng.seed, trials, successes, t0)


# -- moment-closeness statistic ----------------------------------------------

_MAX_EXACT_ENUM_BITS = 16


def _sym_pair_basis(dim: int):
    xs, ys = np.triu_indices(dim)
    weights = np.where(xs == ys, 1.0, math.sqrt(2.0))
    return xs, ys, weights


def _keyed_states(gen: GeneratorHandle, keys, rng: SeededRng, offset: int) -> np.ndarray:
    rows = [gen.eval(k, rng.child(offset + j)).amplitudes for j, k in enumerate(keys)]
    return np.array(rows)


def _key_iter(gen: GeneratorHandle, n_keys: int, mode: str, rng: SeededRng):
    if mode == "exact-enum":
        if gen.input_len > _MAX_EXACT_ENUM_BITS:
            raise MemoryBudgetError(
                f"exact enumeration capped at 2^{_MAX_EXACT_ENUM_BITS} keys"
            )
        return [int_to_bits(k, gen.input_len) for k in range(1 << gen.input_len)]
    if mode == "monte-carlo":
        return [gen.sample_key(rng.child(j)) for j in range(n_keys)]
    raise ValueError(f"mode must be 'exact-enum' or 'monte-carlo', got {mode!r}")


def _moment_matrix(gen: GeneratorHandle, t: int, keys, rng: SeededRng, chunk: int = 2000):
    """Key-averaged t-copy moment.  For t = 2 the average is accumulated in
    symmetric-pair coordinates (exact: tensor squares live entirely in the
    symmetric subspace), which also halves the gramian cost.

    Evaluation rng streams are offset past the key-sampling streams so a
    stochastic generator never replays the draws that produced its key.
    """
    dim = gen.dim
    if dim**t > 4096:
        raise MemoryBudgetError(f"dim**t = {dim ** t} exceeds the tensor budget")
    offset = len(keys)
    if t == 2:
        xs, ys, weights = _sym_pair_basis(dim)
        acc = np.zeros((len(xs), len(xs)), dtype=complex)
        for start in range(0, len(keys), chunk):
            batch = keys[start : start + chunk]
            states = _keyed_states(gen, batch, rng, offset + start)
            w = states[:, xs] * states[:, ys] * weights
            acc += w.conj().T @ w
        return acc / len(keys), True
    acc = np.zeros((dim**t, dim**t), dtype=complex)
    for start in range(0, len(keys), chunk):
        batch = keys[start : start + chunk]
        states = _keyed_states(gen, batch, rng, offset + start)
        w = states
        for _ in range(t - 1):
            w = (w[:, :, None] * states[:, None, :]).reshape(len(batch), -1)
        acc += w.conj().T @ w
    return acc / len(keys), False


def moment_distance(
    gen: GeneratorHandle,
    t: int,
    n_keys: int,
    mode: str = "monte-carlo",
    rng: Optional[SeededRng] = None,
    chunk: int = 2000,
) -> float:
    """Trace distance between the generator's key-averaged t-copy moment
    and the Haar t-copy moment."""
    if rng is None:
        rng = SeededRng(0)
    keys = _key_iter(gen, n_keys, mode, rng)
    avg, in_sym_coords = _moment_matrix(gen, t, keys, rng, chunk)
    if in_sym_coords:
        target = np.eye(avg.shape[0]) / avg.shape[0]
    else:
        target = symmetric_moment(gen.dim, t).matrix
    eigs = np.linalg.eigvalsh(avg - target)
    return float(0.5 * np.abs(eigs).sum())


def moment_distance_ci(
    gen: GeneratorHandle,
    t: int,
    n_keys: int,
    rng: SeededRng,
    n_batches: int = 25,
    n_boot: int = 200,
) -> tuple[float, tuple[float, float]]:
    """Monte-Carlo moment distance with a batch-bootstrap 95% interval.

    The interval is the bootstrap spread centered at the point estimate:
    the plug-in statistic carries an upward noise bias that is common to
    the estimate and every resampled replicate, so the replicate spread,
    not the replicate location, is what measures sampling variability.
    Keeps one partial moment per batch, so it is restricted to small
    state dimensions (the acceptance study uses it at dim 8).
    """
    dim = gen.dim
    if t != 2 or dim > 22:
        raise MemoryBudgetError("bootstrap interval supported for t=2, dim <= 22 only")
    xs, ys, weights = _sym_pair_basis(dim)
    per_batch = n_keys // n_batches
    if per_batch < 1:
        raise ValueError("need at least one key per batch")
    batches = []
    for b in range(n_batches):
        keys = [gen.sample_key(rng.child(b * per_batch + j)) for j in range(per_batch)]
        states = _keyed_states(gen, keys, rng, (n_batches + b) * per_batch)
        w = states[:, xs] * states[:, ys] * weights
        batches.append((w.conj().T @ w) / per_batch)
    batches = np.array(batches)
    target = np.eye(batches.shape[1]) / batches.shape[1]

    def distance(mat):
        return float(0.5 * np.abs(np.linalg.eigvalsh(mat - target)).sum())

    est = distance(batches.mean(axis=0))
    boot_rng = rng.child(2**31)  # clear of every key/eval child stream
    draws = []
    for _ in range(n_boot):
        idx = boot_rng.integers(0, n_batches, size=n_batches)
        draws.append(distance(batches[idx].mean(axis=0)))
    half = float(np.percentile(draws, 97.5) - np.percentile(draws, 2.5)) / 2
    return est, (est - half, est + half)
