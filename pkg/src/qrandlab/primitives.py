"""Generator interfaces, the abort-aware combinators, and determinism audits.

``BotValue`` is the output type of abort-capable generators: either a
fixed-width bitstring or the distinguished abort symbol.  ``is_bot``
and the two plurality votes are the combinators the constructions and
security games are built from.  ``determinism_audit`` measures how
deterministic a generator actually is on a key by repeated evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional, Sequence

import numpy as np

from .qcore import StateVector
from .rng import SeededRng

GENERATOR_KINDS = ("prg", "prg-qs", "bot-prg", "sprs-qs", "prf-qs", "owsg")

# Pairwise fidelity at or above this clusters two state outputs as equal;
# exact state equality is meaningless under floating point.
STATE_EQUAL_FIDELITY = 1 - 1e-8


@dataclass(frozen=True)
class BotValue:
    """A bitstring or the abort symbol."""

    payload: Optional[str]

    def __post_init__(self):
        if self.payload is not None and (
            not isinstance(self.payload, str) or set(self.payload) - {"0", "1"}
        ):
            raise ValueError(f"payload must be a '0'/'1' string, got {self.payload!r}")

    @classmethod
    def bot(cls) -> "BotValue":
        return cls(None)

    @classmethod
    def of(cls, bits: str) -> "BotValue":
        return cls(bits)

    @property
    def is_bot(self) -> bool:
        return self.payload is None

    def __str__(self) -> str:
        return "bot" if self.is_bot else self.payload


BOT = BotValue.bot()


def is_bot(a: BotValue, b) -> BotValue:
    """Abort-hiding combinator: abort iff ``a`` aborts, else ``b``."""
    if a.is_bot:
        return BOT
    return b if isinstance(b, BotValue) else BotValue.of(b)


def _plurality(values: Sequence[Hashable]):
    """Most common element; ties broken by earliest first occurrence."""
    counts: dict = {}
    first: dict = {}
    for i, v in enumerate(values):
        counts[v] = counts.get(v, 0) + 1
        first.setdefault(v, i)
    return max(counts, key=lambda v: (counts[v], -first[v]))


def vote(values: Sequence[BotValue]) -> BotValue:
    """Plurality over all entries, the abort symbol included."""
    if not values:
        raise ValueError("vote needs a nonempty sequence")
    return _plurality(list(values))


def vote_non_bot(values: Sequence[BotValue]) -> BotValue:
    """Plurality over non-abort entries; abort only if every entry aborts."""
    if not values:
        raise ValueError("vote needs a nonempty sequence")
    non_bot = [v for v in values if not v.is_bot]
    if not non_bot:
        return BOT
    return _plurality(non_bot)


@dataclass(frozen=True)
class GeneratorHandle:
    """A primitive instance: its kind, lengths, and callables.

    ``eval`` maps (key, rng) to the generator output -- a BotValue or
    bitstring for classical kinds, a StateVector for state kinds; for
    'prf-qs' it maps (key, x, rng).  ``qsamp`` is the key sampler for
    quantum-input-sampling kinds.  Handles are immutable and safe to
    share; all randomness comes in through the per-call rng.
    """

    kind: str
    input_len: int
    output_len: int
    eval: Callable = field(compare=False)
    qsamp: Optional[Callable] = field(default=None, compare=False)
    dim: Optional[int] = None
    domain: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind in ("prg", "prg-qs", "bot-prg") and self.output_len <= self.input_len:
            raise ValueError(
                f"{self.kind} must expand: output {self.output_len} <= input {self.input_len}"
            )
        if self.kind in ("prg-qs", "sprs-qs", "prf-qs") and self.qsamp is None:
            raise ValueError(f"{self.kind} needs a qsamp key sampler")
        if self.kind in ("sprs-qs", "owsg") and self.dim is None:
            raise ValueError(f"{self.kind} needs a state dimension")

    def sample_key(self, rng: SeededRng):
        if self.qsamp is not None:
            return self.qsamp(rng)
        return rng.bits(self.input_len)


@dataclass(frozen=True)
class DeterminismAudit:
    key: object
    trials: int
    modal_value: object
    modal_frequency: float

    def __post_init__(self):
        if not 1 / self.trials <= self.modal_frequency <= 1:
            raise ValueError(f"modal frequency {self.modal_frequency} out of range")


def _cluster_states(outputs: Iterable[StateVector]):
    """Greedy fidelity clustering; two states match above STATE_EQUAL_FIDELITY."""
    reps: list[StateVector] = []
    counts: list[int] = []
    for psi in outputs:
        for i, rep in enumerate(reps):
            if rep.fidelity(psi) >= STATE_EQUAL_FIDELITY:
                counts[i] += 1
                break
        else:
            reps.append(psi)
            counts.append(1)
    best = int(np.argmax(counts))
    return reps[best], counts[best]


def determinism_audit(
    gen: GeneratorHandle, key, trials: int, rng: SeededRng
) -> DeterminismAudit:
    """Evaluate ``gen`` on ``key`` repeatedly; report the modal output's frequency."""
    if trials < 2:
        raise ValueError(f"audit needs at least 2 trials, got {trials}")
    outputs = [gen.eval(key, rng.child(i)) for i in range(trials)]
    if isinstance(outputs[0], StateVector):
        modal, count = _cluster_states(outputs)
    else:
        modal = _plurality(outputs)
        count = outputs.count(modal)
    return DeterminismAudit(key, trials, modal, count / trials)
