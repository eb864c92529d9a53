"""The three separation-oracle worlds and the brute-force search adversaries.

A world is a seed plus a kind; every function the world exposes is
derived lazily from the seed by the keyed SHA-256 derivation in
``rng``, so exponential tables never materialize and two runs (or two
implementations) with the same seed see bit-identical worlds.

Kinds:

* ``flip-world``  -- random O_n: n -> 8n bits and P_n: 2n -> n bits; the
  swap unitary exchanges the all-zeros basis state with the uniform
  superposition over (1, x, O_n(x)); the verify/eval channel maps
  (x, y, a) to P_n(x, a) when O_n(x) = y and aborts otherwise.
* ``bot-world``   -- a permutation P_n on n bits marks a 2^-w fraction
  of inputs as bad; bad inputs abort with probability Q_n(x)/2^n,
  good inputs evaluate to O_n(x) deterministically.
* ``sampler-world`` -- like flip-world but O_n: n -> n bits and the key
  sampler is classical: each call returns a fresh uniform (x, O_n(x)).

The brute-force adversaries realize, at toy key sizes, the exhaustive
attacks that an unbounded search oracle would mount: image membership
for generators and maximum-likelihood key recovery for state
generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .primitives import BOT, BotValue, GeneratorHandle, _plurality
from .qcore import MemoryBudgetError, RankTwoFlip, StateVector, apply_flip, measure_computational
from .rng import SeededRng, derive_int, fisher_yates_table, int_to_bits

WORLD_KINDS = ("flip-world", "bot-world", "sampler-world")
DERIVATION_ID = "sha256ctr/fisher-yates/v1"

# Exhaustive stand-ins for an unbounded search oracle stay honest only
# while brute force is actually exhaustive; cap the key spaces.
MAX_PRG_KEY_BITS = 20
MAX_OWSG_KEY_BITS = 16

_MAX_DENSE_FLIP_N = 2  # 2^(9n+1) amplitudes: n=2 is 8 MB, n=3 is 4 GB
_MAX_GOOD_SET_N = 20


class WrongWorldKindError(ValueError):
    pass


class KeySpaceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class BotOracleParams:
    """Abort-oracle shape at one input length: error rate mu = n^-c and
    the bad-prefix width w, the smallest integer with 2^-w <= mu/4."""

    n: int
    c: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.w > self.n:
            raise ValueError(
                f"bad-prefix width w={self.w} exceeds n={self.n}; mu={self.mu} is too small"
            )

    @property
    def mu(self) -> float:
        return self.n ** (-self.c)

    @property
    def w(self) -> int:
        return math.ceil(math.log2(4 / self.mu))

    @property
    def m(self) -> int:
        """Output length; any polynomial > n works, fixed here to 2n."""
        return 2 * self.n


def _check_w_window(params: BotOracleParams) -> None:
    lo, hi = params.mu / 16, params.mu / 4
    if not lo <= 2.0**-params.w <= hi:
        raise ValueError(
            f"2^-w = {2.0 ** -params.w} falls outside [mu/16, mu/4] = [{lo}, {hi}]"
        )


@dataclass(frozen=True)
class OracleWorld:
    """Seed-derived oracle family; immutable and shareable.

    Per-call randomness (the abort coin, the sampler's fresh x) comes
    from the caller's rng, never from the world, so trials parallelize
    deterministically.
    """

    kind: str
    seed: int
    n_max: int
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in WORLD_KINDS:
            raise ValueError(f"unknown world kind {self.kind!r}")
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if self.kind == "bot-world":
            _check_w_window(self.bot_params(self.n_max))

    def _check_n(self, n: int) -> None:
        if not 2 <= n <= self.n_max:
            raise ValueError(f"n={n} outside this world's range [2, {self.n_max}]")

    # -- derived functions ------------------------------------------------

    def o_output_len(self, n: int) -> int:
        if self.kind == "flip-world":
            return 8 * n
        if self.kind == "sampler-world":
            return n
        return self.bot_params(n).m

    def o_value(self, n: int, x: int) -> int:
        self._check_n(n)
        return _derived_value(self.seed, f"{self.kind}/O", n, x, self.o_output_len(n))

    def p_value(self, n: int, xa: int) -> int:
        """P_n: 2n -> n bits for flip/sampler worlds."""
        self._check_n(n)
        if self.kind == "bot-world":
            raise WrongWorldKindError("bot-world's P_n is a permutation; use permutation()")
        return _derived_value(self.seed, f"{self.kind}/P", n, xa, n)

    def q_value(self, n: int, x: int) -> int:
        self._check_n(n)
        if self.kind != "bot-world":
            raise WrongWorldKindError(f"{self.kind} has no Q_n")
        return _derived_value(self.seed, f"{self.kind}/Q", n, x, n)

    def permutation(self, n: int) -> np.ndarray:
        self._check_n(n)
        if self.kind != "bot-world":
            raise WrongWorldKindError(f"{self.kind} has no permutation table")
        return _permutation_table(self.seed, n)

    def bot_params(self, n: int) -> BotOracleParams:
        if self.kind != "bot-world":
            raise WrongWorldKindError(f"{self.kind} has no abort parameters")
        return BotOracleParams(n, self.c)

    # -- serialization -----------------------------------------------------

    def to_record(self) -> dict:
        rec = {
            "world-kind": self.kind,
            "seed": self.seed,
            "n-max": self.n_max,
            "derivation-id": DERIVATION_ID,
        }
        if self.kind == "bot-world":
            rec["c"] = self.c
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "OracleWorld":
        if rec.get("derivation-id", DERIVATION_ID) != DERIVATION_ID:
            raise ValueError(f"unsupported derivation-id {rec.get('derivation-id')!r}")
        return cls(
            kind=rec["world-kind"],
            seed=rec["seed"],
            n_max=rec["n-max"],
            c=rec.get("c", 1.0),
        )


@lru_cache(maxsize=8)
def _permutation_table(seed: int, n: int) -> np.ndarray:
    table = fisher_yates_table(seed, "bot-world/P", n)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=1 << 20)
def _derived_value(seed: int, function_id: str, n: int, x: int, nbits: int) -> int:
    # pure function of its arguments; caching only spares repeated hashing
    return derive_int(seed, function_id, n, x, nbits)


# -- bot-world ---------------------------------------------------------------


def bot_oracle_eval(world: OracleWorld, x: str, rng: SeededRng) -> BotValue:
    """One abort-oracle query on the n-bit input x.

    Good inputs (P_n(x) outside the all-zeros w-prefix) return O_n(x)
    with certainty; bad inputs abort with probability Q_n(x)/2^n.
    """
    if world.kind != "bot-world":
        raise WrongWorldKindError(f"bot_oracle_eval needs a bot-world, got {world.kind}")
    n = len(x)
    params = world.bot_params(n)
    xi = int(x, 2)
    y = int_to_bits(world.o_value(n, xi), params.m)
    z = int(world.permutation(n)[xi])
    if z >> (n - params.w) == 0:  # first w bits of P_n(x) are all zero
        p_x = world.q_value(n, xi) / (1 << n)
        if rng.uniform() < p_x:
            return BOT
    return BotValue.of(y)


def bot_oracle_good_set(world: OracleWorld, n: int) -> set[str]:
    """Exact good set by exhaustive enumeration (n <= 20)."""
    if world.kind != "bot-world":
        raise WrongWorldKindError(f"good set needs a bot-world, got {world.kind}")
    if n > _MAX_GOOD_SET_N:
        raise MemoryBudgetError(f"exhaustive good set capped at n <= {_MAX_GOOD_SET_N}")
    params = world.bot_params(n)
    table = world.permutation(n)
    good = np.nonzero(table >> (n - params.w) != 0)[0]
    return {int_to_bits(int(x), n) for x in good}


def bot_prg_handle(world: OracleWorld, n: int) -> GeneratorHandle:
    """The abort oracle packaged as an abort-capable generator on n-bit keys."""
    params = world.bot_params(n)
    return GeneratorHandle(
        kind="bot-prg",
        input_len=n,
        output_len=params.m,
        eval=lambda key, rng: bot_oracle_eval(world, key, rng),
        description=f"bot-world seed={world.seed} n={n}",
    )


# -- flip-world --------------------------------------------------------------


def flip_state_dim(n: int) -> int:
    return 1 << (9 * n + 1)


def _flip_index(n: int, x: int, y: int) -> int:
    return (1 << (9 * n)) | (x << (8 * n)) | y


def decode_flip_index(index: int, n: int) -> tuple[int, str, str]:
    """Split a 9n+1 bit basis index into (leading bit, x, y)."""
    lead = index >> (9 * n)
    x = (index >> (8 * n)) & ((1 << n) - 1)
    y = index & ((1 << (8 * n)) - 1)
    return lead, int_to_bits(x, n), int_to_bits(y, 8 * n)


def flip_target_state(world: OracleWorld, n: int) -> StateVector:
    """The swap target: uniform superposition over (1, x, O_n(x))."""
    amps = np.zeros(flip_state_dim(n), dtype=complex)
    amp = 2.0 ** (-n / 2)
    for x in range(1 << n):
        amps[_flip_index(n, x, world.o_value(n, x))] = amp
    return StateVector(amps)


def flip_oracle(world: OracleWorld, n: int) -> RankTwoFlip:
    """Dense swap unitary between the all-zeros state and the flip target.

    Dense construction is capped at n <= 2 (n = 3 would need 4 GB of
    amplitudes); use ``lazy_flip_key`` beyond that.
    """
    if world.kind != "flip-world":
        raise WrongWorldKindError(f"flip_oracle needs a flip-world, got {world.kind}")
    if n > _MAX_DENSE_FLIP_N:
        raise MemoryBudgetError(
            f"dense flip needs 2^{9 * n + 1} amplitudes; use lazy_flip_key for n > {_MAX_DENSE_FLIP_N}"
        )
    dim = flip_state_dim(n)
    return RankTwoFlip(a=StateVector.basis(dim, 0), b=flip_target_state(world, n))


def lazy_flip_key(world: OracleWorld, n: int, rng: SeededRng) -> tuple[str, str]:
    """Measure swap(|0...0>) without materializing the state.

    The swapped state is the uniform superposition over (1, x, O_n(x)),
    so the measurement is exactly a uniform x paired with O_n(x).
    """
    if world.kind != "flip-world":
        raise WrongWorldKindError(f"lazy_flip_key needs a flip-world, got {world.kind}")
    x = int(rng.integers(0, 1 << n))
    return int_to_bits(x, n), int_to_bits(world.o_value(n, x), 8 * n)


# -- verify/eval channel (flip and sampler worlds) ---------------------------


def verify_eval_oracle(world: OracleWorld, x: str, y: str, a: str) -> BotValue:
    """Return P_n(x, a) if O_n(x) = y, abort otherwise."""
    if world.kind not in ("flip-world", "sampler-world"):
        raise WrongWorldKindError(f"verify/eval channel undefined for {world.kind}")
    n = len(x)
    if len(a) != n or len(y) != world.o_output_len(n):
        raise ValueError(
            f"expected |x|=|a|={n} and |y|={world.o_output_len(n)}, got |a|={len(a)}, |y|={len(y)}"
        )
    if world.o_value(n, int(x, 2)) != int(y, 2):
        return BOT
    xa = (int(x, 2) << n) | int(a, 2)
    return BotValue.of(int_to_bits(world.p_value(n, xa), n))


# -- sampler-world -----------------------------------------------------------


def sampler_oracle(world: OracleWorld, n: int, rng: SeededRng) -> tuple[str, str]:
    """Fresh uniform x paired with O_n(x); classical output."""
    if world.kind != "sampler-world":
        raise WrongWorldKindError(f"sampler_oracle needs a sampler-world, got {world.kind}")
    world._check_n(n)
    x = int(rng.integers(0, 1 << n))
    return int_to_bits(x, n), int_to_bits(world.o_value(n, x), n)


# -- the keyed-function generator over a world --------------------------------


def prfqs_from_world(world: OracleWorld, n: int) -> GeneratorHandle:
    """Keyed pseudorandom function backed by a flip or sampler world.

    Key sampling measures the world's key channel to obtain (x, O_n(x));
    evaluation on input a runs the verify/eval channel, which equals
    P_n(x, a) for any honestly sampled key -- exactly deterministic,
    since the same key is reused across evaluations.
    """
    if world.kind == "flip-world":
        def qsamp(rng: SeededRng) -> str:
            if n <= _MAX_DENSE_FLIP_N:
                swapped = apply_flip(flip_oracle(world, n), StateVector.basis(flip_state_dim(n), 0))
                lead, x, y = decode_flip_index(measure_computational(swapped, rng), n)
                if lead != 1:
                    raise AssertionError("swap of the zero state left the key subspace")
                return x + y
            x, y = lazy_flip_key(world, n, rng)
            return x + y
    elif world.kind == "sampler-world":
        def qsamp(rng: SeededRng) -> str:
            x, y = sampler_oracle(world, n, rng)
            return x + y
    else:
        raise WrongWorldKindError(f"no keyed-function construction over {world.kind}")

    y_len = world.o_output_len(n)

    def eval_fn(key: str, a: str, rng: SeededRng | None = None) -> BotValue:
        if len(key) != n + y_len:
            raise ValueError(f"key must be {n + y_len} bits, got {len(key)}")
        return verify_eval_oracle(world, key[:n], key[n:], a)

    return GeneratorHandle(
        kind="prf-qs",
        input_len=n + y_len,
        output_len=n,
        eval=eval_fn,
        qsamp=qsamp,
        domain=1 << n,
        description=f"{world.kind} seed={world.seed} n={n}",
    )


# -- brute-force adversaries (exhaustive search stand-ins) --------------------


def candidate_image(candidate: GeneratorHandle, evals_per_key: int = 1) -> set[str]:
    """Modal outputs of an oracle-free generator over its whole key space."""
    if candidate.input_len > MAX_PRG_KEY_BITS:
        raise KeySpaceTooLargeError(
            f"key space 2^{candidate.input_len} exceeds the 2^{MAX_PRG_KEY_BITS} search budget"
        )
    image = set()
    for k in range(1 << candidate.input_len):
        key = int_to_bits(k, candidate.input_len)
        outs = [
            candidate.eval(key, SeededRng(0xA0D1, (k << 8) + j))
            for j in range(evals_per_key)
        ]
        modal = _plurality(outs)
        if isinstance(modal, BotValue):
            if modal.is_bot:
                continue
            modal = modal.payload
        image.add(modal)
    return image


def bruteforce_prg_adversary(
    candidate: GeneratorHandle, challenge: str, evals_per_key: int = 1
) -> int:
    """Guess 0 (pseudorandom) iff some key's modal output equals the challenge.

    A generator with lambda-bit keys hits at most 2^lambda of the 2^s
    possible outputs, so a uniform challenge is flagged random except
    with probability 2^(lambda - s).
    """
    return 0 if challenge in candidate_image(candidate, evals_per_key) else 1


def bruteforce_owsg_adversary(gen: GeneratorHandle, copies: list[StateVector]) -> str:
    """Maximum-likelihood key recovery from state copies.

    Scores every key by the product of fidelities between its generated
    state and each provided copy, and returns the best key.
    """
    if gen.kind != "owsg":
        raise ValueError(f"expected an owsg handle, got {gen.kind}")
    if gen.input_len > MAX_OWSG_KEY_BITS:
        raise KeySpaceTooLargeError(
            f"key space 2^{gen.input_len} exceeds the 2^{MAX_OWSG_KEY_BITS} search budget"
        )
    if not copies:
        raise ValueError("need at least one copy")
    best_key, best_score = None, -1.0
    for k in range(1 << gen.input_len):
        key = int_to_bits(k, gen.input_len)
        candidate = gen.eval(key, SeededRng(0xA0D2, k))
        score = 1.0
        for copy in copies:
            score *= candidate.fidelity(copy)
        if score > best_score:
            best_key, best_score = key, score
    return best_key
