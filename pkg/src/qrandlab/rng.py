"""Deterministic randomness: a counter-based RNG and a keyed bit derivation.

Two distinct sources of determinism live here and they serve different
masters:

* ``SeededRng`` wraps numpy's Philox4x64-10 counter-based bit generator.
  It drives all *simulation* randomness (Haar sampling, measurement,
  experiment coins).  A stream is fully named by ``(algorithm, seed,
  counter)``; stream ``counter`` starts the 256-bit Philox counter at
  ``counter * 2**128``, so distinct counters can never overlap as long
  as each stream draws fewer than 2**128 blocks.

* ``derive_bits`` / ``ShaStream`` implement a keyed deterministic
  derivation (SHA-256 in counter mode over an unambiguous encoding of
  ``seed || function-id || n || input``).  Oracle worlds are built from
  it, so a world is reproducible from its seed alone, across platforms
  and across reimplementations in other languages.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

PHILOX_ALGORITHM = "philox4x64-10/block128"

_U64 = (1 << 64) - 1


@dataclass
class SeededRng:
    """Named, reproducible randomness stream.

    Identical ``(algorithm, seed, counter)`` triples yield identical
    draw sequences.  The object is single-owner: it holds a live numpy
    ``Generator`` whose position advances with every draw.  Parallel
    trials should each construct their own ``SeededRng`` via ``child``.
    """

    seed: int
    counter: int = 0
    algorithm: str = PHILOX_ALGORITHM
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _U64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.counter < 0:
            raise ValueError(f"stream counter must be nonnegative, got {self.counter}")
        if self.algorithm != PHILOX_ALGORITHM:
            raise ValueError(f"unknown rng algorithm {self.algorithm!r}")
        bitgen = np.random.Philox(key=self.seed, counter=self.counter << 128)
        self._gen = np.random.Generator(bitgen)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, index: int) -> "SeededRng":
        """Independent stream for sub-task ``index`` (e.g. one trial).

        Children of a stream with counter c occupy counters
        c*2**32 + 1 + index, which keeps parent and child ranges
        disjoint for any sane fan-out.
        """
        if index < 0:
            raise ValueError("child index must be nonnegative")
        return SeededRng(self.seed, (self.counter << 32) + 1 + index)

    # Thin draw helpers so call sites read like the math they implement.

    def uniform(self) -> float:
        return float(self._gen.random())

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def standard_normal(self, size):
        return self._gen.standard_normal(size)

    def bit(self) -> int:
        return int(self._gen.integers(0, 2))

    def bits(self, n: int) -> str:
        return "".join("01"[b] for b in self._gen.integers(0, 2, size=n))

    def multinomial(self, n: int, pvals) -> np.ndarray:
        return self._gen.multinomial(n, pvals)


def _derivation_prefix(seed: int, function_id: str, n: int) -> bytes:
    fid = function_id.encode("utf-8")
    return struct.pack(">QI", seed & _U64, len(fid)) + fid + struct.pack(">I", n)


def derive_bits(seed: int, function_id: str, n: int, x: int, nbits: int) -> str:
    """nbits of keyed pseudorandomness for input ``x``, as a '0'/'1' string.

    SHA-256 in counter mode over the fixed-width encoding
    ``seed(8B) || len(id)(4B) || id || n(4B) || x(16B) || block(4B)``.
    """
    if nbits <= 0:
        raise ValueError("nbits must be positive")
    prefix = _derivation_prefix(seed, function_id, n) + x.to_bytes(16, "big")
    out = bytearray()
    block = 0
    while len(out) * 8 < nbits:
        out += hashlib.sha256(prefix + struct.pack(">I", block)).digest()
        block += 1
    bits = "".join(f"{byte:08b}" for byte in out)
    return bits[:nbits]


def derive_int(seed: int, function_id: str, n: int, x: int, nbits: int) -> int:
    return int(derive_bits(seed, function_id, n, x, nbits), 2)


class ShaStream:
    """Deterministic byte stream (SHA-256 counter mode) with bounded draws.

    Used for seeded Fisher-Yates permutation tables.  Bounded integers
    come from rejection sampling on 64-bit words, so the stream is
    exactly reproducible in any language with SHA-256.
    """

    def __init__(self, seed: int, function_id: str, n: int):
        self._prefix = _derivation_prefix(seed, function_id, n)
        self._block = 0
        self._buf = b""

    def _next_word(self) -> int:
        if len(self._buf) < 8:
            self._buf += hashlib.sha256(
                self._prefix + struct.pack(">Q", self._block)
            ).digest()
            self._block += 1
        word, self._buf = self._buf[:8], self._buf[8:]
        return int.from_bytes(word, "big")

    def bounded(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection below the largest multiple."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            word = self._next_word()
            if word < limit:
                return word % bound


def fisher_yates_table(seed: int, function_id: str, n_bits: int) -> np.ndarray:
    """Seeded permutation table on {0,1}^n_bits as a uint64 array."""
    size = 1 << n_bits
    table = np.arange(size, dtype=np.uint64)
    stream = ShaStream(seed, function_id, n_bits)
    for i in range(size - 1, 0, -1):
        j = stream.bounded(i + 1)
        table[i], table[j] = table[j], table[i]
    return table


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def int_to_bits(value: int, width: int) -> str:
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b")
