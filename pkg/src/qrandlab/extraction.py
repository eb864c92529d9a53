"""Rounding block sums of a Born diagonal into bits, and the good-set test.

For dimension d = 2^(6a) the derived quantities k = d^(5/6), r = d^(2/3)
and l = d^(1/6) are exact integers.  The diagonal's first l*r entries
are grouped into l blocks of r; each block sum q_i is thresholded
strictly against r/d to produce one output bit.  A state is in the good
set when every block sum clears the threshold by a margin of more than
2/d, which is what makes the whole pipeline deterministic on that state.

``gaussian_block_check`` measures how closely the block sums of Haar
states follow their limiting normal law N(r/d, r/d^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .qcore import DimensionMismatchError, InvalidDimensionError, StateVector, haar_sample
from .rng import SeededRng
from .tomography import DiagonalEstimate, exact_diagonal, sampled_diagonal


@dataclass(frozen=True)
class RoundParams:
    """Block geometry for dimension d = 2^(6a), a >= 1."""

    d: int

    def __post_init__(self):
        d = self.d
        if d < 64 or d & (d - 1) != 0 or (d.bit_length() - 1) % 6 != 0:
            raise InvalidDimensionError(
                f"d must be 2**(6a) for integer a >= 1 (64, 4096, ...), got {d}"
            )

    @property
    def a(self) -> int:
        return (self.d.bit_length() - 1) // 6

    @property
    def k(self) -> int:
        return 1 << (5 * self.a)

    @property
    def r(self) -> int:
        return 1 << (4 * self.a)

    @property
    def num_bits(self) -> int:
        """Output length l = d^(1/6)."""
        return 1 << self.a

    @property
    def threshold(self) -> float:
        """r/d = 2^(-2a), exactly representable."""
        return self.r / self.d

    @property
    def margin(self) -> float:
        return 2 / self.d


def block_sums(diag: DiagonalEstimate, params: RoundParams) -> np.ndarray:
    """q_i = sum of the i-th block of r consecutive diagonal entries.

    Only the first l*r = k entries are consumed; the tail is ignored.
    """
    if diag.dim != params.d:
        raise DimensionMismatchError(f"diagonal dim {diag.dim} != params d {params.d}")
    l, r = params.num_bits, params.r
    return diag.probs[: l * r].reshape(l, r).sum(axis=1)


def round_bits(diag: DiagonalEstimate, params: RoundParams) -> str:
    """b_i = 1 iff q_i > r/d (strict); ties round to 0."""
    q = block_sums(diag, params)
    return "".join("1" if qi > params.threshold else "0" for qi in q)


def good_set_member(diag: DiagonalEstimate, params: RoundParams) -> bool:
    """True iff every block sum clears the threshold by more than 2/d."""
    q = block_sums(diag, params)
    return bool(np.all(np.abs(q - params.threshold) > params.margin))


def extract(
    psi: StateVector,
    params: RoundParams,
    mode: str = "exact",
    t: int | None = None,
    rng: SeededRng | None = None,
) -> str:
    """Diagonal estimation (exact, or from t sampled copies) followed by rounding."""
    if psi.dim != params.d:
        raise DimensionMismatchError(f"state dim {psi.dim} != params d {params.d}")
    if mode == "exact":
        diag = exact_diagonal(psi)
    elif mode == "sampled":
        if t is None or rng is None:
            raise ValueError("sampled mode needs a copy count t and an rng")
        diag = sampled_diagonal(psi, t, rng)
    else:
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    return round_bits(diag, params)


@dataclass(frozen=True)
class BlockStats:
    """Block-sum statistics for a batch of Haar states."""

    d: int
    n_states: int
    mean: float
    variance: float
    ks_statistic: float
    bit_frequencies: tuple[float, ...]
    good_fraction: float


def gaussian_block_check(d: int, n_states: int, rng: SeededRng) -> BlockStats:
    """Compare Haar block sums against their limiting law N(r/d, r/d^2).

    Samples n_states Haar states, pools all their block sums, and
    reports empirical mean and variance plus the one-sample
    Kolmogorov-Smirnov statistic against the normal model.
    """
    params = RoundParams(d)
    sums = np.empty((n_states, params.num_bits))
    good = 0
    for i in range(n_states):
        diag = exact_diagonal(haar_sample(d, rng))
        q = block_sums(diag, params)
        sums[i] = q
        if np.all(np.abs(q - params.threshold) > params.margin):
            good += 1
    pooled = sums.ravel()
    model_std = np.sqrt(params.r) / d
    ks = stats.kstest(pooled, "norm", args=(params.threshold, model_std)).statistic
    bit_freq = tuple(float(f) for f in (sums > params.threshold).mean(axis=0))
    return BlockStats(
        d=d,
        n_states=n_states,
        mean=float(pooled.mean()),
        variance=float(pooled.var(ddof=1)),
        ks_statistic=float(ks),
        bit_frequencies=bit_freq,
        good_fraction=good / n_states,
    )
