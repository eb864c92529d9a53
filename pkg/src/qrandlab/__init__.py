"""qrandlab: a desk-scale statevector lab for pseudorandom-state generators,
abort-capable generators, oracle separation worlds, and the statistical
experiments that check their testable properties."""

from .constructions import (
    Con1Params,
    Con2Params,
    Con3Params,
    con1_eval,
    con1_handle,
    con1_qsamp,
    con2_eval,
    con2_handle,
    con2_qsamp,
    con3_handle,
    con3_stategen,
    phase_state,
    prfqs_from_prgqs,
)
from .experiments import (
    AdversaryHandle,
    BudgetExceededError,
    CallBudget,
    ExperimentReport,
    advantage_ci,
    exp_botprg,
    exp_owsg,
    exp_prg,
    merge_reports,
    moment_distance,
    moment_distance_ci,
)
from .extraction import (
    BlockStats,
    RoundParams,
    block_sums,
    extract,
    gaussian_block_check,
    good_set_member,
    round_bits,
)
from .oracles import (
    BotOracleParams,
    OracleWorld,
    bot_oracle_eval,
    bot_oracle_good_set,
    bot_prg_handle,
    bruteforce_owsg_adversary,
    bruteforce_prg_adversary,
    flip_oracle,
    lazy_flip_key,
    prfqs_from_world,
    sampler_oracle,
    verify_eval_oracle,
)
from .primitives import (
    BOT,
    BotValue,
    DeterminismAudit,
    GeneratorHandle,
    determinism_audit,
    is_bot,
    vote,
    vote_non_bot,
)
from .qcore import (
    DensityOp,
    DimensionMismatchError,
    InvalidDimensionError,
    MemoryBudgetError,
    RankTwoFlip,
    StateVector,
    apply_flip,
    born_distribution,
    haar_sample,
    measure_computational,
    symmetric_moment,
    trace_distance,
)
from .rng import SeededRng, derive_bits, derive_int
from .tomography import (
    DiagonalEstimate,
    exact_diagonal,
    linf_error,
    sampled_diagonal,
    tomography_samples_required,
)

__version__ = "0.1.0"
