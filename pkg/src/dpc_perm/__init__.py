"""Dirty paper coding for MU-MIMO broadcast channels.

A conventional successive implementation built on LQ factorization, an
equivalent linear implementation built on a single SVD with designed
effective gains, a diagonal-permutation precoding-order search that
replaces n! factorizations with one, and a reproducible Monte Carlo BER
harness comparing both against ZF, MMSE, THP, and BD baselines.
"""

__version__ = "0.1.0"

from .channel import ChannelSpec, generate_channel, load_channel, save_channel
from .exceptions import (
    ConfigError,
    DegenerateGain,
    DpcPermError,
    FormatError,
    InfeasibleBlocking,
    InvalidPermutation,
    LengthMismatch,
    NumericallySingular,
    OrderSpaceTooLarge,
)
from .linalg import (
    EPS_LIN,
    EPS_SING,
    LqFactors,
    SvdFactors,
    count_decompositions,
    diagonal_permute,
    inverse_via_lq,
    lq_decompose,
    lq_not_permutation_linear_witness,
    permutation_matrix,
    permuted_svd,
    svd_decompose,
)
from .modem import (
    Constellation,
    add_awgn,
    count_ber,
    make_constellation,
    qam_demodulate,
    qam_modulate,
    wilson_interval,
)
from .ordering import (
    OrderSearchResult,
    complexity_model,
    diagonal_order_search,
    min_power_order_closed_form,
    naive_order_search,
    objective_ap,
    objective_papr,
    order_table,
)
from .precoding import (
    bd_precode,
    dpc_conventional,
    dpc_linear,
    mmse_precode,
    normalize_gains,
    thp_precode,
    thp_receive,
    waterfill,
    waterfill_powers,
    zf_precode,
)
from .sim import BerRecord, SweepConfig, run_ber_sweep

__all__ = [
    "__version__",
    "ChannelSpec",
    "generate_channel",
    "save_channel",
    "load_channel",
    "DpcPermError",
    "NumericallySingular",
    "InvalidPermutation",
    "OrderSpaceTooLarge",
    "DegenerateGain",
    "InfeasibleBlocking",
    "LengthMismatch",
    "FormatError",
    "ConfigError",
    "EPS_LIN",
    "EPS_SING",
    "LqFactors",
    "SvdFactors",
    "lq_decompose",
    "svd_decompose",
    "permutation_matrix",
    "permuted_svd",
    "diagonal_permute",
    "lq_not_permutation_linear_witness",
    "inverse_via_lq",
    "count_decompositions",
    "Constellation",
    "make_constellation",
    "qam_modulate",
    "qam_demodulate",
    "add_awgn",
    "count_ber",
    "wilson_interval",
    "OrderSearchResult",
    "objective_ap",
    "objective_papr",
    "naive_order_search",
    "diagonal_order_search",
    "order_table",
    "min_power_order_closed_form",
    "complexity_model",
    "dpc_conventional",
    "dpc_linear",
    "waterfill",
    "waterfill_powers",
    "normalize_gains",
    "zf_precode",
    "mmse_precode",
    "thp_precode",
    "thp_receive",
    "bd_precode",
    "BerRecord",
    "SweepConfig",
    "run_ber_sweep",
]
