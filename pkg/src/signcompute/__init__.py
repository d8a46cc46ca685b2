"""Sign-compute-resolve random access: signature codes, adder-channel
contention resolution and closed-form performance bounds."""

from .analysis import (
    alpha_star,
    avg_res_rate_bound,
    beta_star,
    check_bounds,
    expected_slots,
    net_rate_bounds,
    q_dist,
    q_hat,
    r_plnc,
    reg_inc_beta,
    slot_count_table,
)
from .channel import SlotObservation, UserWord, subtract_data, transmit_slot
from .finite_field import (
    ExtElement,
    ExtFieldSpec,
    PrimeFieldSpec,
    discrete_log,
    ext_add,
    ext_mul,
    ext_pow,
    find_primitive_extension,
    roots_in_base_field,
)
from .protocol import (
    ResolutionResult,
    SystemParams,
    run_contention,
    sample_active_set,
    simulate_slot_count,
)
from .signature_code import (
    ColumnSums,
    SignatureCodebook,
    SignatureWord,
    brute_force_decode,
    build_codebook,
    decode_active_set,
    decode_count,
    encode_signature,
    signature_bits,
)

__version__ = "0.1.0"
