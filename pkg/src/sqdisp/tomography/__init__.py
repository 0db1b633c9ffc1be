"""Dual-path detection simulation and moment-based state reconstruction."""

from .detection import (
    QuadratureBatch,
    detected_gaussian,
    exact_detection_moments,
    load_batch,
    save_batch,
    simulate_detection,
)
from .moments import (
    MalformedMomentsError,
    RawMomentSet,
    SignalMomentSet,
    accumulate_moments,
    merge_moment_sets,
    normal_to_weyl,
    raw_moment_keys,
    raw_moments_from_json,
    raw_moments_to_json,
    signal_moment_keys,
    signal_moments_from_json,
    signal_moments_to_json,
    state_to_moments,
    weyl_to_normal,
)
from .reconstruction import (
    GaussianityReport,
    HeisenbergReport,
    ReconstructionError,
    dpm_reconstruct,
    gaussianity_check,
    heisenberg_check,
    moments_to_state,
    rsm_reconstruct,
)
