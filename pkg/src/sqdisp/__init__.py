"""Simulation of displaced squeezed microwave states.

Gaussian-state algebra, hardware-chain device models, dual-path detection
Monte Carlo with moment-based reconstruction (dual-path and
reference-state methods), Planck-spectroscopy gain calibration, and a
deterministic sweep harness. The headline physics: displacing a squeezed
state shifts its mean but leaves the covariance untouched, so both the
squeezing level and the path entanglement created on a balanced splitter
are invariant under displacement.
"""

from .gaussian import (
    DegenerateStateError,
    DisplacementParams,
    GaussianState,
    SqueezeParams,
    UnphysicalStateError,
    VACUUM_VARIANCE,
    beam_splitter,
    displace,
    is_physical,
    lossy_channel,
    negativity,
    photon_number,
    principal_axes,
    r_for_squeezing_db,
    reference_covariance_eq1,
    squeeze,
    squeezing_level_db,
    state_from_json,
    state_to_json,
    symplectic_form,
    tensor,
    thermal,
    vacuum,
    wigner_grid,
)
from .devices import (
    CouplerParams,
    DetectionChain,
    JpaParams,
    RfContext,
    coupler_displace,
    dbm_to_photon_rate,
    displacement_power_to_alpha,
    hybrid_ring_split,
    jpa_emit,
    jpa_for_squeezing,
    tone_for_displacement,
)
from .tomography.detection import (
    QuadratureBatch,
    exact_detection_moments,
    load_batch,
    save_batch,
    simulate_detection,
)
from .tomography.moments import (
    MalformedMomentsError,
    RawMomentSet,
    SignalMomentSet,
    accumulate_moments,
    merge_moment_sets,
    raw_moments_from_json,
    raw_moments_to_json,
    signal_moments_from_json,
    signal_moments_to_json,
    state_to_moments,
)
from .tomography.reconstruction import (
    GaussianityReport,
    HeisenbergReport,
    ReconstructionError,
    dpm_reconstruct,
    gaussianity_check,
    heisenberg_check,
    moments_to_state,
    rsm_reconstruct,
)
from .calibration import (
    CalibrationResult,
    IllConditionedFitError,
    TemperatureSweep,
    fit_gain_noise,
    planck_occupation,
    simulate_sweep,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    SweepRow,
    config_from_dict,
    config_to_dict,
    export_wigner_panels,
    load_config,
    read_sweep_csv,
    run_calibration,
    run_displacement_sweep,
    write_sweep_csv,
)
from .selftest import run_selftest

__version__ = "0.1.0"
