"""MIMO detection with Ising-machine heuristics and classical baselines.

The library simulates BPSK / square M-QAM transmissions over random fading
channels, maps detection onto binary-spin or symbol-native Hamiltonians,
solves them with probabilistic or oscillator dynamics, and benchmarks the
results against zero-forcing, MMSE, and an exact sphere decoder.
"""

__version__ = "0.1.0"

from .baselines import (
    DetectionResult,
    SearchBudgetError,
    SingularChannelError,
    ml_exact,
    ml_exhaustive,
    mmse_detect,
    zf_detect,
)
from .channel import (
    MimoInstance,
    RealizedChannel,
    build_instance,
    derive_rng,
    derive_seed,
    dump_instance,
    generate_channel,
    load_instance,
    noise_sigma_sq,
    realify,
    realify_symbols,
    transmit,
)
from .constellation import (
    Constellation,
    build_constellation,
    demodulate_symbols,
    modulate_bits,
    pam_levels,
    quantize_to_alphabet,
)
from .harness import (
    BerPoint,
    BetaSweepResult,
    ExperimentPlan,
    ScalingFit,
    ber_upper_bound,
    beta_sweep,
    binomial_interval,
    fit_scaling_law,
    plan_experiment,
    report,
    run_ber_sweep,
)
from .ising_map import (
    BinaryIsingModel,
    PditModel,
    TransformSpec,
    binary_energy,
    build_binary_model,
    build_pdit_model,
    build_transform,
    pdit_delta_energy,
    pdit_energy,
    spins_to_symbols,
    symbols_to_spins,
)
from .solvers import (
    AnnealSchedule,
    OimParams,
    SolveOutcome,
    SolverConfig,
    bpim_solve,
    default_parameters,
    dpim_solve,
    oim_solve,
    run_replicated,
    sample_pdit_chain,
    sample_spin_chain,
)
