"""entest: noisy continuous-variable entanglement-testing simulator and analytics.

End-to-end simulation of the correlation-to-displacement conversion plus
conditional-nulling receiver, the exact error recursion and its brute-force
oracle, asymptotic discrimination benchmarks, channel-capacity formulas with
PPM rate optimization, and reproducible Monte-Carlo sweep datasets.
"""

__version__ = "0.1.0"

from .core import (
    DerivedStats,
    DisplacedThermalMode,
    RandomStream,
    ScenarioParams,
    derive_statistics,
    sample_complex_gaussian,
    vacuum_probability,
)
from .conversion import (
    ConversionOutput,
    DegenerateRecordError,
    HeterodyneRecord,
    OrthoBasis,
    convert,
    gram_schmidt,
    simulate_heterodyne,
)
from .receiver import Decision, NullPolicy, binary_error_pair, run_conditional_nulling
from .theory import (
    BinaryErrorPair,
    ExponentFit,
    cn_error_bruteforce,
    cn_error_ideal,
    cn_error_recursive,
    error_pair_components,
    fit_error_exponent,
    helstrom_classical_asymptotic,
    helstrom_ea_asymptotic,
    q_sequence,
)
from .rates import (
    EaCapacityTerms,
    GridSpec,
    RatePoint,
    classical_capacity,
    ea_capacity,
    entropy_g,
    mutual_information,
    optimize_rate,
)
from .harness import (
    DEFAULT_SEED,
    ErrorEstimate,
    GateResult,
    TrialCampaign,
    ValidationReport,
    estimate_error,
    sweep_error_vs_snr,
    sweep_rates,
    trial_budget,
    validate_alpha_stats,
    validate_ideal_limit,
    validate_orthogonality,
    validate_theorem_oracle,
)
from .dataset import Dataset

__all__ = [
    "__version__",
    "ScenarioParams", "DerivedStats", "DisplacedThermalMode", "RandomStream",
    "derive_statistics", "vacuum_probability", "sample_complex_gaussian",
    "HeterodyneRecord", "OrthoBasis", "ConversionOutput", "DegenerateRecordError",
    "simulate_heterodyne", "gram_schmidt", "convert",
    "NullPolicy", "Decision", "run_conditional_nulling", "binary_error_pair",
    "BinaryErrorPair", "q_sequence", "cn_error_recursive", "cn_error_ideal",
    "cn_error_bruteforce", "helstrom_ea_asymptotic", "helstrom_classical_asymptotic",
    "error_pair_components", "fit_error_exponent", "ExponentFit",
    "RatePoint", "EaCapacityTerms", "GridSpec", "mutual_information", "entropy_g",
    "classical_capacity", "ea_capacity", "optimize_rate",
    "DEFAULT_SEED", "TrialCampaign", "ErrorEstimate", "GateResult", "ValidationReport",
    "estimate_error", "trial_budget", "validate_orthogonality", "validate_alpha_stats",
    "validate_theorem_oracle", "validate_ideal_limit",
    "sweep_error_vs_snr", "sweep_rates",
    "Dataset",
]
