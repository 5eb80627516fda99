"""Scanpath predictability analysis via active information storage.

Plug-in information estimators with small-sample bias correction, greedy
data-driven past-state selection with max-statistic permutation testing,
an IDT gaze-to-scanpath pipeline, exact Markov-chain oracles, and the
per-participant condition-comparison protocol, plus a batch CLI.
"""

__version__ = "0.1.0"

from .embedding import (EmbeddingConfig, MIN_EMBEDDED_ROWS, SelectionStep,
                        SelectionTrace, max_statistic_test, optimize_past_state)
from .experiment import (ContrastResult, LagHistogram, ParticipantComparison,
                         RunConfig, TrialResult, analyze_trial,
                         compare_conditions, equalize_samples, lag_histogram,
                         parse_run_config, union_past_state)
from .gaze import (AOIRegion, Fixation, GazeSample, PipelineParams,
                   ScanpathRecord, Trial, build_scanpath,
                   detect_fixations_idt, filter_fixations, filter_gaze,
                   load_aois, map_to_aoi, read_gaze_csv)
from .infocore import (ContingencyTable, InfoEstimate,
                       active_information_storage, bias_correction,
                       conditional_entropy, conditional_mutual_information,
                       empirical_distribution, entropy,
                       gaze_transition_entropy, local_ais, mutual_information,
                       table_from_series)
from .markov import (MarkovSpec, analytic_ais, analytic_entropy, analytic_gte,
                     cycle_spec, generate, lagged_copy_spec, load_markov_spec,
                     persistence_spec, stationary_distribution,
                     uniform_iid_spec)
from .rng import derive_rng, derive_seed
from .sequences import PastState, StateVectorSeries, SymbolSequence, embed
from .stats import (PermutationTestResult,
                    independent_samples_permutation_test, test_final_ais)

__all__ = [
    "AOIRegion", "ContingencyTable", "ContrastResult", "EmbeddingConfig",
    "Fixation", "GazeSample", "InfoEstimate", "LagHistogram", "MarkovSpec",
    "MIN_EMBEDDED_ROWS", "ParticipantComparison", "PastState",
    "PermutationTestResult", "PipelineParams", "RunConfig", "ScanpathRecord",
    "SelectionStep", "SelectionTrace", "StateVectorSeries", "SymbolSequence",
    "Trial", "TrialResult", "active_information_storage", "analytic_ais",
    "analytic_entropy", "analytic_gte", "analyze_trial", "bias_correction",
    "build_scanpath", "compare_conditions", "conditional_entropy",
    "conditional_mutual_information", "cycle_spec", "derive_rng",
    "derive_seed", "detect_fixations_idt", "embed", "empirical_distribution",
    "entropy", "equalize_samples", "filter_fixations", "filter_gaze",
    "gaze_transition_entropy", "generate", "independent_samples_permutation_test",
    "lag_histogram", "lagged_copy_spec", "load_aois", "load_markov_spec",
    "local_ais", "map_to_aoi", "max_statistic_test", "mutual_information",
    "optimize_past_state", "parse_run_config", "persistence_spec",
    "read_gaze_csv", "stationary_distribution", "table_from_series",
    "test_final_ais", "uniform_iid_spec", "union_past_state",
]
