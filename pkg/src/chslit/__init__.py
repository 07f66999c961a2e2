"""chslit: consistent-histories analysis of multi-slit experiments.

Build a scenario from slit amplitudes, realize it as a small Hilbert-space
model, evaluate the decoherence functional over coarse-grainings of the
paths, enumerate the consistent frameworks, and query path probabilities
subject to the single-framework rule.
"""

from .core import (
    Partition,
    Path,
    PathId,
    Slit,
    SlitPart,
    SlitScenario,
    counting_rate,
    format_partition,
    format_scenario_partition,
    group_amplitude,
    parse_partition,
    parse_scenario_partition,
    partition_on_paths,
    partition_on_positions,
)
from .engine import (
    BRANCHES,
    DETECTED,
    UNDETECTED,
    DEFAULT_TOLERANCE,
    ConsistencyReport,
    ExperimentModel,
    History,
    HistorySet,
    ProbabilityTable,
    build_experiment,
    check_consistency,
    class_operator_apply,
    conditional_probability,
    decoherence_functional,
    group_decoherence_closed_form,
    history_probabilities,
    history_set_for_partition,
)
from .errors import (
    AlreadyRefined,
    BadIndex,
    ChslitError,
    ClosedPathInGroup,
    ConditionUnsatisfied,
    DegenerateDetector,
    DimensionMismatch,
    EmptyMask,
    InconsistentSet,
    MeaninglessCombination,
    NoOpenPaths,
    NotExhaustive,
    NotInFramework,
    NotInPartition,
    OverlappingGroups,
    ParseError,
    PartSumMismatch,
    SchemaError,
    TooLarge,
    UnknownScenario,
    UnknownSlit,
)
from .frameworks import (
    DEFAULT_MAX_PATHS,
    ContradictionRecord,
    Framework,
    build_framework,
    combine_queries,
    enumerate_consistent_frameworks,
    enumerate_partitions,
    find_contradictions,
    query_event,
)
from .scenarios import (
    BUILTIN_SCENARIOS,
    builtin_scenario,
    load_scenario,
    refine_slit,
    save_scenario,
)

__version__ = "0.1.0"
