"""Alpha+++ process discovery toolkit."""
from .candidates import (
    CandidateFitness,
    PlaceCandidate,
    StageCounts,
    balance,
    candidate,
    candidate_fitness,
    dump_candidates_jsonl,
    enumerate_candidates,
    fit_trace,
    prune_balance,
    prune_fitness,
    relevant_variants,
    satisfies_conjuncts,
    select_maximal,
)
from .dfg import Dfg, DfThreshold, build_advising_dfg, build_dfg, df_holds, dfg_to_dot, mean_weight
from .discovery import (
    PRESETS,
    ConfigError,
    DiscoveryConfig,
    DiscoveryResult,
    StageReport,
    discover_alpha_classic,
    discover_alphappp,
)
from .log import (
    END,
    START,
    Activity,
    ActivityKind,
    CsvMapping,
    EventLog,
    LogParseError,
    Trace,
    activity_multiset,
    augment,
    build_log,
    filter_variants_coverage,
    filter_variants_top,
    log_from_json,
    log_of,
    log_to_json,
    parse_csv,
    parse_log_bytes,
    parse_log_file,
    parse_xes,
    project,
    trace_of,
)
from .petri import (
    AcceptingPetriNet,
    LabeledPetriNet,
    Place,
    ReplayResult,
    Transition,
    construct_classical_net,
    construct_net,
    disconnected_transitions,
    greedy_removal_order,
    net_to_dot,
    place_replay_score,
    prune_places,
    remove_transitions,
    replay_net,
    replay_place,
    to_pnml,
)
from .repair import (
    RepairReport,
    RepairSettings,
    detect_loops,
    detect_skips,
    problem_score,
    repair_log,
    repair_loops,
    repair_skips,
    select_activities,
)

__version__ = "0.1.0"
