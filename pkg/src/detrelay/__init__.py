"""Capacity region tools and bit-level scheduling for 5-node deterministic
relay networks where the relay exchanges private messages of its own."""

from .model import (
    BitFrame,
    GainProfile,
    NodeOrdering,
    PAIR_ORDER_12,
    PAIR_ORDER_20,
    RateTuple,
    ReducedRateTuple,
    RelayNetworkError,
    ScheduleInvalidError,
    observe_downlink,
    order_nodes,
    superpose_uplink,
)
from .region import (
    ConditionCheck,
    InequalityReport,
    eval_lemma1,
    eval_theorem1,
    eval_theorem2,
    in_region,
    sos_feasible,
)
from .reduction import (
    InsufficientLevelsError,
    LevelAssignment,
    ReducedNetwork,
    assign_downlink_levels,
    assign_uplink_levels,
    closed_form_reduced_gains,
    reduce_network,
)
from .sos import (
    InfeasibleScheduleError,
    LevelSchedule,
    Segment,
    build_segments,
    build_sos_schedule,
)
from .detour import (
    DetourMove,
    DetourPlan,
    ExhaustedCandidatesError,
    MaxGapCondition,
    NoViolationError,
    apply_best,
    enumerate_candidates,
    find_mgc,
    verify_conservation,
)
from .sim import (
    DecodeFailureError,
    DeliveryReport,
    EnumerationReport,
    OutOfRegionError,
    enumerate_verify,
    simulate_5node,
    simulate_reduced,
)

__version__ = "0.1.0"
