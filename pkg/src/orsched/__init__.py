"""Operating-room scheduling and rescheduling toolkit."""

from .model import (
    Assignment,
    BedAvailability,
    ICU_WARD,
    Instance,
    InstanceIssue,
    MssSlot,
    PriorityCensus,
    Registration,
    Schedule,
    SessionCapacity,
    StayRecord,
    ValidationReport,
    expand_stays,
    validate_instance,
)
from .verify import (
    Metrics,
    ObjectiveVector,
    Violation,
    check_schedule,
    compare_objectives,
    compute_metrics,
    evaluate_objective,
)
from .solver import (
    Incumbent,
    SolveError,
    SolveOutcome,
    SolverConfig,
    construct_initial,
    improve,
    solve,
)
from .reschedule import (
    RescheduleError,
    RescheduleIncumbent,
    RescheduleObjective,
    RescheduleOutcome,
    RescheduleRequest,
    compute_residual_availability,
    evaluate_reschedule_objective,
    reschedule,
    residual_instance,
)
from .generate import (
    SCENARIOS,
    ScenarioSpec,
    SpecialtyGenParams,
    generate_instance,
    sample_truncated_normal,
    scenario,
)
from .oracle import (
    OracleLimitError,
    OracleLimits,
    brute_force_reschedule,
    brute_force_schedule,
)

__version__ = "0.1.0"
