"""Monthly route planning and fleet sizing for mobile examination vans."""

from .genetic import Chromosome, ExamIndex, GAParams, build_exam_index, fitness, greedy_split, run_ga
from .heuristic import (
    HeuristicParams,
    NoProductiveTour,
    check_feasibility,
    generate_planning,
    run_heuristic,
)
from .model import (
    BasicTour,
    InfeasibleInstance,
    Instance,
    InstanceError,
    Params,
    PlannedTour,
    Schedule,
    assign_days,
    derive_monthly_demand,
    duration,
    travel_time,
    vans_required,
)
from .tourpool import MtspSolution, SAParams, build_pool, sa_solve_mtsp
from .validate import Violation, compare_schedules, validate_schedule

__version__ = "0.1.0"
