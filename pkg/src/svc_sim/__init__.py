"""Decentralised secondary voltage control of a single-zone power grid."""

from .control import (
    DelayBuffer,
    DtipGains,
    InnerAgent,
    OuterController,
    compose_reference,
    dtip_law,
    gate_participation,
    inner_step,
    outer_step,
)
from .errors import *  # noqa: F401,F403
from .estimation import (
    Differentiator,
    DifferentiatorConfig,
    UltraLocalEstimate,
    estimate_f,
    push_and_differentiate,
)
from .model import (
    ActiveMask,
    AlignmentSolution,
    ParticipationFactors,
    SensitivityModel,
    benchmark_model,
    reduce_model,
    solve_alignment,
)
from .plant import (
    GeneratorParams,
    GridState,
    PlantConfig,
    apply_disturbance,
    apply_topology,
    perturb_line,
    plant_step,
)
from .scenario import (
    ControllerConfig,
    Event,
    RunResult,
    Scenario,
    alignment_spread,
    case_scenario,
    equilibrium,
    run,
    settling_time,
)

__version__ = "0.1.0"
