"""Path-integral optimal control of collaborative multi-agent systems.

Closed-form Gaussian controllers for single- and multi-target problems,
exact graphical-model inference of agent-target assignment posteriors under
factored end costs, Monte-Carlo partition-function estimation for general
drift and potential, and a seeded SDE simulation harness.
"""

from .model import (
    ControlParams,
    CouplingError,
    JointState,
    ParameterError,
    Scenario,
    TargetSet,
    validate_params,
)
from .endcost import (
    CostFactor,
    FactoredEndCost,
    GraphGenerationError,
    RelationGraph,
    firemen_cost_dense,
    firemen_factors,
    holiday_factors,
    random_regular_graph,
)
from .gaussian import (
    DegeneratePosteriorError,
    control_single,
    cost_to_go,
    effective_variance,
    log_z_single,
    mixture_control,
    mixture_posterior,
)
from .inference import (
    AssignmentMarginals,
    EliminationOrder,
    EnumerationSizeError,
    TreewidthError,
    brute_force,
    eliminate,
    log_partition,
    min_degree_order,
)
from .controller import (
    ControlOutput,
    SimulationError,
    Trajectory,
    adaptive_dt,
    joint_control,
    numeric_control_check,
    simulate,
)
from .montecarlo import (
    DegenerateEstimateError,
    DiffusionSpec,
    EndKernel,
    EndpointSample,
    StepSizeError,
    estimate_log_z,
    mc_control,
    sample_endpoints,
)
from .scenarios import (
    BUILTIN_SCENARIOS,
    ScenarioFormatError,
    load_scenario,
    save_scenario,
)

__version__ = "0.1.0"
