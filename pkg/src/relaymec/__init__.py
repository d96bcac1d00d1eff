"""Analytic model, optimizers and slot-level simulator for buffer-aided
relay-assisted mobile edge computing over block-fading links."""

from .channel import (
    CdfChannel,
    Link,
    RayleighChannel,
    TableCdf,
    channel_from_dict,
    exponential_cdf,
    gamma_from_physical,
    inverse_service_probability,
    service_probability,
)
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleError,
    RelayMecError,
    SimulationError,
    UnachievableError,
    UnsupportedModelError,
)
from .perf import (
    Decision,
    FeasibleRhoSet,
    GrowthCase,
    PerfMetrics,
    SystemParams,
    are,
    art_components,
    check_constraints,
    feasible_rho_set,
    mean_response_time,
    power_lower_bound,
    response_energy,
    rho_set_growth_case,
    sap,
    slot_average_power,
)
from .queueing import is_stable, waiting_time
from .solve import (
    Scheme,
    Solution,
    SolverConfig,
    baseline,
    exhaustive_oracle,
    golden_min,
    k_partition_search,
    solve_mare_general,
    solve_mare_rayleigh,
    solve_mart,
)
from .sim import SimConfig, SimReport, Stage, empirical_sap, run_simulation, run_single_queue

__version__ = "0.1.0"
