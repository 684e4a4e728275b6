"""Distinguishability bounds, partition tests, and discernible test schedules."""

__version__ = "0.1.0"

from .distances import (
    HullDistanceResult,
    Test,
    density_total_variation,
    hull_variation,
    kraft_bound,
    ks_distance,
    optimal_test,
    total_variation,
)
from .errors import (
    ConstructionError,
    DegenerateScenarioError,
    NumericError,
    ResourceLimitError,
    ValidationError,
)
from .measures import (
    DensitySpec,
    FiniteMeasure,
    Partition,
    discretize,
    induced_vector,
    mixture,
    normalize,
)
from .partition_tests import (
    ChernoffExponent,
    FrequencyTest,
    SeparationReport,
    UnionTest,
    build_frequency_test,
    chernoff_information,
    error_exponent,
    exact_error,
    separation,
)
from .scheduler import (
    TestFamily,
    TestFamilyMember,
    TestSchedule,
    UnionSchedule,
    block_lengths,
    interleave,
    tail_bound,
    tail_constant,
    union_schedule,
)
from .simulation import (
    DiscernibilityCurve,
    GaussianSequenceModel,
    PoissonModel,
    RngSpec,
    SimulationReport,
    discernibility_paths,
    estimate_error,
    poisson_atom_tail_bound,
    sample_gaussian_sequence,
    sample_iid,
    sample_poisson_process,
    wilson_interval,
)
from .scenarios import (
    LinearFunctionalTest,
    PoissonTwoStageTest,
    Scenario,
    build_nested_family,
    nested_schedule,
    run_scenario,
    scenario_from_dict,
    scenario_kolmogorov_family,
    scenario_mazur_mixture,
    scenario_nested_alternatives,
    scenario_poisson,
    scenario_signal_detection,
    scenario_sine_indistinguishable,
)
