"""Finite-resolution laboratory for measure-preserving dynamics.

A system at resolution k is a doubly stochastic matrix acting on an
equal-mass k-cell partition; 2-fold couplings are transportation-polytope
matrices; the lens action conjugates couplings by the system matrix.
Everything defaults to exact rational arithmetic, with an optional float
backend for scale.
"""

from .errors import (
    BackendMismatch,
    BadBlocks,
    DimensionMismatch,
    InfeasibleTarget,
    InvalidConfig,
    LensLabError,
    NegativePowerOfStochastic,
    NonInvertible,
    NotExact,
    NotRepairable,
    ResolutionGuard,
    SizeGuard,
    UnknownExperiment,
)
from .exact import FLOAT, RATIONAL
from .partitions import (
    FiniteSystem,
    Partition,
    RefinementMap,
    make_uniform_partition,
    refine,
    refinement_from_parent,
    system_from_json,
    system_from_matrix,
    system_from_permutation,
    system_power,
    system_to_json,
    validate_system,
)
from .couplings import (
    CouplingMatrix,
    NeighborhoodSpec,
    compose_couplings,
    coupling_distance,
    coupling_from_json,
    coupling_to_csv,
    coupling_to_json,
    graph_coupling,
    in_neighborhood,
    lift_coupling,
    product_coupling,
    random_coupling,
    repair_to_polytope,
    restrict_coupling,
    validate_coupling,
)
from .lens import (
    FixedPointSpace,
    HitStats,
    LensOrbit,
    PeriodReport,
    cesaro_average,
    detect_period,
    fixed_point_space,
    lens_iterate,
    lens_step,
    lens_step_inverse,
    markov_commutation_residual,
    one_sided_step,
    orbit,
    orbit_to_csv,
    period_report_to_json,
    quasi_attractor_hits,
    self_joining_residual,
)
from .zoo import (
    IETSpec,
    SkewSpec,
    bernoulli_system,
    group_automorphism_check,
    group_elements,
    group_rotation_conjugation,
    iet_system,
    index_word,
    odometer_system,
    parse_system_spec,
    rotation_system,
    skew_Tbar_conjugation,
    skew_W_step,
    skew_torus_restriction,
    torus_point,
    word_index,
)
from .constructions import (
    BlockTarget,
    CommuterResult,
    RationalTarget,
    WitnessResult,
    bernoulli_cyclic_commuter,
    consecutive_blocks,
    density_gap,
    entropy_factor_F,
    odometer_commuter,
    random_rational_target,
    realize_coupling_as_iet,
    realize_entropy_block,
    rigidity_probe,
    target_from_json,
    target_to_json,
    transitivity_witness,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    apply_overrides,
    config_from_mapping,
    list_experiments,
    load_config_file,
    parse_config_text,
    run_experiment,
    validate_config,
    value_str,
)

__version__ = "0.1.0"

__all__ = [
    "BackendMismatch",
    "BadBlocks",
    "BlockTarget",
    "CommuterResult",
    "CouplingMatrix",
    "DimensionMismatch",
    "ExperimentConfig",
    "ExperimentReport",
    "FLOAT",
    "FiniteSystem",
    "FixedPointSpace",
    "HitStats",
    "IETSpec",
    "InfeasibleTarget",
    "InvalidConfig",
    "LensLabError",
    "LensOrbit",
    "NegativePowerOfStochastic",
    "NeighborhoodSpec",
    "NonInvertible",
    "NotExact",
    "NotRepairable",
    "Partition",
    "PeriodReport",
    "RATIONAL",
    "RationalTarget",
    "RefinementMap",
    "ResolutionGuard",
    "SizeGuard",
    "SkewSpec",
    "UnknownExperiment",
    "WitnessResult",
    "apply_overrides",
    "bernoulli_cyclic_commuter",
    "bernoulli_system",
    "cesaro_average",
    "compose_couplings",
    "config_from_mapping",
    "consecutive_blocks",
    "coupling_distance",
    "coupling_from_json",
    "coupling_to_csv",
    "coupling_to_json",
    "density_gap",
    "detect_period",
    "entropy_factor_F",
    "fixed_point_space",
    "graph_coupling",
    "group_automorphism_check",
    "group_elements",
    "group_rotation_conjugation",
    "iet_system",
    "in_neighborhood",
    "index_word",
    "lens_iterate",
    "lens_step",
    "lens_step_inverse",
    "lift_coupling",
    "list_experiments",
    "load_config_file",
    "make_uniform_partition",
    "markov_commutation_residual",
    "odometer_commuter",
    "odometer_system",
    "one_sided_step",
    "orbit",
    "orbit_to_csv",
    "parse_config_text",
    "parse_system_spec",
    "period_report_to_json",
    "product_coupling",
    "quasi_attractor_hits",
    "random_coupling",
    "random_rational_target",
    "realize_coupling_as_iet",
    "realize_entropy_block",
    "refine",
    "refinement_from_parent",
    "repair_to_polytope",
    "restrict_coupling",
    "rigidity_probe",
    "rotation_system",
    "run_experiment",
    "self_joining_residual",
    "skew_Tbar_conjugation",
    "skew_W_step",
    "skew_torus_restriction",
    "system_from_json",
    "system_from_matrix",
    "system_from_permutation",
    "system_power",
    "system_to_json",
    "target_from_json",
    "target_to_json",
    "torus_point",
    "transitivity_witness",
    "validate_config",
    "validate_coupling",
    "validate_system",
    "value_str",
    "word_index",
]
