"""Python bindings for the fairmatch C++ library."""

from ._fairmatch import (
    DataError,
    Instance,
    InternalError,
    LpSolution,
    UsageError,
    clairvoyant_oracle,
    generate_synthetic,
    make_example1,
    make_example_worst,
    minimize_sampab_ratio,
    minimizer_set,
    plan_attenuation,
    policy_names,
    read_instance_file,
    run_experiment,
    sampab_bound,
    sampb_bound,
    solve_lp,
    sweep,
)

__all__ = [
    "DataError",
    "Instance",
    "InternalError",
    "LpSolution",
    "UsageError",
    "clairvoyant_oracle",
    "generate_synthetic",
    "make_example1",
    "make_example_worst",
    "minimize_sampab_ratio",
    "minimizer_set",
    "plan_attenuation",
    "policy_names",
    "read_instance_file",
    "run_experiment",
    "sampab_bound",
    "sampb_bound",
    "solve_lp",
    "sweep",
]
