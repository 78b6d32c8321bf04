from rheacl.harness.config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    from_dict,
    load_run_config,
    run_config_from_dict,
    save_run_config,
    to_dict,
)
from rheacl.harness.aggregate import aggregate, write_aggregate_csv
from rheacl.harness.runner import run_all_seeds, run_single_seed
from rheacl.harness.sweep import SweepSpec, load_sweep, run_sweep
from rheacl.harness.validate import validate_run_dir, validate_sweep_file

__all__ = [
    "ConfigError",
    "RunConfig",
    "apply_overrides",
    "from_dict",
    "load_run_config",
    "run_config_from_dict",
    "save_run_config",
    "to_dict",
    "aggregate",
    "write_aggregate_csv",
    "run_all_seeds",
    "run_single_seed",
    "SweepSpec",
    "load_sweep",
    "run_sweep",
    "validate_run_dir",
    "validate_sweep_file",
]
