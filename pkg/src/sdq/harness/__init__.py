from .config import ExperimentConfig, ConfigError
from .experiments import RunManifest, run_experiment
from .acceptance import ALL_CHECKS, CheckResult, run_check, run_all_checks
