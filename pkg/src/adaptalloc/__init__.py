"""Follow-the-leader adaptive allocation: trials, Monte Carlo and tail bounds."""
from .engine import ConfigError, TrialConfig, TrialOutcome, allocate_next, run_trial
from .metrics import inferior_count, n1_multi, n1_two_arm
from .models import ArmState, ResponseModel, draw, update
from .montecarlo import ReplicationSummary, boundedness_diagnostic, run_replications, split_seed
from .scenarios import ScenarioSpec, load_config, preset

__all__ = [
    "ArmState", "ConfigError", "ReplicationSummary", "ResponseModel", "ScenarioSpec",
    "TrialConfig", "TrialOutcome", "allocate_next", "boundedness_diagnostic", "draw",
    "inferior_count", "load_config", "n1_multi", "n1_two_arm", "preset",
    "run_replications", "run_trial", "split_seed", "update",
]
