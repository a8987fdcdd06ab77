"""Metrics, results tables, the planning task, and run bookkeeping."""

from .bounceshot import (
    BounceShotSpec,
    PlanResult,
    TaskResult,
    TrialRecord,
    plan_bounce_shot,
    run_sim2sim_task,
    simulate_bounce,
    task_to_csv,
)
from .metrics import (
    MetricsRow,
    constant_initial_rollout,
    curve_to_csv,
    rows_to_csv,
    trace_to_csv,
    trajectory_error,
)
from .runs import (
    config_hash,
    ensure_dir,
    load_config,
    require_artifact,
    update_manifest,
)
from .svgplot import write_line_chart
from .tables import (
    arm_episode_simulator,
    ball_episode_simulator,
    episode_simulator,
    height_from_obs,
    run_table1,
    run_table2,
    run_table3,
)

__all__ = [
    "BounceShotSpec",
    "MetricsRow",
    "PlanResult",
    "TaskResult",
    "TrialRecord",
    "arm_episode_simulator",
    "ball_episode_simulator",
    "config_hash",
    "constant_initial_rollout",
    "curve_to_csv",
    "ensure_dir",
    "episode_simulator",
    "height_from_obs",
    "load_config",
    "plan_bounce_shot",
    "require_artifact",
    "rows_to_csv",
    "run_sim2sim_task",
    "run_table1",
    "run_table2",
    "run_table3",
    "simulate_bounce",
    "task_to_csv",
    "trace_to_csv",
    "trajectory_error",
    "update_manifest",
    "write_line_chart",
]
