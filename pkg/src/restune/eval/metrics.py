"""Trajectory and parameter error metrics plus the CSV schemas they emit."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..sim import Rollout


@dataclass(frozen=True)
class MetricsRow:
    """One line of a results table.

    ``subset`` names the evaluation split or variant (e.g. easy/hard,
    val/test).  Metric fields are ``None`` when a method does not produce
    them.
    """

    method: str
    rollouts: int
    param_mae: float | None = None
    param_pct: float | None = None
    trans_err_cm: float | None = None
    trans_err_pct: float | None = None
    subset: str = ""

    def __post_init__(self):
        if self.rollouts < 0:
            raise ValueError("rollouts must be >= 0")
        for name in ("param_mae", "param_pct", "trans_err_cm", "trans_err_pct"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0")


def trajectory_error(proposed: Rollout, target: Rollout) -> tuple[float, float]:
    """Mean Euclidean position error, in cm and as a percentage.

    The percentage normalizer is the target's mean displacement magnitude
    from its initial state, so a frozen-at-the-start prediction scores
    exactly 100%.
    """
    if proposed.n_frames != target.n_frames:
        raise DimensionError(
            f"length mismatch: {proposed.n_frames} vs {target.n_frames} frames"
        )
    if proposed.state_dim != target.state_dim:
        raise DimensionError("state dimensions differ")
    if abs(proposed.dt - target.dt) > 1e-12:
        raise DimensionError("frame rates differ")
    err = np.linalg.norm(proposed.frames - target.frames, axis=1)
    mae_m = float(err.mean())
    normalizer = float(np.linalg.norm(target.frames - target.frames[0], axis=1).mean())
    if normalizer <= 0.0:
        pct = 0.0 if mae_m == 0.0 else float("inf")
    else:
        pct = 100.0 * mae_m / normalizer
    return 100.0 * mae_m, pct


def constant_initial_rollout(target: Rollout) -> Rollout:
    """The motionless prediction: every frame equals the target's first."""
    frames = np.repeat(target.frames[:1], target.n_frames, axis=0)
    return Rollout(dt=target.dt, frames=frames, labels=target.labels)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"


def rows_to_csv(rows, path) -> None:
    """Write metric rows with a fixed column order and number format."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["subset", "method", "rollouts", "param_mae", "param_pct", "trans_err_cm", "trans_err_pct"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.subset,
                    r.method,
                    _fmt(r.rollouts),
                    _fmt(r.param_mae),
                    _fmt(r.param_pct),
                    _fmt(r.trans_err_cm),
                    _fmt(r.trans_err_pct),
                ]
            )


def trace_to_csv(records, path, method: str = "", subset: str = "") -> None:
    """Per-iteration trace CSV: rollout count, estimate, discrepancy."""
    records = list(records)
    param_dim = records[0].estimate.size if records else 1
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["subset", "method", "rollouts"]
            + [f"estimate_{i}" for i in range(param_dim)]
            + ["discrepancy"]
        )
        for r in records:
            writer.writerow(
                [subset, method, _fmt(r.rollouts)]
                + [_fmt(v) for v in r.estimate]
                + [_fmt(r.discrepancy)]
            )


def curve_to_csv(points, path) -> None:
    """Error-vs-rollouts curve CSV: (subset, method, rollouts, mean_mae)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["subset", "method", "rollouts", "mean_mae"])
        for subset, method, rollouts, mean_mae in points:
            writer.writerow([subset, method, _fmt(rollouts), _fmt(mean_mae)])
