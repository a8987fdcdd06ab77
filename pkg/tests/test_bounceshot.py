"""Bounce-shot planning geometry and the sim-to-sim task loop."""

import numpy as np
import pytest

from restune.eval import BounceShotSpec, plan_bounce_shot, run_sim2sim_task
from restune.eval.bounceshot import simulate_bounce, task_to_csv

SPEC = BounceShotSpec()
G = 9.81


def _closed_form_height(cor, spec=SPEC):
    """Drop height whose 45-degree bounce sends the ball through the hoop
    centre, from the elastic-impact reflection formulas."""
    # Falling speed v at contact; after a 45-degree bounce the outgoing
    # velocity is (vx, vz) = ((1+e)v/2, -(1-e)v/2).
    x0 = spec.drop_x
    zc = spec.contact_height
    dx = spec.hoop_center[0] - x0
    dz = spec.hoop_center[1] - zc

    def miss(v):
        vx = (1.0 + cor) * v / 2.0
        vz = -(1.0 - cor) * v / 2.0
        t = dx / vx
        return vz * t - 0.5 * G * t * t - dz

    lo, hi = 0.1, 60.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if miss(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    v = 0.5 * (lo + hi)
    return zc + v * v / (2.0 * G)


def test_contact_height_geometry():
    # The 45-degree surface through the origin passes below the drop line
    # x = -1 at z = 1; contact happens one ball radius along the normal.
    expected = (SPEC.ball_radius - SPEC.drop_x * SPEC.normal[0]) / SPEC.normal[1]
    assert SPEC.contact_height == pytest.approx(expected)
    assert SPEC.contact_height == pytest.approx(1.0707, abs=1e-3)


def test_candidate_grid():
    heights = SPEC.candidate_heights()
    assert heights.shape == (100,)
    assert heights[0] == pytest.approx(1.2)
    assert heights[-1] == pytest.approx(9.5)


def test_simulate_bounce_starts_at_drop_height():
    pos = simulate_bounce(0.5, 4.0, SPEC)
    assert pos.shape == (SPEC.frames, 2)
    assert pos[0, 0] == pytest.approx(SPEC.drop_x)
    assert pos[0, 1] == pytest.approx(4.0)


def test_plan_matches_closed_form_optimum():
    grid_step = (9.5 - 1.2) / 99
    for cor in (0.4, 0.5, 0.65):
        plan = plan_bounce_shot(cor, SPEC)
        assert plan.feasible
        assert plan.min_distance < SPEC.hoop_radius
        assert abs(plan.height - _closed_form_height(cor)) <= grid_step * 1.5


def test_plan_height_decreases_with_restitution():
    # A bouncier ball needs less drop height to reach the hoop.
    heights = [plan_bounce_shot(c, SPEC).height for c in (0.35, 0.45, 0.55, 0.65)]
    assert np.all(np.diff(heights) < 0)


def test_plan_dead_ball_is_infeasible():
    plan = plan_bounce_shot(0.0, SPEC)
    assert not plan.feasible


def test_plan_clamps_cor_into_unit_interval():
    a = plan_bounce_shot(1.7, SPEC)
    b = plan_bounce_shot(1.0, SPEC)
    assert a.height == b.height


def test_oracle_trials_succeed():
    result = run_sim2sim_task(10, (0.35, 0.65), seed=2, oracle=True)
    assert result.success_rate == 1.0
    assert len(result.records) == 10


def test_task_is_deterministic():
    a = run_sim2sim_task(6, (0.3, 0.7), seed=5, oracle=True)
    b = run_sim2sim_task(6, (0.3, 0.7), seed=5, oracle=True)
    for ra, rb in zip(a.records, b.records):
        assert ra == rb


def test_task_seeds_differ():
    a = run_sim2sim_task(6, (0.3, 0.7), seed=5, oracle=True)
    b = run_sim2sim_task(6, (0.3, 0.7), seed=6, oracle=True)
    assert any(ra.true_cor != rb.true_cor for ra, rb in zip(a.records, b.records))


def test_task_csv(tmp_path):
    result = run_sim2sim_task(3, (0.4, 0.6), seed=1, oracle=True)
    path = tmp_path / "task.csv"
    task_to_csv(result, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 5  # header + 3 trials + success-rate trailer
    assert lines[-1].startswith("success_rate")
