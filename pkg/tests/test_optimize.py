import io
import json

import numpy as np
import pytest
from conftest import benchmark, spurious_point

from liftsense.objective import h_grad, h_value
from liftsense.optimize import (
    AdamConfig,
    NonFiniteLoss,
    TrialRecord,
    export_jsonl,
    project_trajectory,
    run_adam,
    run_trial,
    success_distance,
    success_rate,
)
from liftsense.tensor import DenseTensor, rank1_power


def test_config_validation():
    for bad in ({"lr": 0.0}, {"beta1": 1.0}, {"beta2": -0.1}, {"max_iters": 0}, {"record_every": -1}):
        with pytest.raises(ValueError):
            AdamConfig(**bad)


def test_quadratic_bowl():
    x, traj, loss, k = run_adam(lambda x: (float(x @ x), 2 * x), np.array([1.0, 1.0]), AdamConfig(max_iters=2000))
    assert np.linalg.norm(x) <= 1e-4
    assert traj[0][0] == 0 and traj[-1][0] == k


def test_zero_gradient_stops_immediately():
    x0 = np.array([0.3, -0.2])
    x, traj, loss, k = run_adam(lambda x: (1.0, np.zeros(2)), x0)
    np.testing.assert_array_equal(x, x0)
    assert k == 0 and len(traj) == 1


def test_non_finite_loss_raises():
    with pytest.raises(NonFiniteLoss):
        run_adam(lambda x: (np.inf, x), np.ones(2))
    with pytest.raises(ValueError):
        run_adam(lambda x: (0.0, x), np.array([np.nan]))


def test_record_every():
    cfg = AdamConfig(max_iters=25, grad_tol=0.0, record_every=10)
    _, traj, _, k = run_adam(lambda x: (float(x @ x), 2 * x), np.ones(2), cfg)
    assert [s[0] for s in traj] == [0, 10, 20, 25]
    _, traj, _, _ = run_adam(lambda x: (float(x @ x), 2 * x), np.ones(2), AdamConfig(max_iters=5, record_every=0))
    assert traj == []


def test_unlifted_adam_near_spurious_stays_spurious():
    p = benchmark(3)
    x0 = np.array([1.0, 0.0, -1.0]) + 0.01
    x, _, loss, _ = run_adam(lambda x: (h_value(p, x), h_grad(p, x)), x0, AdamConfig(record_every=0))
    assert loss > 0.01
    np.testing.assert_allclose(x, spurious_point(3), atol=1e-3)


def test_trial_determinism_and_success_flag():
    p = benchmark(3)
    a, b = run_trial(p, 1, 0), run_trial(p, 1, 0)
    np.testing.assert_array_equal(a.terminal.flat, b.terminal.flat)
    assert a.terminal_loss == b.terminal_loss and a.iters_used == b.iters_used
    assert all(np.array_equal(sa[2], sb[2]) for sa, sb in zip(a.steps, b.steps))
    assert a.success == (success_distance(p, 1, a.terminal.flat) <= 0.05)
    if a.success:
        assert a.terminal_loss <= 1e-10
    assert np.all(np.isfinite([s[1] for s in a.steps]))
    with pytest.raises(ValueError):
        run_trial(p, 1, 0, init_sigma=0.0)


def test_failed_unlifted_trial_is_spurious():
    p = benchmark(3)
    _, recs = success_rate(p, 1, 12)
    failed = [r for r in recs if not r.success]
    assert failed
    for r in failed:
        assert r.terminal_loss > 0.01


def test_success_distance_accepts_both_signs():
    p = benchmark(3)
    Z = rank1_power(p.z, 3).flat
    assert success_distance(p, 3, Z) == 0.0
    assert success_distance(p, 3, -Z) == 0.0


def test_success_rate_seeds_and_range():
    p = benchmark(3)
    rate, recs = success_rate(p, 1, 6, base_seed=10)
    assert [r.seed for r in recs] == list(range(10, 16))
    assert rate == sum(r.success for r in recs) / 6
    rate1, _ = success_rate(p, 1, 1)
    assert rate1 in (0.0, 1.0)
    with pytest.raises(ValueError):
        success_rate(p, 1, 0)


def _synthetic_record(l: int) -> TrialRecord:
    p = benchmark(3)
    rng = np.random.default_rng(0)
    Z = rank1_power(p.z, l).flat
    steps = [(k, 1.0 / (k + 1), Z + (0.5 / (k + 1)) * rng.standard_normal(Z.size)) for k in range(5)]
    steps.append((5, 0.0, Z.copy()))
    return TrialRecord(0, l, 3, steps, DenseTensor.from_flat(Z, 3, l), 0.0, True, 5, 0.0)


def test_projection_identity_for_order_one():
    rec = run_trial(benchmark(3), 1, 0, AdamConfig(max_iters=50))
    path = project_trajectory(rec)
    np.testing.assert_array_equal(path.points, np.array([s[2] for s in rec.steps]))


def test_projection_ends_at_ground_truth():
    rec = _synthetic_record(3)
    path = project_trajectory(rec)
    z = benchmark(3).z
    assert min(np.linalg.norm(path.points[-1] - z), np.linalg.norm(path.points[-1] + z)) <= 0.05
    for (_, _, w), r in zip(rec.steps, path.residuals):
        assert r <= np.linalg.norm(w) + 1e-12


def test_projection_even_order_sign_continuity():
    path = project_trajectory(_synthetic_record(2))
    for a, b in zip(path.points[:-1], path.points[1:]):
        assert np.linalg.norm(a - b) <= np.linalg.norm(a + b)


def test_projection_requires_steps():
    rec = _synthetic_record(2)
    rec.steps = []
    with pytest.raises(ValueError):
        project_trajectory(rec)


def test_export_jsonl_line_count(tmp_path):
    recs = [_synthetic_record(3), _synthetic_record(2)]
    n = export_jsonl(recs, tmp_path / "t.jsonl", header={"type": "header"})
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert n == len(lines) == 1 + sum(len(r.steps) for r in recs)
    row = json.loads(lines[1])
    assert set(row) == {"trial", "iter", "loss", "point"} and len(row["point"]) == 3
    buf = io.StringIO()
    assert export_jsonl(recs, buf, project=False) == n - 1
