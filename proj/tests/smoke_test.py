"""Smoke tests for the python bindings."""

import math
import os
import tempfile

import pytest

import byzsgd


def test_aggregation_rules():
    assert byzsgd.average([[0.0, 0.0], [2.0, 4.0]]) == [1.0, 2.0]
    assert byzsgd.median([[1.0], [9.0], [2.0]]) == [2.0]
    assert byzsgd.mda([[0.0], [0.1], [10.0]], 1) == [0.05]
    assert byzsgd.mda_indices([[0.0], [0.1], [10.0]], 1) == [0, 1]
    assert byzsgd.l2_diameter([[0.0, 0.0], [3.0, 4.0]]) == 5.0
    assert byzsgd.coordwise_diameter_sum([[0.0, 5.0], [2.0, 1.0], [1.0, 9.0]]) == 10.0
    assert byzsgd.quantile([0.9, 1.0, 1.1, 5.0], 0.75) == 1.1


def test_topology_and_schedule():
    topo = byzsgd.validate_topology(
        n_ps=9, f_ps=1, q_ps=4, n_w=7, f_w=2, q_w=5, d=3, mode="async", gather_period=3
    )
    assert topo.warnings == []
    with pytest.raises(Exception):
        byzsgd.validate_topology(n_ps=4, f_ps=1, q_ps=4, n_w=9, f_w=3, q_w=7, d=3)
    assert byzsgd.learning_rate(0.1, 1.0, 9) == pytest.approx(0.01)
    assert byzsgd.compute_gather_period(1.0, 0.1) == 3


def test_task_and_measurement():
    task = byzsgd.Task.quadratic([0.0, 0.0], noise_sigma=0.0, batch_ref=16)
    assert task.loss([0.0, 0.0]) == 0.0
    assert task.true_gradient([3.0, 4.0]) == [3.0, 4.0]
    assert task.lipschitz_constant() == 1.0
    g = task.sample_gradient([3.0, 4.0], batch=8, seed=1)
    assert g == [3.0, 4.0]

    noisy = byzsgd.Task.quadratic([0.0] * 4, noise_sigma=0.2, batch_ref=16)
    report = byzsgd.measure_variance_norm_ratio(
        noisy, [1.0, 0.0, 0.0, 0.0], [16, 64], trials=500, n_w=7, f_w=2, seed=3
    )
    assert report["ratio_by_batch"][16] > report["ratio_by_batch"][64]


def test_attacks():
    assert byzsgd.forge_model("reversed", [1.0, -2.0]) == [-1.0, 2.0]
    lie = byzsgd.forge_model("lie_model", [2.0, 0.0], z=1.035)
    assert lie[0] == pytest.approx(2.07)
    grads = byzsgd.forge_gradients("lie_gradient", [[1.0], [2.0], [3.0]], byz_count=2)
    assert grads == [[2.0], [2.0]]


def test_run_from_config(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        "\n".join(
            [
                "[topology]",
                "n_ps = 4",
                "f_ps = 0",
                "q_ps = 4",
                "n_w = 3",
                "f_w = 0",
                "q_w = 3",
                "d = 4",
                "mode = async",
                "[task]",
                "kind = quadratic",
                "[schedule]",
                "eta0 = 0.1",
                "[run]",
                "steps = 120",
                "theta0 = 1.0",
                "",
            ]
        )
    )
    csv_path = tmp_path / "metrics.csv"
    out = byzsgd.run_from_config(str(config), str(csv_path))
    assert out["steps"] == 120
    assert out["final_grad_norm"] < 1e-4
    header = csv_path.read_text().splitlines()[0]
    assert header.startswith("step,phase,server_id,loss")


def test_acceptance_hook():
    suites = byzsgd.acceptance_suites()
    assert "contraction" in suites
    results = byzsgd.run_acceptance("mda-oracle")
    assert len(results) == 1
    assert results[0]["passed"]
