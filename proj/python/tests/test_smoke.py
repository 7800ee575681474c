import json
import math

import pytest

import tncirc


def test_layout_and_param_shapes():
    layout = tncirc.make_layout("ttn", 4, nv=1, layers=2)
    assert layout.n_blocks == 3
    assert layout.param_count == 3 * 2 * 2 * 3
    params = tncirc.ParamVector.zeros(layout)
    assert len(params.values) == layout.param_count


def test_zero_params_give_plus_one():
    for kind, n in [("mps", 6), ("ttn", 8)]:
        layout = tncirc.make_layout(kind, n, nv=1, layers=1)
        circuit = tncirc.build_circuit(layout, tncirc.ParamVector.zeros(layout))
        assert tncirc.circuit_expval(circuit) == pytest.approx(1.0, abs=1e-12)


def test_cut_run_matches_uncut():
    layout = tncirc.make_layout("mps", 8, nv=1, layers=2)
    report = tncirc.cut_run(layout, seed=7)
    assert report["n_configs"] == tncirc.count_configs_mps(8, 1) == 67
    assert report["max_abs_error"] <= 1e-8


def test_tensor_network_oracle():
    layout = tncirc.make_layout("ttn", 4, nv=1, layers=2)
    params = tncirc.ParamVector.random(layout, seed=5)
    circuit = tncirc.build_circuit(layout, params)
    assert tncirc.circuit_tn_expval(circuit) == pytest.approx(
        tncirc.circuit_expval(circuit), abs=1e-10
    )


def test_bas_dataset_shape():
    data = tncirc.generate_bas(4, seed=11)
    assert data.size == 28
    assert len(data.train_indices) == len(data.test_indices) == 14
    labels = [data.label(i) for i in range(data.size)]
    assert sum(labels) == 14  # perfectly balanced


def test_train_and_checkpoint_roundtrip(tmp_path):
    data = tncirc.generate_bas(4, seed=11)
    layout = tncirc.make_layout("ttn", 4, nv=1, layers=2)
    model = tncirc.train(layout, data, max_iters=40, seed=0)
    assert model.iterations == 40
    path = str(tmp_path / "model.json")
    tncirc.save_model(model, path)
    loaded = tncirc.load_model(path)
    acc = tncirc.evaluate_accuracy(loaded, data, "train")
    assert acc == tncirc.evaluate_accuracy(model, data, "train")
    with open(path) as fh:
        assert json.load(fh)["format_version"] == 1


def test_loss_reference_values():
    assert tncirc.loss([0.0]) == pytest.approx(1 / 11)
    assert tncirc.loss([1.0]) == pytest.approx(1 / (1 + 10 * math.exp(7)))
    assert tncirc.prob_correct(1.0, 0) == 1.0


def test_tn_layout_from_text():
    graph = "\n".join(
        ["0 1 2", "1 2 2", "2 3 2", "open 0 2", "open 1 2", "open 2 2", "open 3 2"]
    )
    result = tncirc.tn_layout_from_text(graph, ["in"] * 4)
    assert result["n_blocks"] == 4
    assert result["total_qubits"] == 4


def test_estimate_cost_ratio():
    assert tncirc.estimate_cost(2, 5, 0.1) / tncirc.estimate_cost(1, 5, 0.1) == 1024.0
