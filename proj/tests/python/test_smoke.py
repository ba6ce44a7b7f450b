import json
import math

import numpy as np
import pytest

import ifmsan


@pytest.fixture(scope="module")
def toy():
    return ifmsan.make_toy_model(), ifmsan.make_toy_input()


def test_tensor_numpy_roundtrip():
    array = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    tensor = ifmsan.Tensor(array)
    assert tensor.dims == [2, 3, 4]
    assert len(tensor) == 24
    np.testing.assert_array_equal(tensor.numpy(), array)


def test_unfold_fold_identity():
    array = np.random.default_rng(5).normal(size=(2, 4, 4)).astype(np.float32)
    tensor = ifmsan.Tensor(array)
    flat = ifmsan.unfold(tensor)
    assert flat.shape == (32,)
    back = ifmsan.fold(flat, [2, 4, 4])
    np.testing.assert_array_equal(back.numpy(), array)


def test_zero_ratio():
    tensor = ifmsan.Tensor(np.array([0, 1, 0, 2], dtype=np.float32))
    assert ifmsan.zero_ratio(tensor) == 0.5


def test_sanitize_stream_examples():
    out = ifmsan.sanitize_stream(
        np.array([1, 2, 3, 0, 5, 0, 0, 9], dtype=np.float32), 4
    )
    np.testing.assert_array_equal(out, [2, 2, 2, 2, 5, 5, 5, 5])
    # n = 1 is the identity, n = 0 is rejected.
    s = np.array([3, 0, 7], dtype=np.float32)
    np.testing.assert_array_equal(ifmsan.sanitize_stream(s, 1), s)
    with pytest.raises(ValueError):
        ifmsan.sanitize_stream(s, 0)


def test_tensor_file_roundtrip(tmp_path):
    array = np.random.default_rng(6).normal(size=(3, 2, 2)).astype(np.float32)
    path = tmp_path / "t.ifmt"
    ifmsan.write_tensor(path, ifmsan.Tensor(array))
    np.testing.assert_array_equal(ifmsan.read_tensor(path).numpy(), array)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ifmsan.FormatError):
        ifmsan.read_tensor(path)


def test_reads_externally_produced_ifmt(tmp_path):
    # Frame the container by hand, the way any other tool would.
    import struct

    array = np.random.default_rng(8).normal(size=(2, 3)).astype(np.float32)
    payload = (
        struct.pack("<4sIIII", b"IFMT", 1, 2, 2, 3) + array.astype("<f4").tobytes()
    )
    path = tmp_path / "external.ifmt"
    path.write_bytes(payload)
    np.testing.assert_array_equal(ifmsan.read_tensor(path).numpy(), array)


def test_infer_and_top_class(toy):
    model, x = toy
    probabilities = ifmsan.infer(model, x)
    assert len(probabilities) == 10
    assert math.isclose(sum(probabilities), 1.0, abs_tol=1e-6)
    index, probability = ifmsan.top_class(probabilities)
    assert probabilities[index] == pytest.approx(probability)
    # Window-1 plan entries normalize away.
    assert ifmsan.infer(model, x, {"fc1": 1}) == probabilities
    assert ifmsan.plan_normalized({"fc1": 1, "norm1": 3}) == {"norm1": 3}


def test_model_save_load_roundtrip(toy, tmp_path):
    model, x = toy
    ifmsan.save_model(model, tmp_path)
    loaded = ifmsan.load_model(tmp_path / "model.json")
    assert loaded.layer_names == model.layer_names
    assert ifmsan.infer(loaded, x) == ifmsan.infer(model, x)


def test_sweep_and_metrics(toy):
    model, x = toy
    records = ifmsan.sweep(model, x, "fc1", 2, 12)
    assert [r.window_size for r in records] == list(range(2, 13))
    eff = ifmsan.eff_san(records)
    hist = ifmsan.accuracy_histogram(records)
    assert eff == pytest.approx((hist.low + hist.mid + hist.high) / len(records))
    multi = ifmsan.multi_layer_sweep(model, x, {"norm1": 1}, "fc1", 2, 12)
    assert [(r.window_size, r.probability) for r in multi] == [
        (r.window_size, r.probability) for r in records
    ]


def test_sweep_csv_roundtrip(toy, tmp_path):
    model, x = toy
    records = ifmsan.sweep(model, x, "fc1", 2, 30)
    path = tmp_path / "sweep.csv"
    ifmsan.write_sweep_csv(path, records)
    back = ifmsan.read_sweep_csv(path)
    assert ifmsan.eff_san(back) == ifmsan.eff_san(records)


def test_privacy_arithmetic():
    assert ifmsan.epsilon_lower_bound(1.0) == pytest.approx(math.log(2))
    assert ifmsan.meets_degree(0.8, 0.4, 1.0)
    assert not ifmsan.meets_degree(0.8, 0.41, 1.0)
    assert ifmsan.observed_privacy_loss(0.8, 0.4) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        ifmsan.epsilon_lower_bound(-1.0)


def test_controller(toy):
    model, x = toy
    result = ifmsan.control_sanitize(model, x, "fc1", 1.0, 512)
    assert result.observed_epsilon >= math.log(2) - 1e-9
    assert [r.window_size for r in result.trace] == list(
        range(2, result.window_size + 1)
    )
    identity = ifmsan.control_sanitize(model, x, "fc1", 0.0, 512)
    assert identity.window_size == 1
    assert identity.p_sanitized == identity.p_original


def test_controller_unreachable(tmp_path):
    # All-negative input dies at the relu, so the fc input is all zeros and
    # no window size changes anything.
    weights = np.array([[1, -1, 2, 0], [0, 3, -2, 1]], dtype=np.float32)
    ifmsan.write_tensor(tmp_path / "fc_w.ifmt", ifmsan.Tensor(weights))
    manifest = {
        "input_dims": [1, 2, 2],
        "layers": [
            {"name": "relu1", "kind": "relu"},
            {
                "name": "fc1",
                "kind": "fullyconnected",
                "out_features": 2,
                "weights": "fc_w.ifmt",
            },
            {"name": "prob", "kind": "softmax"},
        ],
    }
    (tmp_path / "model.json").write_text(json.dumps(manifest))
    model = ifmsan.load_model(tmp_path / "model.json")
    x = ifmsan.Tensor(np.full((1, 2, 2), -1.0, dtype=np.float32))
    with pytest.raises(ifmsan.BudgetUnreachableError):
        ifmsan.control_sanitize(model, x, "fc1", 1.0, 16)
