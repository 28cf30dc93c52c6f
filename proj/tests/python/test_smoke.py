import numpy as np
import pytest

import octgate


def test_synth_shapes_and_determinism():
    scans, truths = octgate.synth_dataset(4, seed=7)
    assert scans.shape == (4, 10, 674)
    assert truths.shape == (4, 10)
    again, _ = octgate.synth_dataset(4, seed=7)
    assert np.array_equal(scans, again)
    assert scans.min() >= 0.0 and scans.max() <= 255.0


def test_corrupt_intensity_and_kinds():
    assert len(octgate.corruption_kinds()) == 8
    scan = np.full((10, 674), 100.0, dtype=np.float32)
    out = octgate.corrupt(scan, "intensity", seed=3)
    shift = out[0, 0] - 100.0
    assert 25.0 <= abs(shift) <= 50.0
    assert np.allclose(out, 100.0 + shift)
    with pytest.raises(Exception):
        octgate.corrupt(scan, "blur")


def test_mahalanobis_matches_numpy():
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(50, 3)) @ rng.normal(size=(3, 3))
    x = rng.normal(size=3)
    mu = samples.mean(axis=0)
    cov = (samples - mu).T @ (samples - mu) / len(samples)
    cov += 1e-6 * np.mean(np.diag(cov)) * np.eye(3)
    d = x - mu
    expected = np.sqrt(d @ np.linalg.solve(cov, d))
    assert octgate.mahalanobis(x, samples, 1e-6) == pytest.approx(expected, rel=1e-9)


def test_detector_roundtrip(tmp_path):
    train, _ = octgate.synth_dataset(60, seed=1)
    det = octgate.Detector.train(train)
    assert det.scales == 4
    holdout, _ = octgate.synth_dataset(40, seed=2)
    cal = det.calibrate(holdout, 0.9)
    assert cal.tau is not None
    path = tmp_path / "model.json"
    cal.save(str(path))
    loaded = octgate.Detector.load(str(path))
    assert loaded.scores(holdout) == cal.scores(holdout)
    noisy = octgate.corrupt(holdout[0], "noise", seed=5)
    assert cal.score(noisy) > cal.tau


def test_metrics():
    assert octgate.auroc([0.1, 0.4, 0.35, 0.8], [False, False, True, True]) == pytest.approx(0.75)
    assert octgate.average_precision([0.9, 0.8], [True, False]) == pytest.approx(1.0)


def test_onnx_interpreter_matches_onnxruntime(tmp_path):
    onnx = pytest.importorskip("onnx")
    ort = pytest.importorskip("onnxruntime")
    from onnx import TensorProto, helper, numpy_helper

    rng = np.random.default_rng(11)
    w1 = rng.uniform(-0.3, 0.3, size=(8, 3, 3, 3)).astype(np.float32)
    b1 = rng.uniform(-0.1, 0.1, size=8).astype(np.float32)
    w2 = rng.uniform(-0.2, 0.2, size=(12, 8, 3, 3)).astype(np.float32)
    nodes = [
        helper.make_node("Conv", ["input", "w1", "b1"], ["c1"], strides=[2, 2], pads=[1, 1, 1, 1]),
        helper.make_node("BatchNormalization", ["c1", "scale", "bias", "mean", "var"], ["bn"], epsilon=1e-5),
        helper.make_node("Relu", ["bn"], ["stem"]),
        helper.make_node("MaxPool", ["stem"], ["pool"], kernel_shape=[2, 2], strides=[2, 2]),
        helper.make_node("Conv", ["pool", "w2"], ["c2"], pads=[1, 1, 1, 1]),
        helper.make_node("HardSwish", ["c2"], ["block"]),
        helper.make_node("GlobalAveragePool", ["block"], ["pooled"]),
        helper.make_node("Flatten", ["pooled"], ["flat"]),
        helper.make_node("Softmax", ["flat"], ["out"], axis=1),
    ]
    inits = [
        numpy_helper.from_array(w1, "w1"),
        numpy_helper.from_array(b1, "b1"),
        numpy_helper.from_array(w2, "w2"),
        numpy_helper.from_array(rng.uniform(0.5, 1.5, 8).astype(np.float32), "scale"),
        numpy_helper.from_array(rng.uniform(-0.2, 0.2, 8).astype(np.float32), "bias"),
        numpy_helper.from_array(rng.uniform(-0.1, 0.1, 8).astype(np.float32), "mean"),
        numpy_helper.from_array(rng.uniform(0.5, 1.5, 8).astype(np.float32), "var"),
    ]
    graph = helper.make_graph(
        nodes,
        "smoke",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 32, 48])],
        [
            helper.make_tensor_value_info("out", TensorProto.FLOAT, [1, 12]),
            helper.make_tensor_value_info("stem", TensorProto.FLOAT, [1, 8, 16, 24]),
            helper.make_tensor_value_info("block", TensorProto.FLOAT, [1, 12, 8, 12]),
        ],
        inits,
    )
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid("", 14)])
    model.ir_version = 7
    onnx.checker.check_model(model)
    path = tmp_path / "smoke.onnx"
    onnx.save(model, str(path))

    x = rng.normal(size=(1, 3, 32, 48)).astype(np.float32)
    names = ["stem", "block", "out"]
    ours = octgate.onnx_run(str(path), "input", x, names)
    theirs = ort.InferenceSession(str(path), providers=["CPUExecutionProvider"]).run(names, {"input": x})
    for name, ref in zip(names, theirs):
        assert ours[name].shape == ref.shape
        np.testing.assert_allclose(ours[name], ref, rtol=1e-4, atol=1e-5)
