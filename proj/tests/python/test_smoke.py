# SPDX-License-Identifier: Apache-2.0
import math

import numpy as np
import pytest

import lgi_grounding as lgi


def test_metrics():
    assert lgi.tiou((0.0, 0.5), (0.25, 0.75)) == pytest.approx(1 / 3)
    truths = [(0.0, 1.0)] * 4
    preds = [(0.0, 0.2), (0.0, 0.4), (0.0, 0.6), (0.0, 0.8)]
    report = lgi.evaluate(preds, truths)
    assert report["R@0.3"] == 75.0
    assert report["R@0.5"] == 50.0
    assert report["R@0.7"] == 25.0
    assert report["mIoU"] == pytest.approx(50.0)
    assert lgi.canonicalize(0.9, -0.2) == (0.0, 0.9)


def test_losses():
    assert lgi.loss_reg((0.5, 0.0), (0.0, 0.0)) == 0.125
    assert lgi.loss_reg((2.0, -3.0), (0.0, 0.0)) == 4.0
    assert lgi.loss_dqa(np.full((4, 2), 0.25), 0.0) == pytest.approx(0.25, abs=1e-12)
    assert lgi.temporal_guide((0.0, 0.5), 4) == [1.0, 1.0, 0.0, 0.0]
    with pytest.raises(lgi.LgiError):
        lgi.loss_tag([0.5, 0.5], [0.0, 0.0])


def test_model_predicts_a_valid_interval():
    words = ["walk", "run", "then"]
    model = lgi.Model({"d": 8, "d_v": 4, "T": 6, "N": 2, "kernel": 3}, seed=3, vocabulary=words)
    out = model.predict("walk then run", np.random.default_rng(0).normal(size=(10, 4)))
    start, end = out["interval"]
    assert 0.0 <= start <= end <= 1.0
    assert out["temporal_attention"].shape == (1, 6)
    attn = out["query_attention"]
    assert attn.shape == (3, 2)
    assert np.allclose(attn.sum(axis=0), 1.0)
    assert model.parameter_count == sum(model.census().values())
    with pytest.raises(lgi.LgiError):
        model.predict("walk", np.zeros((10, 5)))


def test_generate_train_and_reload(tmp_path):
    manifest = lgi.generate_corpus(tmp_path / "data", 16, 6, {"d_v": 4, "n_prototypes": 5,
                                                            "frames_min": 10, "frames_max": 16})
    assert manifest["splits"] == {"train": 16, "val": 6}
    samples = lgi.load_split(tmp_path / "data" / "val.jsonl", tmp_path / "data" / "features")
    assert len(samples) == 6 and samples[0]["features"].shape[1] == 4

    summary = lgi.train(tmp_path / "data", {"d": 8, "T": 8, "N": 2, "kernel": 3, "epochs": 2},
                        tmp_path / "run")
    assert len(summary["history"]) == 2
    assert all(math.isfinite(h["loss"]) for h in summary["history"])

    model = lgi.Model.load(tmp_path / "run" / "checkpoint.bin")
    s = samples[0]
    out = model.predict(" ".join(s["tokens"]), s["features"])
    assert 0.0 <= out["interval"][0] <= out["interval"][1] <= 1.0


def test_bad_corpus_raises_data_error(tmp_path):
    with pytest.raises(lgi.DataError):
        lgi.load_split(tmp_path / "missing.jsonl", tmp_path)


def test_gradcheck():
    errors = lgi.gradcheck(points=1)
    assert max(errors.values()) < 1e-4
