import json
import math

import numpy as np
import pytest

import earncast


def gaussian(rows, cols, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(rows, cols)) * np.linspace(0.2, 3.2, cols)
    x[:, 1:] += 0.3 * x[:, :-1]
    return x


def test_pca_matches_numpy_eigh():
    x = gaussian(120, 8, 1)
    model = earncast.fit_pca(x)
    vals, vecs = np.linalg.eigh(np.cov(x, rowvar=False))
    order = np.argsort(vals)[::-1]
    np.testing.assert_allclose(model.eigenvalues, vals[order], rtol=1e-10, atol=1e-10)
    w = model.loadings
    for k in range(8):
        ref = vecs[:, order[k]]
        sign = 1.0 if w[:, k] @ ref > 0 else -1.0
        np.testing.assert_allclose(w[:, k], sign * ref, atol=1e-8)
    np.testing.assert_allclose(w.T @ w, np.eye(8), atol=1e-10)
    assert model.choose_components(1e-9) == 1
    assert model.choose_components(1.0) <= 8


def test_pca_reconstruction_at_full_rank():
    x = gaussian(50, 5, 2)
    model = earncast.fit_pca(x, standardize=True)
    model.kept = 5
    np.testing.assert_allclose(model.reconstruct(model.transform(x)), x, atol=1e-9)


def test_gbdt_fits_a_separable_problem():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(200, 3))
    y = (x[:, 0] > 0).astype(int).tolist()
    params = earncast.HyperParams()
    params.n_rounds = 30
    params.num_leaves = 4
    params.min_data_in_leaf = 5
    model = earncast.fit_gbdt(x, y, 2, params)
    assert model.rounds == 30
    assert all(b <= a for a, b in zip(model.train_loss, model.train_loss[1:]))
    proba = model.predict_proba(x)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    assert np.mean(np.array(model.predict(x)) == np.array(y)) > 0.95
    gain = model.feature_importance("gain")
    assert int(np.argmax(gain)) == 0
    again = earncast.loads_gbdt(model.dumps())
    np.testing.assert_array_equal(again.predict_proba(x), proba)


def test_errors_surface_as_earncast_error():
    params = earncast.HyperParams()
    params.num_leaves = 1
    with pytest.raises(earncast.EarncastError, match="invalid parameters"):
        earncast.fit_gbdt(np.zeros((4, 1)), [0, 1, 0, 1], 2, params)
    with pytest.raises(earncast.EarncastError, match="insufficient history"):
        earncast.enumerate_subsets(["2000Q1", "2000Q2"], 80)


def test_fill_period_and_harness_arithmetic():
    assert earncast.select_fill_period([5.0, 5.0, None, 5.0]) == 1
    assert earncast.lagged_column_count(154, 11, 20) == 3091
    quarters = [f"{1990 + i // 4}Q{i % 4 + 1}" for i in range(120)]
    subsets = earncast.enumerate_subsets(quarters, 80)
    assert len(subsets) == 40
    assert subsets[0]["test_quarter"] == "2010Q1"
    assert subsets[-1]["test_quarter"] == "2019Q4"


def test_conditional_accuracy_hand_table():
    actual = [0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2]
    model = [0, 1, 2, 0, 0, 0, 0, 1, 2, 1, 2, 0]
    cons = [0, 1, 2, 0, 0, 0, 1, 2, 0, 0, 1, 2]
    m = earncast.conditional_accuracy(model, cons, actual)
    assert m["n_converge"] == 6 and m["n_diverge"] == 6
    assert m["converge_model_acc"] == pytest.approx(4 / 6)
    assert m["diverge_model_acc"] == pytest.approx(3 / 6)
    assert m["total_model_acc"] == pytest.approx(7 / 12)


SMALL = {
    "synth.n_companies": "40",
    "synth.n_quarters": "36",
    "synth.n_filler_variables": "2",
    "n_lags": "4",
    "impute.lookback": "4",
    "train_len": "24",
    "max_subsets": "2",
    "validation.size": "3",
    "search.budget": "2",
    "gbdt.n_rounds": "20",
    "gbdt.min_data_in_leaf": "10",
    "standardize": "true",
    "seed": "5",
}


def test_synth_backtest_report(tmp_path):
    config = earncast.Config(settings=SMALL, base_dir=tmp_path)
    data_dir = earncast.synth(config)
    assert (data_dir / "panel.csv").exists()
    out_dir, records = earncast.backtest(config)
    assert len(records) == 2
    for r in records:
        assert 0.0 <= r["accuracy"] <= 1.0
        c = r["conditional"]
        n = c["n_converge"] + c["n_diverge"]
        assert math.isclose(
            c["total_model_acc"],
            (c["converge_model_correct"] + c["diverge_model_correct"]) / n,
        )
    text = earncast.report(out_dir)
    assert text == earncast.report(out_dir)
    first = (out_dir / "report.jsonl").read_bytes()
    earncast.backtest(config)
    assert (out_dir / "report.jsonl").read_bytes() == first
    assert [json.loads(line) for line in first.decode().splitlines()] == records


def test_config_rejects_unknown_key(tmp_path):
    with pytest.raises(earncast.EarncastError, match="unknown setting"):
        earncast.Config(settings={"nonsense": "1"}, base_dir=tmp_path)
