import math

import numpy as np
import pytest

import predho


def test_mos_anchors():
    assert predho.mos_stall(0.0, 0) == 5.0
    assert predho.mos_quality(0.0) == 2.501
    assert predho.mos_combined(5.0, 2.501) == pytest.approx(3.7505)
    want = 3.5 * math.exp(-(0.15 * 1.46 + 0.19) * 3) + 1.5
    assert predho.mos_stall(1.46, 3) == pytest.approx(want, abs=1e-12)


def test_energy():
    assert predho.battery_hours(2289.0) == pytest.approx(4.22, abs=0.01)
    assert predho.overhead_percent(2649.0, 2289.0) == pytest.approx(15.73, abs=0.01)
    with pytest.raises(predho.NumericError):
        predho.battery_hours(0.0)


def test_trace_and_windows():
    tr = predho.generate_scenario(1, seed=3)
    assert tr.duration > 120
    assert len(tr.loss_events()) == 1
    again = predho.parse_trace_csv(tr.to_csv())
    assert again == tr
    x, y, ends, users = predho.windows(tr, "full")
    assert x.shape[1] == 1500
    assert x.shape[0] == len(y) == len(ends) == len(users)
    assert set(np.unique(y)) <= {0, 1}
    xr, *_ = predho.windows(tr)
    assert xr.shape[1] == 480


def test_errors_map_to_python():
    with pytest.raises(predho.ParseError):
        predho.parse_trace_csv("t,kind,value\n0,rssi,abc\n")
    with pytest.raises(predho.ConfigError):
        predho.run_experiment('{"version": 1, "nope": 1}')
    assert issubclass(predho.ConfigError, predho.Error)


def test_evaluate():
    r = predho.evaluate([0.9, 0.9, 0.1, 0.1], [1, 0, 1, 0])
    assert (r["tp"], r["fp"], r["fn"], r["tn"]) == (1, 1, 1, 1)


def test_train_predict_and_simulate(tmp_path):
    bundle, precision, recall = predho.train(users=3, epochs=8)
    assert bundle.architecture == "NN1"
    assert 0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0
    path = tmp_path / "model.json"
    bundle.save(path)
    back = predho.load_bundle(path)
    assert back.to_text() == bundle.to_text()

    tr = predho.generate_scenario(1, seed=5)
    preds = predho.predict_trace(bundle, tr)
    assert preds[0][2] == "WARMUP"
    x, *_ = predho.windows(tr)
    p = bundle.predict(x)
    assert p.shape == (x.shape[0],)
    assert np.all((p > 0) & (p < 1))
    assert bundle.predict(x[0]) == p[0]

    stock = predho.run_session(tr, "Stock")
    seamless = predho.run_session(tr, "Seamless", bundle)
    assert stock["cellular_bytes"] == 0
    assert seamless["cellular_bytes"] > 0
    with pytest.raises(predho.ConfigError):
        predho.run_session(tr, "Seamless")


def test_run_experiment_summary():
    rows, summary = predho.run_experiment(
        '{"version": 1, "scenarios": [2], "modes": ["Stock", "MPTCP"], "repetitions": 2}'
    )
    assert len(rows) == 4
    assert summary.splitlines()[0].startswith("scenario,mode,runs")
    assert len(summary.splitlines()) == 3


def test_arrays_are_real_arrays():
    tr = predho.generate_scenario(1, seed=3)
    x, y, _, _ = predho.windows(tr)
    assert y.strides == (1,)
    assert y.sum() > 0 and y.sum() < len(y)
    assert x.strides == (x.shape[1] * 8, 8)
