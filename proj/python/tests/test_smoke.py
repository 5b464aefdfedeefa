import math
import tempfile

import numpy as np
import pytest

import xorlab


def test_forward_hand_value():
    p = xorlab.init_network(m=2, d=2, omega_init=1.0, seed=0)
    p.W = np.array([[1.0, 0.0], [0.0, 1.0]])
    out = xorlab.forward(p, np.array([2.0, 3.0]))
    assert out == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-12)


def test_logistic_loss_values():
    assert xorlab.logistic_loss(0.0) == pytest.approx(math.log(2.0))
    z = np.array([-50.0, 0.0, 50.0])
    losses = xorlab.logistic_loss(z)
    assert losses[0] == pytest.approx(50.0, abs=1e-9)
    assert 0.0 < losses[2] < 2e-22
    assert xorlab.logistic_loss_deriv(0.0) == -0.5


def test_sampling_determinism_and_bookkeeping():
    spec = xorlab.make_spec(d=6, sigma=0.2, eta=0.2, seed=0)
    a = xorlab.sample_dataset(spec, 200, seed=9)
    b = xorlab.sample_dataset(spec, 200, seed=9)
    assert np.array_equal(a.points, b.points)
    labels = np.asarray(a.labels)
    clean = np.asarray(a.clean_labels)
    flipped = np.flatnonzero(labels != clean)
    assert set(flipped.tolist()) == set(a.noisy_set)


def test_theorem_schedule():
    assert xorlab.theorem_schedule(0.25) == 2
    assert xorlab.theorem_schedule(0.05) == 6
    assert xorlab.theorem_schedule(0.1) == 4


def test_train_determinism_and_frozen_second_layer():
    spec = xorlab.make_spec(d=20, sigma=0.1, eta=0.1, seed=0)
    ds = xorlab.sample_dataset(spec, 128, seed=3)
    tr1 = xorlab.train(ds, m=16, alpha=0.1, T=5, omega_init=1e-6, seed=7)
    tr2 = xorlab.train(ds, m=16, alpha=0.1, T=5, omega_init=1e-6, seed=7)
    assert np.array_equal(tr1.final_params.W, tr2.final_params.W)
    assert np.array_equal(tr1.params_at(0).a, tr1.final_params.a)
    assert [s.t for s in tr1.stats] == list(range(6))


def test_gradient_matches_finite_differences():
    spec = xorlab.make_spec(d=4, sigma=0.3, eta=0.2, seed=0)
    ds = xorlab.sample_dataset(spec, 16, seed=5)
    p = xorlab.init_network(m=4, d=4, omega_init=0.5, seed=11)
    g = xorlab.gradient(p, ds)
    h = 1e-6
    for j in range(4):
        for k in range(4):
            Wp = p.W.copy()
            Wm = p.W.copy()
            Wp[j, k] += h
            Wm[j, k] -= h
            pp = xorlab.init_network(m=4, d=4, omega_init=0.5, seed=11)
            pm = xorlab.init_network(m=4, d=4, omega_init=0.5, seed=11)
            pp.W = Wp
            pm.W = Wm
            fd = (xorlab.empirical_risk(pp, ds) - xorlab.empirical_risk(pm, ds)) / (2 * h)
            assert g[j, k] == pytest.approx(fd, abs=1e-5)


def test_nu_oracle_error_close_to_eta():
    spec = xorlab.make_spec(d=40, sigma=0.05, eta=0.15, seed=0)
    nu = xorlab.nu_oracle_network(spec)
    est = xorlab.test_error(nu, spec, n_test=20000, seed=21)
    assert abs(est.value - 0.15) <= 3 * est.std_error


def test_checkpoint_roundtrip(tmp_path):
    p = xorlab.init_network(m=6, d=3, omega_init=0.2, seed=2)
    path = str(tmp_path / "net.nn")
    xorlab.save_checkpoint(p, path, "smoke")
    q = xorlab.load_checkpoint(path)
    x = np.array([0.3, -1.2, 0.5])
    assert xorlab.forward(p, x) == xorlab.forward(q, x)


def test_preset_and_run_pipeline(tmp_path):
    cfg = xorlab.preset("theorem")
    assert cfg["m"] == 128
    assert cfg["train"]["T"] == 4
    # Shrink everything so the smoke run takes a moment, not minutes.
    cfg["distribution"]["d"] = 80
    cfg["distribution"]["sigma"] = math.sqrt(1.0 / (16 * 80))
    cfg["n_train"] = 400
    cfg["n_test"] = 2000
    cfg["m"] = 64
    cfg["train"]["omega_init"] = math.sqrt(1e-10 / (64 * 80))
    cfg["outputs"]["dir"] = str(tmp_path / "out")
    cfg["seeds"] = [1]
    summary = xorlab.run(cfg)
    assert summary["per_seed"][0]["margins"]["clean_all_correct"] is True
    assert (tmp_path / "out" / "seed_1" / "trace.csv").exists()
    assert (tmp_path / "out" / "seed_1" / "diagnostics.json").exists()
