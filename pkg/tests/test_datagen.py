import json

import numpy as np
import pytest

from src.datagen import (
    TEST,
    TRAIN,
    AprbsChannel,
    ExcitationController,
    ExcitationStreams,
    InitRanges,
    InputPolicyConfig,
    RegressionDataset,
    TargetKind,
    aprbs,
    build_dataset,
    control_input_at,
    envelope_coverage,
    generate_corpus,
    generate_trajectory,
    load_split,
    masses_from_ratios,
    sample_initial_state,
    state_std,
    trajectory_path,
)
from src.integrate import Trajectory, simulate
from src.plant import LiquidusMode, derivative, mass_ratios, residual_oracle
from src.utils import make_rng
from src.datagen import corpus
from src.utils.exceptions import ConfigurationError, ConversionError, MissingArtifactError, SimulationDivergedError


def test_masses_from_ratios_reference_case():
    x2, x3 = masses_from_ratios(0.02, 0.09, 11500.0)
    assert x2 == pytest.approx(258.43, abs=5e-3)
    assert x3 == pytest.approx(1162.92, abs=5e-3)
    c2, c3 = mass_ratios([0.0, x2, x3, 11500.0, 0.0, 0.0, 0.0, 0.0])
    assert c2 == pytest.approx(0.02, rel=1e-12)
    assert c3 == pytest.approx(0.09, rel=1e-12)


def test_masses_from_ratios_rejects_full_composition():
    with pytest.raises(ConversionError):
        masses_from_ratios(0.5, 0.5, 100.0)


def test_initial_states_fall_in_ranges():
    ranges = InitRanges()
    rng = make_rng(3, "init")
    x = np.stack([sample_initial_state(rng, ranges) for _ in range(10_000)])
    c2, c3 = mass_ratios(x)
    assert np.all((x[:, 0] >= ranges.x1[0]) & (x[:, 0] <= ranges.x1[1]))
    assert np.all((c2 >= ranges.c_x2[0] - 1e-12) & (c2 <= ranges.c_x2[1] + 1e-12))
    assert np.all((c3 >= ranges.c_x3[0] - 1e-12) & (c3 <= ranges.c_x3[1] + 1e-12))
    for j, name in ((3, "x4"), (4, "x5"), (5, "x6"), (6, "x7"), (7, "x8")):
        low, high = getattr(ranges, name)
        assert np.all((x[:, j] >= low) & (x[:, j] <= high))


def test_init_ranges_validation():
    with pytest.raises(ConfigurationError):
        InitRanges(x1=(10.0, 1.0))
    assert InitRanges.from_dict(InitRanges().to_dict()) == InitRanges()


def test_aprbs_segments():
    signal = aprbs(np.random.default_rng(0), (-7e3, 7e3), (10, 100), 5000)
    assert signal.shape == (5000,)
    assert np.all((signal >= -7e3) & (signal <= 7e3))
    changes = np.flatnonzero(np.diff(signal)) + 1
    bounds = np.concatenate([[0], changes, [len(signal)]])
    lengths = np.diff(bounds)
    # the last segment may be cut short by the end of the signal
    assert np.all(lengths[:-1] >= 10)
    assert np.all(lengths <= 100)
    assert len(lengths) >= 5000 // 100


def test_aprbs_hold_lengths_are_uniform():
    signal = aprbs(np.random.default_rng(1), (-1.0, 1.0), (10, 100), 1_000_000)
    changes = np.flatnonzero(np.diff(signal)) + 1
    # drop the final segment, cut short by the end of the signal
    lengths = np.diff(np.concatenate([[0], changes]))
    counts = np.bincount(lengths, minlength=101)[10:]
    assert len(counts) == 91 and counts.sum() == len(lengths)
    p = 1.0 / 91
    expected = len(lengths) * p
    sigma = np.sqrt(len(lengths) * p * (1.0 - p))
    assert np.all(np.abs(counts - expected) <= 4.5 * sigma)
    # chi-square with 90 degrees of freedom, far tail
    assert np.sum((counts - expected) ** 2 / expected) < 150.0


def test_aprbs_rejects_bad_intervals():
    with pytest.raises(ConfigurationError):
        aprbs(np.random.default_rng(0), (1.0, 0.0), (10, 100), 10)
    with pytest.raises(ConfigurationError):
        aprbs(np.random.default_rng(0), (0.0, 1.0), (0, 100), 10)


def test_control_policy(typical_state):
    policy = InputPolicyConfig()
    streams = ExcitationStreams.draw(policy, 400, 11, "train", 0, 0)
    c2, c3 = mass_ratios(typical_state)

    u = control_input_at(0, typical_state, policy, streams)
    r = streams.random_terms
    assert u[0] == pytest.approx(max(0.0, 3e4 * (0.023 - c2) + r["u1"][0]))
    assert u[2] == pytest.approx(max(0.0, 1.3e4 * (0.105 - c3) + r["u3"][0]))
    assert u[3] == pytest.approx(max(0.0, 2.0 * (typical_state[4] - 1e4) + r["u4"][0]))

    for k in range(1, 400):
        u = control_input_at(k, typical_state, policy, streams)
        assert (u[0] != 0.0) <= (k % 30 == 0)
        assert (u[2] != 0.0) <= (k % 60 == 0)
        assert (u[3] != 0.0) <= (k % 180 == 0)
        assert 1.4e4 - 7e3 <= u[1] <= 1.4e4 + 7e3
        assert 0.05 - 0.015 <= u[4] <= 0.05 + 0.015
        assert np.all(u >= 0.0)

    assert np.all((r["u1"] >= -2.0) & (r["u1"] <= 2.0))
    assert np.all((r["u3"] >= -0.5) & (r["u3"] <= 0.5))


def test_impulses_clamp_at_zero(typical_state):
    policy = InputPolicyConfig()
    streams = ExcitationStreams.draw(policy, 10, 1, "x")
    state = typical_state.copy()
    state[4] = 9000.0
    assert control_input_at(0, state, policy, streams)[3] == 0.0


def test_input_policy_from_dict():
    policy = InputPolicyConfig.from_dict({"u2": {"base": 1.2e4, "random_interval": [-1e3, 1e3]}})
    assert policy.u2 == AprbsChannel(1.2e4, (-1e3, 1e3))
    assert policy.u1 == InputPolicyConfig().u1


def test_controller_streams_are_reproducible(typical_state):
    a = ExcitationController.create(InputPolicyConfig(), 100, 5, "test", 3, 0)
    b = ExcitationController.create(InputPolicyConfig(), 100, 5, "test", 3, 0)
    c = ExcitationController.create(InputPolicyConfig(), 100, 5, "test", 4, 0)
    first = [a(k, typical_state) for k in range(100)]
    assert np.array_equal(first, [b(k, typical_state) for k in range(100)])
    assert not np.array_equal(first, [c(k, typical_state) for k in range(100)])


def test_generate_trajectory_is_indexed():
    a = generate_trajectory(5, TRAIN, 2, 50, 10.0)
    b = generate_trajectory(5, TRAIN, 2, 50, 10.0)
    c = generate_trajectory(5, TRAIN, 3, 50, 10.0)
    d = generate_trajectory(5, TEST, 2, 50, 10.0)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.inputs, b.inputs)
    assert not np.array_equal(a.states[0], c.states[0])
    assert not np.array_equal(a.states[0], d.states[0])
    assert a.n_steps == 50


def test_generate_corpus_independent_of_workers(tmp_path):
    serial = generate_corpus(9, n_train=3, n_test=2, steps=30, workers=1, out_dir=tmp_path / "a")
    parallel = generate_corpus(9, n_train=3, n_test=2, steps=30, workers=2, out_dir=tmp_path / "b")
    for left, right in zip(serial[0] + serial[1], parallel[0] + parallel[1]):
        assert np.array_equal(left.states, right.states)
    for split, count in ((TRAIN, 3), (TEST, 2)):
        for i in range(count):
            a = trajectory_path(tmp_path / "a", split, i)
            b = trajectory_path(tmp_path / "b", split, i)
            assert a.read_bytes() == b.read_bytes()
    assert len(load_split(tmp_path / "a", TRAIN)) == 3
    assert trajectory_path(tmp_path, TEST, 7).name == "test_007.csv"


def test_generate_trajectory_redraws_after_divergence(monkeypatch):
    calls = []
    real_simulate = corpus.simulate

    def flaky(x0, controller, steps, dt, mode, consts, trajectory_index=None):
        calls.append(x0.copy())
        if len(calls) == 1:
            raise SimulationDivergedError(3, 6, trajectory_index)
        return real_simulate(x0, controller, steps, dt, mode, consts, trajectory_index=trajectory_index)

    monkeypatch.setattr(corpus, "simulate", flaky)
    trajectory = generate_trajectory(1, TRAIN, 0, 10, 10.0, max_resample_attempts=2)
    assert len(calls) == 2
    assert not np.array_equal(calls[0], calls[1])
    assert np.array_equal(trajectory.states[0], calls[1])


def test_generate_trajectory_gives_up(monkeypatch):
    def always(x0, controller, steps, dt, mode, consts, trajectory_index=None):
        raise SimulationDivergedError(0, 1, trajectory_index)

    monkeypatch.setattr(corpus, "simulate", always)
    with pytest.raises(SimulationDivergedError) as excinfo:
        generate_trajectory(1, TEST, 12, 10, 10.0, max_resample_attempts=1)
    assert excinfo.value.trajectory_index == 12


def test_load_split_missing(tmp_path):
    with pytest.raises(MissingArtifactError):
        load_split(tmp_path, TEST)


def constant_trajectory(typical_state, steps=40):
    return simulate(typical_state, lambda k, x: np.array([0.0, 1.4e4, 0.0, 0.0, 0.05]), steps, 10.0)


def test_build_dataset_targets(typical_state):
    trajectory = constant_trajectory(typical_state)
    ds = build_dataset([trajectory, trajectory], TargetKind.STATE_DERIVATIVE)
    assert ds.features.shape == (80, 13)
    assert ds.targets.shape == (80, 8)
    k = 17
    np.testing.assert_array_equal(ds.features[k], np.concatenate([trajectory.states[k], trajectory.inputs[k]]))
    np.testing.assert_allclose(ds.targets[k], (trajectory.states[k + 1] - trajectory.states[k]) / 10.0, rtol=1e-15)

    residual = build_dataset([trajectory], TargetKind.RESIDUAL)
    ablated = derivative(trajectory.states[k], trajectory.inputs[k], mode=LiquidusMode.ABLATED)
    np.testing.assert_allclose(residual.targets[k], ds.targets[k] - ablated, rtol=1e-12, atol=1e-15)


def test_norm_stats_floor_constant_columns(typical_state):
    ds = build_dataset([constant_trajectory(typical_state)], TargetKind.STATE_DERIVATIVE)
    stats = ds.norm_stats
    # u1, u2, u3, u4, u5 never change
    assert np.all(stats.feature_std[8:] == 1.0)
    np.testing.assert_allclose(stats.feature_mean[8:], [0.0, 1.4e4, 0.0, 0.0, 0.05], rtol=1e-12)
    features, targets = ds.normalized()
    assert np.all(np.isfinite(features)) and np.all(np.isfinite(targets))
    np.testing.assert_allclose(features[:, :8].mean(axis=0), 0.0, atol=1e-9)


def test_dataset_roundtrip_and_sidecar(tmp_path, typical_state):
    ds = build_dataset([constant_trajectory(typical_state)], TargetKind.RESIDUAL)
    path = ds.save(tmp_path / "residual.csv")
    sidecar = json.loads((tmp_path / "residual.stats.json").read_text())
    assert sidecar["target_kind"] == "Residual"
    loaded = RegressionDataset.load(path)
    assert np.array_equal(loaded.features, ds.features)
    assert np.array_equal(loaded.targets, ds.targets)
    assert loaded.target_kind is TargetKind.RESIDUAL
    assert np.array_equal(loaded.train_std_x, ds.train_std_x)


def test_state_std_and_envelope(typical_state):
    trajectory = constant_trajectory(typical_state)
    std = state_std([trajectory])
    expected = np.std(trajectory.states, axis=0)
    expected[expected < 1e-9] = 1.0
    np.testing.assert_allclose(std, expected, rtol=1e-12)
    assert envelope_coverage([trajectory], [trajectory]) == 8


def test_build_dataset_rejects_mixed_timesteps(typical_state):
    a = constant_trajectory(typical_state)
    b = Trajectory(dt=5.0, states=a.states, inputs=a.inputs, aux_g1=a.aux_g1)
    with pytest.raises(ValueError):
        build_dataset([a, b], TargetKind.STATE_DERIVATIVE)


def residual_gap(typical_state, dt, seconds=2000.0):
    steps = int(round(seconds / dt))
    trajectory = simulate(typical_state, lambda k, x: np.array([0.0, 1.4e4, 0.0, 0.0, 0.05]), steps, dt)
    ds = build_dataset([trajectory], TargetKind.RESIDUAL)
    oracle = residual_oracle(ds.features[:, :8], ds.features[:, 8:])
    return ds.targets, np.max(np.abs(ds.targets - oracle), axis=0)


def test_residual_targets_track_the_oracle(typical_state):
    targets, coarse_gap = residual_gap(typical_state, 10.0)
    _, fine_gap = residual_gap(typical_state, 5.0)
    # x2, x3 and x5 do not depend on the liquidus temperature
    assert np.max(np.abs(targets[:, [1, 2, 4]])) <= 1e-10
    # forward differences are first order: C estimated from dt = 5 bounds the dt = 10 gap
    c = fine_gap / 5.0
    for i in (0, 3, 5, 6):
        assert coarse_gap[i] <= 2.5 * c[i] * 10.0 + 1e-12


@pytest.fixture(scope="module")
def default_corpus():
    return generate_corpus(0, workers=4)


@pytest.mark.slow
def test_default_corpus_completes_with_redraws(default_corpus):
    train, test = default_corpus
    assert len(train) == 40 and len(test) == 100
    assert all(t.n_steps == 5000 and t.is_finite() for t in train + test)
    for split, trajectories in ((TRAIN, train), (TEST, test)):
        first_draw = sample_initial_state(make_rng(0, split, 4, 0, "init"))
        assert not np.array_equal(trajectories[4].states[0], first_draw)
        with pytest.raises(SimulationDivergedError) as excinfo:
            generate_trajectory(0, split, 4, 5000, 10.0, max_resample_attempts=0)
        assert excinfo.value.trajectory_index == 4
    assert np.array_equal(train[0].states[0], sample_initial_state(make_rng(0, TRAIN, 0, 0, "init")))


@pytest.mark.slow
def test_training_envelope_covers_test_envelope(default_corpus):
    train, test = default_corpus
    assert envelope_coverage(train, test) >= 7
