import numpy as np
import pytest

from src.datagen import NormStats, TargetKind
from src.nn import MlpParameters, TrainConfig, forward, save_model
from src.plant import LiquidusMode, PlantConstants, derivative
from src.predictor import ModelKind, NetworkTerm, Predictor, load_predictor, oracle_term
from src.utils.exceptions import ConfigurationError, NonFiniteDerivativeError


def stats_for(kind, target_mean=None):
    return NormStats(
        feature_mean=np.zeros(13), feature_std=np.full(13, 2.0),
        target_mean=np.zeros(8) if target_mean is None else target_mean,
        target_std=np.full(8, 0.5), state_std=np.ones(8), target_kind=kind,
    )


def test_pbm_is_the_ablated_plant(rng, pair_sampler):
    states, inputs = pair_sampler(rng, 50)
    pbm = Predictor.pbm()
    expected = derivative(states, inputs, mode=LiquidusMode.ABLATED)
    assert np.array_equal(pbm.predict_derivative(states, inputs), expected)
    assert pbm.kind is ModelKind.PBM


def test_costa_with_exact_residual_recovers_true_derivative(rng, pair_sampler):
    states, inputs = pair_sampler(rng, 200)
    costa = Predictor.costa_with(oracle_term())
    np.testing.assert_allclose(
        costa.predict_derivative(states, inputs), derivative(states, inputs), rtol=1e-12, atol=1e-15
    )


def test_costa_with_zero_network_equals_pbm(typical_state, typical_control):
    net = MlpParameters.zeros(norm_stats=stats_for(TargetKind.RESIDUAL))
    costa = Predictor.costa(net)
    assert np.array_equal(
        costa.predict_derivative(typical_state, typical_control),
        Predictor.pbm().predict_derivative(typical_state, typical_control),
    )


def test_ddm_returns_denormalized_network_output(typical_state, typical_control):
    offset = np.arange(8, dtype=float)
    net = MlpParameters.initialize(np.random.default_rng(0), norm_stats=stats_for(TargetKind.STATE_DERIVATIVE, offset))
    ddm = Predictor.ddm(net)
    features = np.concatenate([typical_state, typical_control]) / 2.0
    expected = forward(net, features) * 0.5 + offset
    np.testing.assert_allclose(ddm.predict_derivative(typical_state, typical_control), expected, rtol=1e-14)
    np.testing.assert_allclose(NetworkTerm(net)(typical_state, typical_control), expected, rtol=1e-14)


def test_predictor_rejects_wrong_target_kind():
    with pytest.raises(ConfigurationError):
        Predictor.ddm(MlpParameters.zeros(norm_stats=stats_for(TargetKind.RESIDUAL)))
    with pytest.raises(ConfigurationError):
        Predictor.costa(MlpParameters.zeros(norm_stats=stats_for(TargetKind.STATE_DERIVATIVE)))
    with pytest.raises(ConfigurationError):
        Predictor(ModelKind.DDM)
    with pytest.raises(ConfigurationError):
        NetworkTerm(MlpParameters.zeros())


def test_predictor_uses_its_constants(typical_state, typical_control):
    consts = PlantConstants(g1_ablated=960.0)
    assert not np.array_equal(
        Predictor.pbm(consts).predict_derivative(typical_state, typical_control),
        Predictor.pbm().predict_derivative(typical_state, typical_control),
    )


def test_non_finite_estimate(typical_state, typical_control):
    state = typical_state.copy()
    state[0] = 0.0
    pbm = Predictor.pbm()
    with pytest.raises(NonFiniteDerivativeError):
        pbm.predict_derivative(state, typical_control)
    assert not np.all(np.isfinite(pbm.predict_derivative(state, typical_control, check=False)))


@pytest.mark.parametrize("target_kind, kind", [
    (TargetKind.STATE_DERIVATIVE, ModelKind.DDM),
    (TargetKind.RESIDUAL, ModelKind.COSTA),
])
def test_load_predictor(tmp_path, typical_state, typical_control, target_kind, kind):
    net = MlpParameters.initialize(np.random.default_rng(1), norm_stats=stats_for(target_kind))
    path = save_model(tmp_path / "model.json", net, TrainConfig())
    predictor = load_predictor(path)
    assert predictor.kind is kind
    direct = Predictor(kind, net=net).predict_derivative(typical_state, typical_control)
    assert np.array_equal(predictor.predict_derivative(typical_state, typical_control), direct)
