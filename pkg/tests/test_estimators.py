import numpy as np
import pytest
from sklearn.base import clone

from rkreg import (
    NadarayaWatson,
    PowerSequence,
    SemiRecursiveRegression,
    StepsizeConfig,
    estimate_functionals_nonrecursive,
    estimate_functionals_recursive,
    fallback_coefficient,
    gaussian_kernel,
    make_dataset,
    nw_fit,
    plugin_bandwidth,
    recursive_fit,
    robust_scale,
)

KERNEL = gaussian_kernel()


@pytest.fixture()
def data():
    rng = np.random.default_rng(17)
    x = rng.standard_normal(120)
    y = np.cos(x) + 0.4 * rng.standard_normal(120)
    return x, y


class TestNadarayaWatson:
    def test_fixed_bandwidth_matches_core(self, data):
        x, y = data
        model = NadarayaWatson(bandwidth=0.35).fit(x, y)
        grid = np.linspace(-2, 2, 31)
        np.testing.assert_array_equal(
            model.predict(grid), nw_fit(make_dataset(x, y), 0.35, grid, KERNEL)
        )

    def test_plugin_matches_selection_pipeline(self, data):
        x, y = data
        model = NadarayaWatson().fit(x, y)
        functionals = estimate_functionals_nonrecursive(make_dataset(x, y), KERNEL)
        plan = plugin_bandwidth(functionals, StepsizeConfig.nadaraya_watson(), KERNEL)
        assert model.coefficient_ == plan.coefficient
        assert model.bandwidth_ == pytest.approx(plan.h(len(x)), rel=1e-12)
        assert not model.used_fallback_

    def test_constant_response_falls_back(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(60)
        y = np.full(60, 2.0)
        model = NadarayaWatson().fit(x, y)
        assert model.used_fallback_
        assert model.coefficient_ == pytest.approx(
            fallback_coefficient(robust_scale(x), 60), rel=1e-12
        )
        grid = np.linspace(-1, 1, 5)
        np.testing.assert_allclose(model.predict(grid), 2.0, atol=1e-8)

    def test_score_is_reasonable(self, data):
        x, y = data
        assert NadarayaWatson().fit(x, y).score(x, y) > 0.3

    def test_clone_and_params(self):
        model = NadarayaWatson(bandwidth=0.5)
        assert clone(model).get_params() == model.get_params()
        model.set_params(bandwidth="plugin")
        assert model.get_params()["bandwidth"] == "plugin"

    def test_predict_before_fit(self):
        with pytest.raises(RuntimeError, match="not fitted"):
            NadarayaWatson().predict([0.0])

    def test_column_vector_accepted(self, data):
        x, y = data
        flat = NadarayaWatson(bandwidth=0.4).fit(x, y).predict(x[:5])
        column = NadarayaWatson(bandwidth=0.4).fit(x[:, None], y).predict(x[:5, None])
        np.testing.assert_array_equal(flat, column)

    def test_multicolumn_rejected(self, data):
        x, y = data
        with pytest.raises(ValueError, match="univariate"):
            NadarayaWatson().fit(np.column_stack([x, x]), y)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            NadarayaWatson().fit([0.0, np.nan], [1.0, 2.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            NadarayaWatson().fit([0.0, 1.0], [1.0])

    def test_nonpositive_bandwidth_rejected(self, data):
        x, y = data
        with pytest.raises(ValueError):
            NadarayaWatson(bandwidth=-1.0).fit(x, y)


class TestSemiRecursiveRegression:
    def test_plugin_matches_selection_pipeline(self, data):
        x, y = data
        model = SemiRecursiveRegression(stepsizes="Recursive1").fit(x, y)
        config = StepsizeConfig.recursive1()
        functionals = estimate_functionals_recursive(make_dataset(x, y), config, KERNEL)
        plan = plugin_bandwidth(functionals, config, KERNEL)
        assert model.coefficient_ == plan.coefficient
        grid = np.linspace(-2, 2, 21)
        np.testing.assert_array_equal(
            model.predict(grid),
            recursive_fit(make_dataset(x, y), config, plan.sequence(), grid, KERNEL),
        )

    def test_fixed_coefficient(self, data):
        x, y = data
        model = SemiRecursiveRegression(stepsizes="Recursive4", bandwidth=0.5).fit(x, y)
        assert model.bandwidth_sequence_ == PowerSequence(0.5, 0.2)

    def test_explicit_sequence(self, data):
        x, y = data
        seq = PowerSequence(0.4, 0.0)
        model = SemiRecursiveRegression(bandwidth=seq).fit(x, y)
        assert model.bandwidth_sequence_ is seq

    def test_explicit_config_object(self, data):
        x, y = data
        config = StepsizeConfig.recursive3()
        model = SemiRecursiveRegression(stepsizes=config, bandwidth=0.5).fit(x, y)
        assert model.config_ is config

    def test_baseline_stepsizes_rejected(self, data):
        x, y = data
        with pytest.raises(ValueError, match="recursive"):
            SemiRecursiveRegression(stepsizes="NW").fit(x, y)

    def test_streaming_state_replays_training_stream(self, data):
        x, y = data
        grid = np.linspace(-2, 2, 15)
        model = SemiRecursiveRegression(stepsizes="Recursive2", bandwidth=0.6).fit(x, y)
        state = model.streaming_state(grid)
        assert state.n == len(x)
        np.testing.assert_allclose(state.regression(), model.predict(grid), atol=1e-10)
        state.update(0.3, 1.0)
        assert state.n == len(x) + 1

    def test_streaming_state_without_replay(self, data):
        x, y = data
        model = SemiRecursiveRegression(bandwidth=0.6).fit(x, y)
        state = model.streaming_state(np.linspace(-1, 1, 5), replay=False)
        assert state.n == 0

    def test_constant_response_falls_back(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(50)
        model = SemiRecursiveRegression().fit(x, np.full(50, -1.0))
        assert model.used_fallback_

    def test_clone_round_trip(self):
        model = SemiRecursiveRegression(stepsizes="Recursive3", bandwidth=0.7)
        assert clone(model).get_params() == model.get_params()

    def test_score_is_reasonable(self, data):
        x, y = data
        assert SemiRecursiveRegression().fit(x, y).score(x, y) > 0.3
