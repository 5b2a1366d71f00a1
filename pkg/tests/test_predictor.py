"""NLMS predictor against a straight-line scalar reimplementation."""

import numpy as np
import pytest

from iovsim.predictor import NlmsPredictor


class ScalarNlmsOracle:
    """Independent list-based rewrite of the recursion, no numpy."""

    def __init__(self, window, step):
        self.window = window
        self.step = step
        self.hist = []          # newest first
        self.weights = [1.0] + [0.0] * (window - 1)

    def predict(self):
        if not self.hist:
            return 0.0
        if len(self.hist) < self.window:
            return self.hist[0]
        raw = sum(w * h for w, h in zip(self.weights, self.hist))
        return min(1.0, max(0.0, raw))

    def observe(self, sample):
        sample = min(1.0, max(0.0, sample))
        if len(self.hist) >= self.window:
            raw = sum(w * h for w, h in zip(self.weights, self.hist))
            err = sample - raw
            norm = sum(h * h for h in self.hist)
            if norm > 0:
                self.weights = [w + self.step * err * h / norm
                                for w, h in zip(self.weights, self.hist)]
        self.hist.insert(0, sample)
        del self.hist[self.window:]


class TestWarmUp:
    def test_empty_state_predicts_zero(self):
        assert NlmsPredictor(4, 0.5).predict() == 0.0

    def test_first_observation_keeps_weights(self):
        p = NlmsPredictor(4, 0.5)
        before = p.weights.copy()
        p.observe(0.5)
        assert list(p.history[:1]) == [0.5]
        assert np.array_equal(p.weights, before)

    def test_warmup_predicts_last_sample(self):
        p = NlmsPredictor(4, 0.5)
        p.observe(0.3)
        p.observe(0.7)
        assert p.predict() == 0.7

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            NlmsPredictor(window=1)
        with pytest.raises(ValueError):
            NlmsPredictor(step_size=2.0)
        with pytest.raises(ValueError):
            NlmsPredictor(step_size=0.0)


class TestConstantSignal:
    def test_identity_filter_predicts_constant(self):
        p = NlmsPredictor(4, 0.5)
        for _ in range(4):
            p.observe(0.4)
        assert p.predict() == pytest.approx(0.4, abs=1e-15)

    def test_weights_stay_identity_on_constant(self):
        p = NlmsPredictor(4, 0.5)
        for _ in range(20):
            p.observe(0.4)
        assert np.allclose(p.weights, [1, 0, 0, 0], atol=1e-15)

    def test_error_vanishes_within_5_windows_for_all_step_sizes(self):
        for zeta in (0.1, 0.5, 1.0, 1.9):
            p = NlmsPredictor(8, zeta)
            for _ in range(5 * 8):
                p.observe(0.4)
            assert abs(0.4 - p.predict()) < 1e-6


class TestWeightRecursion:
    def test_alternating_signal_matches_scalar_oracle(self):
        p = NlmsPredictor(4, 0.5)
        oracle = ScalarNlmsOracle(4, 0.5)
        signal = [0.2, 0.8] * 20
        for s in signal:
            assert p.predict() == pytest.approx(oracle.predict(), abs=1e-12)
            p.observe(s)
            oracle.observe(s)
        assert np.allclose(p.weights, oracle.weights, atol=1e-12)

    def test_random_signal_matches_scalar_oracle(self):
        rng = np.random.Generator(np.random.PCG64(7))
        p = NlmsPredictor(8, 0.9)
        oracle = ScalarNlmsOracle(8, 0.9)
        for s in rng.random(200):
            p.observe(float(s))
            oracle.observe(float(s))
        assert np.allclose(p.weights, oracle.weights, atol=1e-12)

    def test_zero_history_never_divides_by_zero(self):
        p = NlmsPredictor(4, 0.5)
        for _ in range(10):
            p.observe(0.0)
        p.observe(0.5)
        assert np.isfinite(p.weights).all()
        assert np.isfinite(p.predict())


class TestPredictionError:
    def test_exact_prediction_gives_zero_error(self):
        p = NlmsPredictor(4, 0.5)
        for _ in range(6):
            p.observe(0.4)
        assert p.prediction_error(0.4) == pytest.approx(0.0, abs=1e-15)

    def test_signed_error_definition(self):
        p = NlmsPredictor(4, 0.5)
        p.observe(0.3)  # warm-up: prediction is the last sample
        assert p.prediction_error(0.5) == pytest.approx(0.2)

    def test_error_is_stored(self):
        p = NlmsPredictor(4, 0.5)
        p.observe(0.3)
        p.prediction_error(0.5)
        assert p.last_error == pytest.approx(0.2)


class TestTrendsAndRobustness:
    def test_ramp_error_decreases_after_two_windows(self):
        p = NlmsPredictor(8, 0.5)
        errors = []
        for t in range(150):
            x = min(1.0, 0.005 * t)
            errors.append(abs(p.prediction_error(x)))
            p.observe(x)
        seg = errors[16:]
        assert all(b <= a + 1e-12 for a, b in zip(seg, seg[1:]))
        assert seg[-1] < seg[0]

    def test_beats_last_value_on_noisy_random_walk(self):
        # observed signal: slow random walk plus measurement noise, clamped
        for seed in (0, 1, 2):
            rng = np.random.Generator(np.random.PCG64(seed))
            n = 3000
            walk = np.empty(n)
            walk[0] = 0.5
            for t in range(1, n):
                walk[t] = min(1.0, max(0.0, walk[t - 1] + rng.normal(0, 0.005)))
            signal = np.clip(walk + rng.normal(0, 0.08, n), 0.0, 1.0)
            p = NlmsPredictor(8, 0.5)
            nlms_err, naive_err, prev = [], [], None
            for t, s in enumerate(signal):
                s = float(s)
                if t >= 16:
                    nlms_err.append(abs(s - p.predict()))
                    naive_err.append(abs(s - prev))
                p.observe(s)
                prev = s
            assert np.mean(nlms_err) < np.mean(naive_err)

    def test_weights_stay_finite_on_long_bounded_signal(self):
        rng = np.random.Generator(np.random.PCG64(11))
        p = NlmsPredictor(8, 1.9)
        for s in rng.random(20000):
            p.observe(float(s))
        assert np.isfinite(p.weights).all()
