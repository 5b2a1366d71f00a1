"""One-step-ahead NLMS predictor for per-PM utilization signals.

The same filter serves both controller paths: the flow controller feeds it
per-PM workload samples, the VNF controller per-PM CPU samples. History is
kept newest-first; the filter weights are updated with the normalized LMS
recursion using the previous history vector and the previous prediction
error. Weight updates use the unclamped filter output; the published
prediction is clamped to [0, 1] because it estimates a utilization.
"""

from __future__ import annotations

import numpy as np


def _clamp01(x):
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


class NlmsPredictor:
    """Adaptive filter over the last `window` samples.

    Until `window` samples have been observed the predictor is warming up and
    simply repeats the latest sample (0 when empty). Weights start as
    [1, 0, ..., 0], i.e. a pure last-value predictor, which makes warm-up
    behaviour continuous and keeps constant signals exact.
    """

    def __init__(self, window: int = 8, step_size: float = 0.5):
        if window < 2:
            raise ValueError("window must be at least 2")
        if not 0.0 < step_size < 2.0:
            raise ValueError("step size must lie in the open interval (0, 2)")
        self.window = int(window)
        self.step_size = float(step_size)
        self.history = np.zeros(self.window)   # newest first
        self.weights = np.zeros(self.window)
        self.weights[0] = 1.0
        self.count = 0
        self.last_error = 0.0

    @property
    def warmed_up(self) -> bool:
        return self.count >= self.window

    def predict(self) -> float:
        """Predicted next sample, clamped to [0, 1]."""
        if self.count == 0:
            return 0.0
        if not self.warmed_up:
            return float(self.history[0])
        return _clamp01(float(np.dot(self.weights, self.history)))

    def prediction_error(self, actual: float) -> float:
        """Signed error between a measured sample and the current prediction."""
        actual = _clamp01(float(actual))
        err = actual - self.predict()
        self.last_error = err
        return err

    def observe(self, sample: float) -> None:
        """Push a sample; once warm, update weights with the NLMS recursion."""
        sample = _clamp01(float(sample))
        if self.warmed_up:
            err = sample - float(np.dot(self.weights, self.history))
            norm = float(np.dot(self.history, self.history))
            if norm > 0.0:   # all-zero history: leave weights untouched
                self.weights = self.weights + (self.step_size * err / norm) * self.history
            self.last_error = err
        self.history[1:] = self.history[:-1]
        self.history[0] = sample
        if self.count < self.window:
            self.count += 1
