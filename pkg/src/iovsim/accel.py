"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The engine's per-tick service step (load accumulation and per-flow delay)
and the batch NLMS runner dominate runtime. Each kernel has two
implementations that compute the same quantities; the active backend is
chosen at import time. Set IOVSIM_NO_NUMBA=1 to force the numpy path
(debugging, or the benchmark baseline).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:   # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


def _flag_disabled() -> bool:
    return os.environ.get("IOVSIM_NO_NUMBA", "0").strip().lower() in ("1", "true", "yes")


USE_NUMBA = NUMBA_AVAILABLE and not _flag_disabled()


# -- load accumulation --------------------------------------------------------

def accumulate_loads_np(pm_idx, pair_idx, cpu, bw, n_pms, n_pairs):
    cpu_by_pm = np.bincount(pm_idx, weights=cpu, minlength=n_pms)
    bw_by_pair = np.bincount(pair_idx, weights=bw, minlength=n_pairs)
    return cpu_by_pm, bw_by_pair


@njit(cache=True)
def _accumulate_loads_jit(pm_idx, pair_idx, cpu, bw, n_pms, n_pairs):
    cpu_by_pm = np.zeros(n_pms)
    bw_by_pair = np.zeros(n_pairs)
    for i in range(pm_idx.shape[0]):
        cpu_by_pm[pm_idx[i]] += cpu[i]
        bw_by_pair[pair_idx[i]] += bw[i]
    return cpu_by_pm, bw_by_pair


def accumulate_loads_numba(pm_idx, pair_idx, cpu, bw, n_pms, n_pairs):
    return _accumulate_loads_jit(pm_idx, pair_idx, cpu, bw, n_pms, n_pairs)


# -- per-flow delay and jitter -------------------------------------------------

def flow_delays_np(pair_idx, pm_idx, prev_delay, is_new, path_latency_ms, pm_delay_ms):
    delay = path_latency_ms[pair_idx] + pm_delay_ms[pm_idx]
    jitter = np.abs(delay - prev_delay)
    jitter[is_new] = 0.0
    return delay, jitter


@njit(cache=True)
def _flow_delays_jit(pair_idx, pm_idx, prev_delay, is_new, path_latency_ms, pm_delay_ms):
    n = pair_idx.shape[0]
    delay = np.empty(n)
    jitter = np.empty(n)
    for i in range(n):
        d = path_latency_ms[pair_idx[i]] + pm_delay_ms[pm_idx[i]]
        delay[i] = d
        jitter[i] = 0.0 if is_new[i] else abs(d - prev_delay[i])
    return delay, jitter


def flow_delays_numba(pair_idx, pm_idx, prev_delay, is_new, path_latency_ms, pm_delay_ms):
    return _flow_delays_jit(pair_idx, pm_idx, prev_delay, is_new, path_latency_ms, pm_delay_ms)


# -- batch NLMS ----------------------------------------------------------------
# Runs the one-step-ahead predictor over a whole signal: err[t] is the error
# of the prediction made before sample t arrived. Semantics mirror
# predictor.NlmsPredictor fed sample-by-sample from an empty state.

def nlms_run_np(signal, window, step_size):
    signal = np.clip(np.asarray(signal, dtype=np.float64), 0.0, 1.0)
    hist = np.zeros(window)
    weights = np.zeros(window)
    weights[0] = 1.0
    errors = np.empty(signal.shape[0])
    count = 0
    for t in range(signal.shape[0]):
        s = signal[t]
        if count == 0:
            pred = 0.0
        elif count < window:
            pred = hist[0]
        else:
            pred = min(1.0, max(0.0, float(np.dot(weights, hist))))
        errors[t] = s - pred
        if count >= window:
            raw = s - float(np.dot(weights, hist))
            norm = float(np.dot(hist, hist))
            if norm > 0.0:
                weights = weights + (step_size * raw / norm) * hist
        hist[1:] = hist[:-1]
        hist[0] = s
        if count < window:
            count += 1
    return errors


@njit(cache=True)
def _nlms_run_jit(signal, window, step_size):
    n = signal.shape[0]
    hist = np.zeros(window)
    weights = np.zeros(window)
    weights[0] = 1.0
    errors = np.empty(n)
    count = 0
    for t in range(n):
        s = signal[t]
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
        if count == 0:
            pred = 0.0
        elif count < window:
            pred = hist[0]
        else:
            pred = 0.0
            for k in range(window):
                pred += weights[k] * hist[k]
            if pred < 0.0:
                pred = 0.0
            elif pred > 1.0:
                pred = 1.0
        errors[t] = s - pred
        if count >= window:
            raw_pred = 0.0
            norm = 0.0
            for k in range(window):
                raw_pred += weights[k] * hist[k]
                norm += hist[k] * hist[k]
            if norm > 0.0:
                scale = step_size * (s - raw_pred) / norm
                for k in range(window):
                    weights[k] += scale * hist[k]
        for k in range(window - 1, 0, -1):
            hist[k] = hist[k - 1]
        hist[0] = s
        if count < window:
            count += 1
    return errors


def nlms_run_numba(signal, window, step_size):
    return _nlms_run_jit(np.ascontiguousarray(signal, dtype=np.float64), window, step_size)


# -- backend selection ---------------------------------------------------------

if USE_NUMBA:
    accumulate_loads = accumulate_loads_numba
    flow_delays = flow_delays_numba
    nlms_run = nlms_run_numba
else:
    accumulate_loads = accumulate_loads_np
    flow_delays = flow_delays_np
    nlms_run = nlms_run_np


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
