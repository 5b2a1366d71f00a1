"""Flow controller: statistics, system-load prediction, PID-gated PM selection.

Each control period the controller snapshots every powered-on PM, feeds the
utilizations to per-PM NLMS predictors, averages the predictions into the
system load estimate, runs the load PID against the target load and then
places every pending request. The PID output u selects the policy: u >= delta
runs Least Connection, otherwise Least Response Time. Connection counts are
updated after each placement so a burst does not pile onto one PM.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoActivePmError
from .pid import PidController, apply_threshold_filter
from .predictor import NlmsPredictor

RESPONSE_TIME_EWMA_FACTOR = 0.3
RESPONSE_TIME_INIT_MS = 10.0


@dataclass
class PmStats:
    pm_id: int
    utilization: float
    connections: int
    response_time: float


@dataclass
class PlacementDecision:
    tick: int
    request_id: int
    chosen_pm: int | None
    policy_used: str
    u_value: float


def response_time_ewma(current, sample_ms, factor=RESPONSE_TIME_EWMA_FACTOR):
    """Fold one completed-request latency into the smoothed response time."""
    return current + factor * (sample_ms - current)


def least_connection(stats, rng=None):
    """PM with the fewest active connections; ties go to the lowest PM id.

    When `rng` is given and every PM reports zero connections (the very first
    placement of a run), the destination is drawn uniformly from the seeded
    generator instead.
    """
    if not stats:
        raise NoActivePmError("least_connection over an empty PM set")
    if rng is not None and all(s.connections == 0 for s in stats):
        return stats[int(rng.integers(len(stats)))].pm_id
    return min(stats, key=lambda s: (s.connections, s.pm_id)).pm_id


def least_response_time(stats):
    """PM with the lowest smoothed response time; ties go to the lowest PM id."""
    if not stats:
        raise NoActivePmError("least_response_time over an empty PM set")
    return min(stats, key=lambda s: (s.response_time, s.pm_id)).pm_id


def select_pm(stats, u, delta=0.0, rng=None):
    """Policy switch: u >= delta runs Least Connection, else Least Response Time."""
    if u >= delta:
        return least_connection(stats, rng)
    return least_response_time(stats)


class FlowController:
    def __init__(self, target_load=0.6, kp=0.5, ki=0.1, kd=0.05, delta=0.0,
                 window=8, step_size=0.5, dt=1.0, integral_limit=10.0, rng=None):
        self.pid = PidController(kp=kp, ki=ki, kd=kd, setpoint=target_load,
                                 dt=dt, integral_limit=integral_limit)
        self.delta = delta
        self.window = window
        self.step_size = step_size
        self.predictors = {}
        self.rng = rng
        self.last_system_load_estimate = 0.0
        self._first_pick_done = False

    def collect_statistics(self, world):
        """Snapshot of every powered-on PM, ordered by PM id."""
        return [PmStats(pm.pm_id, pm.cpu_utilization, pm.active_connections,
                        pm.response_time)
                for pm in world.pms if pm.is_on]

    def _sync_predictors(self, on_ids):
        for pm_id in on_ids:
            if pm_id not in self.predictors:
                self.predictors[pm_id] = NlmsPredictor(self.window, self.step_size)
        for pm_id in list(self.predictors):
            if pm_id not in on_ids:
                del self.predictors[pm_id]

    def estimate_system_load(self, stats):
        """Feed utilizations to the per-PM predictors; return their mean prediction."""
        if not stats:
            raise NoActivePmError("no powered-on PM to estimate")
        self._sync_predictors([s.pm_id for s in stats])
        predictions = []
        for s in stats:
            predictor = self.predictors[s.pm_id]
            predictor.observe(s.utilization)
            predictions.append(predictor.predict())
        estimate = sum(predictions) / len(predictions)
        self.last_system_load_estimate = estimate
        return estimate

    def flow_tick(self, world, pending):
        """Run one control period and place every pending request.

        Returns the list of PlacementDecision records; raises NoActivePmError
        when no PM is powered on (the engine then rejects the batch).
        """
        stats = self.collect_statistics(world)
        estimate = self.estimate_system_load(stats)
        u = self.pid.step(estimate)
        world.thresholds.load_threshold = apply_threshold_filter(
            world.thresholds.load_threshold, u)
        by_id = {s.pm_id: s for s in stats}
        decisions = []
        for request in pending:
            rng = None
            if world.tick_index == 0 and not self._first_pick_done:
                rng = self.rng
            if u >= self.delta:
                pm_id = least_connection(stats, rng)
                policy = "least_connection"
            else:
                pm_id = least_response_time(stats)
                policy = "least_response_time"
            self._first_pick_done = True
            by_id[pm_id].connections += 1
            decisions.append(PlacementDecision(world.tick_index, request.request_id,
                                               pm_id, policy, u))
        return decisions
