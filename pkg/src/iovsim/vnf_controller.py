"""VNF controller: CPU prediction, temperature regulation, consolidation plans.

Per control period the controller predicts each powered-on PM's CPU, maps the
predictions to temperatures (0 below alpha, 1 above beta, linear between),
averages them into the system temperature and regulates it toward the target
with a PID. The temperature error runs measurement-minus-target, so a
positive output w means the system is too hot: w >= theta triggers the
expansion plan (power PMs on), anything colder triggers consolidation
(migrate VNFs away from the least-loaded half and power it off).

Consolidation is capacity checked twice per destination: the plain VNF-demand
fit (sum of hosted VNF demands <= cpu_capacity) and a projected-utilization
ceiling derived from the temperature target, because the powered-off PM's
flows are evacuated to the survivors as well. A source PM whose VNFs cannot
all be placed stays on and contributes no actions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NoActivePmError, NothingToDoError
from .pid import PidController, apply_threshold_filter
from .predictor import NlmsPredictor


@dataclass(frozen=True)
class PowerOn:
    pm: int


@dataclass(frozen=True)
class PowerOff:
    pm: int


@dataclass(frozen=True)
class Migrate:
    vnf: int
    src: int
    dst: int


@dataclass
class Plan:
    actions: list = field(default_factory=list)
    w_value: float = 0.0
    system_temperature: float = 0.0
    warning: str | None = None

    @property
    def empty(self):
        return not self.actions


def pm_temperature(x_hat, alpha=0.2, beta=0.8):
    """Piecewise-linear temperature of one PM from its predicted CPU."""
    if x_hat < alpha:
        return 0.0
    if x_hat > beta:
        return 1.0
    return (x_hat - alpha) / (beta - alpha)


def system_temperature(temps):
    """Mean temperature over the active PMs."""
    temps = list(temps)
    if not temps:
        raise NoActivePmError("system temperature of zero active PMs")
    return sum(temps) / len(temps)


class VnfController:
    def __init__(self, target_temperature=0.6, kp=0.5, ki=0.1, kd=0.05,
                 theta=0.0, alpha=0.2, beta=0.8, deadband=0.05,
                 window=8, step_size=0.5, dt=1.0, integral_limit=10.0,
                 consolidation_ceiling=None):
        self.pid = PidController(kp=kp, ki=ki, kd=kd, setpoint=target_temperature,
                                 dt=dt, integral_limit=integral_limit)
        self.theta = theta
        self.alpha = alpha
        self.beta = beta
        self.deadband = deadband
        self.window = window
        self.step_size = step_size
        self.predictors = {}
        # Survivors may not be pushed past the temperature band's hot edge,
        # otherwise consolidation and expansion chase each other forever.
        if consolidation_ceiling is None:
            consolidation_ceiling = alpha + (beta - alpha) * (target_temperature + deadband)
        self.consolidation_ceiling = consolidation_ceiling

    @property
    def target_temperature(self):
        return self.pid.setpoint

    def _sync_predictors(self, on_ids):
        for pm_id in on_ids:
            if pm_id not in self.predictors:
                self.predictors[pm_id] = NlmsPredictor(self.window, self.step_size)
        for pm_id in list(self.predictors):
            if pm_id not in on_ids:
                del self.predictors[pm_id]

    def predict_cpu(self, world):
        """Predicted CPU per powered-on PM, keyed by PM id."""
        on = [pm for pm in world.pms if pm.is_on]
        if not on:
            raise NoActivePmError("no powered-on PM to predict")
        self._sync_predictors([pm.pm_id for pm in on])
        predicted = {}
        for pm in on:
            predictor = self.predictors[pm.pm_id]
            predictor.observe(pm.cpu_utilization)
            predicted[pm.pm_id] = predictor.predict()
        return predicted

    def vnf_tick(self, world):
        """One control period: returns the migration/power plan to apply."""
        predicted = self.predict_cpu(world)
        temps = [pm_temperature(predicted[pm_id], self.alpha, self.beta)
                 for pm_id in sorted(predicted)]
        delta = system_temperature(temps)
        # measurement-minus-target error: positive w means overheated
        w = -self.pid.step(delta)
        world.thresholds.temperature_threshold = apply_threshold_filter(
            world.thresholds.temperature_threshold, w)
        if any(not p.warmed_up for p in self.predictors.values()):
            return Plan([], w, delta, warning="predictors warming up")
        if world.has_pending_transitions():
            return Plan([], w, delta, warning="transitions in flight")
        if abs(delta - self.target_temperature) <= self.deadband:
            return Plan([], w, delta)
        if w >= self.theta:
            return self.temperature_reduction_plan(world, predicted, w, delta)
        try:
            return self.temperature_increase_plan(world, predicted, w, delta)
        except NothingToDoError:
            return Plan([], w, delta, warning="nothing to consolidate")

    def temperature_increase_plan(self, world, predicted, w=0.0, delta=0.0):
        """Consolidate: power off the coldest half, migrating their VNFs first."""
        on = sorted(pm.pm_id for pm in world.pms if pm.is_on)
        n = len(on)
        if n < 2:
            raise NothingToDoError("consolidation needs at least two active PMs")
        # equal predictions favour keeping the lowest-id PMs running
        by_cold = sorted(on, key=lambda pm_id: (predicted.get(pm_id, 0.0), -pm_id))
        sources = by_cold[:n // 2]
        survivors = [pm_id for pm_id in on if pm_id not in sources]
        # fill destinations from the highest-id survivor downward
        dest_order = sorted(survivors, reverse=True)
        vnf_budget = {pm_id: world.pm_by_id(pm_id).cpu_capacity
                      - world.vnf_demand_on(pm_id) for pm_id in survivors}
        thermal_budget = {pm_id: self.consolidation_ceiling
                          * world.pm_by_id(pm_id).cpu_capacity
                          - world.total_demand_on(pm_id) for pm_id in survivors}
        survivor_capacity = sum(world.pm_by_id(p).cpu_capacity for p in survivors)
        survivor_demand = sum(world.total_demand_on(p) for p in survivors)
        actions = []
        for src in sources:
            src_pm = world.pm_by_id(src)
            src_total = world.total_demand_on(src)
            # all demand on the source (VNFs and evacuated flows) lands on the
            # survivors; skip the source when they cannot absorb it
            if survivor_demand + src_total > self.consolidation_ceiling * survivor_capacity:
                continue
            placements = []
            trial_vnf = dict(vnf_budget)
            trial_thermal = dict(thermal_budget)
            feasible = True
            for vnf_id in sorted(src_pm.hosted_vnfs):
                demand = world.vnf_by_id(vnf_id).cpu_demand
                placed = False
                for dst in dest_order:
                    if trial_vnf[dst] >= demand and trial_thermal[dst] >= demand:
                        trial_vnf[dst] -= demand
                        trial_thermal[dst] -= demand
                        placements.append(Migrate(vnf_id, src, dst))
                        placed = True
                        break
                if not placed:
                    feasible = False
                    break
            if not feasible:
                continue   # all-or-nothing per source: PM stays on
            vnf_budget = trial_vnf
            thermal_budget = trial_thermal
            survivor_demand += src_total
            actions.extend(placements)
            actions.append(PowerOff(src))
        return Plan(actions, w, delta)

    def temperature_reduction_plan(self, world, predicted, w=0.0, delta=0.0):
        """Expand: power standby PMs on and seed each with half a hot PM's VNFs."""
        on = sorted(pm.pm_id for pm in world.pms if pm.is_on)
        standby = sorted(pm.pm_id for pm in world.pms if not pm.is_on)
        n = len(on)
        wanted = math.ceil(n / 2)
        by_hot = sorted(on, key=lambda pm_id: (-predicted.get(pm_id, 0.0), pm_id))
        actions = []
        warning = None
        for i in range(wanted):
            if not standby:
                warning = "no standby PM"
                break
            new_pm = standby.pop(0)
            actions.append(PowerOn(new_pm))
            donor = world.pm_by_id(by_hot[i % len(by_hot)])
            hosted = sorted(donor.hosted_vnfs,
                            key=lambda v: (-world.vnf_by_id(v).cpu_demand, v))
            for vnf_id in hosted[:len(hosted) // 2]:
                actions.append(Migrate(vnf_id, donor.pm_id, new_pm))
        return Plan(actions, w, delta, warning=warning)
