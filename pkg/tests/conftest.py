"""Shared helpers: a lightweight world stub for controller-level tests."""

import pytest

from iovsim.domain import (PhysicalMachine, ThresholdState, Vnf,
                           POWER_OFF, POWER_ON)


class StubWorld:
    """Just enough world surface for the controllers: PMs, VNFs, demands."""

    def __init__(self, pms, vnfs=(), flow_demand=None, tick_index=1):
        self.pms = list(pms)
        self.vnfs = list(vnfs)
        self.thresholds = ThresholdState()
        self.tick_index = tick_index
        self.flow_demand = dict(flow_demand or {})
        self._pm = {pm.pm_id: pm for pm in self.pms}
        self._vnf = {v.vnf_id: v for v in self.vnfs}

    def pm_by_id(self, pm_id):
        return self._pm[pm_id]

    def vnf_by_id(self, vnf_id):
        return self._vnf[vnf_id]

    def on_pm_ids(self):
        return [pm.pm_id for pm in self.pms if pm.is_on]

    def vnf_demand_on(self, pm_id):
        return sum(self._vnf[v].cpu_demand for v in self._pm[pm_id].hosted_vnfs)

    def flow_demand_on(self, pm_id):
        return self.flow_demand.get(pm_id, 0.0)

    def total_demand_on(self, pm_id):
        return self.vnf_demand_on(pm_id) + self.flow_demand_on(pm_id)

    def has_pending_transitions(self):
        return False


def make_pm(pm_id, utilization=0.0, connections=0, response_time=10.0,
            capacity=1000.0, on=True, vnf_ids=()):
    return PhysicalMachine(
        pm_id=pm_id, name=f"M{pm_id + 1}", cpu_capacity=capacity,
        power_state=POWER_ON if on else POWER_OFF,
        hosted_vnfs=list(vnf_ids), active_connections=connections,
        response_time=response_time, cpu_utilization=utilization)


def make_vnf(vnf_id, host, demand=10.0):
    return Vnf(vnf_id=vnf_id, cpu_demand=demand, host=host)


def apply_plan_to_stub(world, plan):
    """Engine-equivalent plan application for invariant checks."""
    from iovsim.vnf_controller import Migrate, PowerOff, PowerOn

    for action in plan.actions:
        if isinstance(action, PowerOn):
            world.pm_by_id(action.pm).power_state = POWER_ON
        elif isinstance(action, Migrate):
            vnf = world.vnf_by_id(action.vnf)
            src = world.pm_by_id(action.src)
            dst = world.pm_by_id(action.dst)
            src.hosted_vnfs.remove(action.vnf)
            dst.hosted_vnfs.append(action.vnf)
            vnf.host = action.dst
        elif isinstance(action, PowerOff):
            pm = world.pm_by_id(action.pm)
            pm.power_state = POWER_OFF
            # engine evacuates flows alongside the power-off
            world.flow_demand[action.pm] = 0.0


@pytest.fixture
def two_pm_world():
    pms = [make_pm(0, utilization=0.4), make_pm(1, utilization=0.4)]
    return StubWorld(pms)
