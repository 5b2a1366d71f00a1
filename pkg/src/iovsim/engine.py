"""Fixed-step discrete-event engine: traffic, request lifecycle, service model.

Tick order (dt seconds per tick): matured transitions are applied (completed
VNF migrations, deferred power-offs with flow evacuation), new requests are
generated and placed (flow controller in proposed mode, static hash in
traditional mode), the VNF controller plans and the engine applies power and
migration actions (proposed mode only), then the service step computes
per-PM demand, per-link and per-switch loads, overload backlog, losses,
per-flow delay/jitter and completions, and finally one MetricsRecord is
emitted. Identical (config, seed) runs produce identical record streams.

Active flows live in a structure-of-arrays table so the service step stays
vectorized; the hot pieces run through iovsim.accel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import accel
from .config import ScenarioConfig, resolve_topology
from .domain import (FlowRequest, PhysicalMachine, ThresholdState, Vnf, Migration,
                     POWER_OFF, POWER_ON, path_nodes, shortest_path,
                     spanning_tree_links, tree_path)
from .errors import NoActivePmError
from .flow_controller import (FlowController, PlacementDecision,
                              RESPONSE_TIME_INIT_MS, response_time_ewma)
from .metrics import MetricsRecord
from .vnf_controller import Migrate, Plan, PowerOff, PowerOn, VnfController, pm_temperature

MODE_PROPOSED = "proposed"
MODE_TRADITIONAL = "traditional"

# arena status codes
ACTIVE = 1
COMPLETED = 2
REJECTED = 3
LOST = 4

# service model constants
QUEUE_DELAY_MS = 5.0          # d0 in the PM queueing term d0*u/(1-u+eps)
QUEUE_EPS = 0.01
BACKLOG_BOUND_S = 2.0         # seconds of capacity a PM may queue before shedding


def power_draw(pm: PhysicalMachine, idle_w=100.0, peak_w=250.0) -> float:
    """Electrical draw of one PM: zero when off, linear in utilization when on."""
    if not pm.is_on:
        return 0.0
    return idle_w + (peak_w - idle_w) * pm.cpu_utilization


def baseline_assign(world, request: FlowRequest) -> int:
    """Traditional mode placement: static assignment by vehicle-id hash."""
    return world.pms[request.vehicle_id % len(world.pms)].pm_id


@dataclass
class QosSample:
    delay_ms: float
    jitter_ms: float
    setup_ms: float
    lost: bool


class FlowTable:
    """Structure-of-arrays store for accepted flows (one row per request)."""

    def __init__(self, capacity=1024):
        self.n = 0
        self._alloc(capacity)

    def _alloc(self, capacity):
        self.vehicle = np.zeros(capacity, dtype=np.int64)
        self.rsu = np.zeros(capacity, dtype=np.int64)
        self.pm = np.zeros(capacity, dtype=np.int64)
        self.pair = np.zeros(capacity, dtype=np.int64)
        self.arrival = np.zeros(capacity, dtype=np.float64)
        self.end_time = np.zeros(capacity, dtype=np.float64)
        self.cpu = np.zeros(capacity, dtype=np.float64)
        self.bw = np.zeros(capacity, dtype=np.float64)
        self.prev_delay = np.zeros(capacity, dtype=np.float64)
        self.assign_tick = np.zeros(capacity, dtype=np.int64)
        self.status = np.zeros(capacity, dtype=np.int8)

    _ARRAYS = ("vehicle", "rsu", "pm", "pair", "arrival", "end_time",
               "cpu", "bw", "prev_delay", "assign_tick", "status")

    def _grow(self, need):
        capacity = len(self.status)
        while capacity < need:
            capacity *= 2
        for name in self._ARRAYS:
            old = getattr(self, name)
            new = np.zeros(capacity, dtype=old.dtype)
            new[:self.n] = old[:self.n]
            setattr(self, name, new)

    def append(self, vehicle, rsu, pm, pair, arrival, end_time, cpu, bw, tick):
        if self.n + 1 > len(self.status):
            self._grow(self.n + 1)
        i = self.n
        self.vehicle[i] = vehicle
        self.rsu[i] = rsu
        self.pm[i] = pm
        self.pair[i] = pair
        self.arrival[i] = arrival
        self.end_time[i] = end_time
        self.cpu[i] = cpu
        self.bw[i] = bw
        self.prev_delay[i] = 0.0
        self.assign_tick[i] = tick
        self.status[i] = ACTIVE
        self.n += 1
        return i

    def active_indices(self):
        return np.nonzero(self.status[:self.n] == ACTIVE)[0]


class TrafficModel:
    """Per-vehicle Poisson session arrivals with exponential durations."""

    def __init__(self, vehicle_count, request_rate, duration_mean_s,
                 cpu_range, bw_range, n_rsus):
        self.vehicle_count = vehicle_count
        self.request_rate = request_rate
        self.duration_mean_s = duration_mean_s
        self.cpu_range = cpu_range
        self.bw_range = bw_range
        # vehicle-to-RSU attachment is fixed at spawn, uniform across RSUs
        self.rsu_of_vehicle = np.arange(vehicle_count, dtype=np.int64) % max(n_rsus, 1)

    def _make_requests(self, vehicles, offsets, durations, cpu, bw, t0, id_start):
        order = np.argsort(offsets, kind="stable")
        requests = []
        for k, j in enumerate(order):
            v = int(vehicles[j])
            requests.append(FlowRequest(
                request_id=id_start + k,
                vehicle_id=v,
                rsu=int(self.rsu_of_vehicle[v]),
                arrival_time=t0 + float(offsets[j]),
                duration=float(durations[j]),
                cpu_demand=float(cpu[j]),
                bandwidth_demand=float(bw[j]),
            ))
        return requests

    def initial_sessions(self, rng, id_start):
        """Stationary session population at t=0.

        Session counts per vehicle follow the steady-state Poisson law of the
        arrival process; residual durations are exponential by memorylessness,
        so the run starts statistically in equilibrium instead of ramping up
        from an empty system.
        """
        if self.vehicle_count == 0 or self.request_rate == 0.0:
            return []
        mean_sessions = self.request_rate * self.duration_mean_s
        counts = rng.poisson(mean_sessions, size=self.vehicle_count)
        total = int(counts.sum())
        if total == 0:
            return []
        vehicles = np.repeat(np.arange(self.vehicle_count), counts)
        offsets = np.zeros(total)
        durations = np.maximum(rng.exponential(self.duration_mean_s, total), 1e-3)
        cpu = rng.uniform(self.cpu_range[0], self.cpu_range[1], total)
        bw = rng.uniform(self.bw_range[0], self.bw_range[1], total)
        return self._make_requests(vehicles, offsets, durations, cpu, bw,
                                   0.0, id_start)

    def generate(self, tick_index, dt, rng, id_start):
        if self.vehicle_count == 0 or self.request_rate == 0.0:
            return []
        counts = rng.poisson(self.request_rate * dt, size=self.vehicle_count)
        total = int(counts.sum())
        if total == 0:
            return []
        vehicles = np.repeat(np.arange(self.vehicle_count), counts)
        offsets = rng.random(total) * dt
        durations = np.maximum(rng.exponential(self.duration_mean_s, total), 1e-3)
        cpu = rng.uniform(self.cpu_range[0], self.cpu_range[1], total)
        bw = rng.uniform(self.bw_range[0], self.bw_range[1], total)
        return self._make_requests(vehicles, offsets, durations, cpu, bw,
                                   tick_index * dt, id_start)


class World:
    """Full simulation state plus the per-tick step logic."""

    def __init__(self, config: ScenarioConfig, topology=None):
        self.config = config
        self.mode = config.mode
        self.dt = config.controller.dt
        self.topology = topology if topology is not None else resolve_topology(config)
        seeds = np.random.SeedSequence(config.seed).spawn(3)
        self.traffic_rng = np.random.Generator(np.random.PCG64(seeds[0]))
        self.control_rng = np.random.Generator(np.random.PCG64(seeds[1]))
        self.event_rng = np.random.Generator(np.random.PCG64(seeds[2]))

        self.pms = [PhysicalMachine(i, name, config.server_cpu_capacity)
                    for i, name in enumerate(self.topology.servers)]
        self._pm_by_id = {pm.pm_id: pm for pm in self.pms}
        # the adaptive mode provisions on demand: the highest-id PM starts as
        # powered-down standby; the traditional baseline keeps everything on
        if self.mode == MODE_PROPOSED and len(self.pms) > 1:
            self.pms[-1].power_state = POWER_OFF
        hosts = [pm.pm_id for pm in self.pms if pm.is_on]
        self.vnfs = [Vnf(i, config.traffic.vnf_cpu_demand,
                         host=hosts[i % len(hosts)])
                     for i in range(config.traffic.vnf_count)]
        for vnf in self.vnfs:
            self._pm_by_id[vnf.host].hosted_vnfs.append(vnf.vnf_id)
        self._vnf_by_id = {v.vnf_id: v for v in self.vnfs}
        self._initial_vnf_count = len(self.vnfs)

        self.thresholds = ThresholdState()
        self.flows = FlowTable()
        self.traffic = TrafficModel(
            config.vehicle_count, config.traffic.request_rate,
            config.traffic.duration_mean_s, config.traffic.cpu_demand_range,
            config.traffic.bandwidth_demand_range, len(self.topology.rsus))

        self.clock = 0.0
        self.tick_index = 0
        self.offered = 0
        self.served = 0
        self.rejected = 0
        self.lost = 0
        self.backlog = np.zeros(len(self.pms))
        self.deferred_off = []
        self.decision_log = []
        self.plan_log = []
        self.warnings = []
        self._next_request_id = 0

        self._build_paths()

        ctl = config.controller
        if self.mode == MODE_PROPOSED:
            self.flow_controller = FlowController(
                target_load=ctl.target_load, kp=ctl.kp, ki=ctl.ki, kd=ctl.kd,
                delta=ctl.delta, window=ctl.history_window,
                step_size=ctl.load_step_size, dt=ctl.dt,
                integral_limit=ctl.integral_limit, rng=self.control_rng)
            self.vnf_controller = VnfController(
                target_temperature=ctl.target_temperature, kp=ctl.kp, ki=ctl.ki,
                kd=ctl.kd, theta=ctl.theta, alpha=ctl.alpha, beta=ctl.beta,
                deadband=ctl.deadband, window=ctl.history_window,
                step_size=ctl.resource_step_size, dt=ctl.dt,
                integral_limit=ctl.integral_limit)
        else:
            self.flow_controller = None
            self.vnf_controller = None

    # -- helpers used by the controllers ------------------------------------

    def pm_by_id(self, pm_id) -> PhysicalMachine:
        return self._pm_by_id[pm_id]

    def vnf_by_id(self, vnf_id) -> Vnf:
        return self._vnf_by_id[vnf_id]

    def on_pm_ids(self):
        return [pm.pm_id for pm in self.pms if pm.is_on]

    def vnf_demand_on(self, pm_id) -> float:
        return sum(self._vnf_by_id[v].cpu_demand
                   for v in self._pm_by_id[pm_id].hosted_vnfs)

    def flow_demand_on(self, pm_id) -> float:
        ft = self.flows
        act = ft.active_indices()
        if act.size == 0:
            return 0.0
        return float(ft.cpu[act[ft.pm[act] == pm_id]].sum())

    def total_demand_on(self, pm_id) -> float:
        return self.vnf_demand_on(pm_id) + self.flow_demand_on(pm_id)

    def has_pending_transitions(self) -> bool:
        return bool(self.deferred_off) or any(v.migrating for v in self.vnfs)

    # -- routing tables -------------------------------------------------------

    def _build_paths(self):
        topo = self.topology
        n_rsus = len(topo.rsus)
        n_servers = len(topo.servers)
        self.n_pairs = n_rsus * n_servers
        switch_index = {s.name: i for i, s in enumerate(topo.switches)}
        link_index = {l.link_id: i for i, l in enumerate(topo.links)}
        self.link_capacity = np.array([l.capacity_mbps for l in topo.links])
        self.switch_capacity = np.array([s.forwarding_capacity_mbps
                                         for s in topo.switches])
        self.path_latency = np.zeros(self.n_pairs)
        self.pair_links = []
        self.link_incidence = np.zeros((len(topo.links), self.n_pairs))
        self.switch_incidence = np.zeros((len(topo.switches), self.n_pairs))
        tree = spanning_tree_links(topo) if self.mode == MODE_TRADITIONAL else None
        for r, rsu in enumerate(topo.rsus):
            for s, server in enumerate(topo.servers):
                pair = r * n_servers + s
                if self.mode == MODE_TRADITIONAL:
                    links = tree_path(topo, tree, rsu, server)
                else:
                    links = shortest_path(topo, rsu, server)
                self.pair_links.append(tuple(links))
                self.path_latency[pair] = sum(topo.link_by_id[l].latency_ms
                                              for l in links)
                for l in links:
                    self.link_incidence[link_index[l], pair] = 1.0
                for node in path_nodes(topo, rsu, links)[1:-1]:
                    if node in switch_index:
                        self.switch_incidence[switch_index[node], pair] = 1.0

    def path_for(self, rsu_idx, server_idx):
        return list(self.pair_links[rsu_idx * len(self.topology.servers) + server_idx])

    # -- placement ------------------------------------------------------------

    def _accept(self, request, pm_id):
        request.assigned_pm = pm_id
        request.path = self.path_for(request.rsu, pm_id)
        request.status = "active"
        pair = request.rsu * len(self.topology.servers) + pm_id
        self.flows.append(request.vehicle_id, request.rsu, pm_id, pair,
                          request.arrival_time,
                          request.arrival_time + request.duration,
                          request.cpu_demand, request.bandwidth_demand,
                          self.tick_index)
        self._pm_by_id[pm_id].active_connections += 1

    def _reject(self, request):
        request.status = "rejected"
        self.rejected += 1

    def _place_requests(self, requests):
        if not requests:
            if self.mode == MODE_PROPOSED and self.on_pm_ids():
                # the controller still advances its PID and predictors
                self.flow_controller.flow_tick(self, [])
            return
        if self.mode == MODE_TRADITIONAL:
            for request in requests:
                pm_id = baseline_assign(self, request)
                self._accept(request, pm_id)
                self.decision_log.append(PlacementDecision(
                    self.tick_index, request.request_id, pm_id, "static_hash", 0.0))
            return
        try:
            decisions = self.flow_controller.flow_tick(self, requests)
        except NoActivePmError:
            for request in requests:
                self._reject(request)
                self.decision_log.append(PlacementDecision(
                    self.tick_index, request.request_id, None, "rejected", 0.0))
            return
        by_id = {r.request_id: r for r in requests}
        for decision in decisions:
            request = by_id[decision.request_id]
            if decision.chosen_pm is None:
                self._reject(request)
            else:
                self._accept(request, decision.chosen_pm)
            self.decision_log.append(decision)

    # -- plan application -------------------------------------------------------

    def _apply_plan(self, plan: Plan):
        if plan is None:
            return
        if plan.warning:
            self.warnings.append((self.tick_index, plan.warning))
        for action in plan.actions:
            if isinstance(action, PowerOn):
                pm = self._pm_by_id[action.pm]
                pm.power_state = POWER_ON
                pm.response_time = RESPONSE_TIME_INIT_MS
                pm.cpu_utilization = 0.0
                self.backlog[action.pm] = 0.0
                entry = {"action": "power_on", "vnf": None,
                         "src": None, "dst": action.pm}
            elif isinstance(action, Migrate):
                vnf = self._vnf_by_id[action.vnf]
                vnf.migration = Migration(
                    action.dst, self.clock + self.config.controller.migration_delay_s)
                entry = {"action": "migrate", "vnf": action.vnf,
                         "src": action.src, "dst": action.dst}
            elif isinstance(action, PowerOff):
                if action.pm not in self.deferred_off:
                    self.deferred_off.append(action.pm)
                entry = {"action": "power_off", "vnf": None,
                         "src": action.pm, "dst": None}
            else:
                continue
            entry.update(tick=self.tick_index, w_value=plan.w_value,
                         system_temp=plan.system_temperature)
            self.plan_log.append(entry)

    def _apply_matured_transitions(self):
        for vnf in self.vnfs:
            if vnf.migration and vnf.migration.completes_at <= self.clock + 1e-9:
                src = self._pm_by_id[vnf.host]
                dst = self._pm_by_id[vnf.migration.dest]
                src.hosted_vnfs.remove(vnf.vnf_id)
                dst.hosted_vnfs.append(vnf.vnf_id)
                dst.hosted_vnfs.sort()
                vnf.host = dst.pm_id
                vnf.migration = None
        if not self.deferred_off:
            return
        still = []
        for pm_id in self.deferred_off:
            pm = self._pm_by_id[pm_id]
            if pm.hosted_vnfs:
                still.append(pm_id)   # migrations not finished yet
                continue
            self._evacuate_flows(pm_id)
            pm.power_state = POWER_OFF
            pm.cpu_utilization = 0.0
            pm.active_connections = 0
            pm.response_time = RESPONSE_TIME_INIT_MS
            self.backlog[pm_id] = 0.0
        self.deferred_off = still

    def _evacuate_flows(self, pm_id):
        """Live-migrate a dying PM's flows to the least-connection survivors."""
        ft = self.flows
        rows = ft.active_indices()
        rows = rows[ft.pm[rows] == pm_id]
        if rows.size == 0:
            return
        survivors = [pm for pm in self.pms if pm.is_on and pm.pm_id != pm_id]
        n_servers = len(self.topology.servers)
        for row in rows:
            if not survivors:
                ft.status[row] = LOST
                self.lost += 1
                continue
            target = min(survivors, key=lambda p: (p.active_connections, p.pm_id))
            ft.pm[row] = target.pm_id
            ft.pair[row] = ft.rsu[row] * n_servers + target.pm_id
            target.active_connections += 1
        self._pm_by_id[pm_id].active_connections = 0

    # -- service model -----------------------------------------------------------

    def _mark_lost(self, row):
        self.flows.status[row] = LOST
        self.lost += 1
        self._pm_by_id[int(self.flows.pm[row])].active_connections -= 1

    def _service_step(self) -> MetricsRecord:
        cfg = self.config
        ft = self.flows
        n_pms = len(self.pms)
        t_next = self.clock + self.dt
        capacity = np.array([pm.cpu_capacity for pm in self.pms])
        on_mask = np.array([pm.is_on for pm in self.pms])

        vnf_demand = np.zeros(n_pms)
        for vnf in self.vnfs:
            vnf_demand[vnf.host] += vnf.cpu_demand

        act = ft.active_indices()
        if act.size:
            cpu_by_pm, bw_by_pair = accel.accumulate_loads(
                ft.pm[act], ft.pair[act], ft.cpu[act], ft.bw[act],
                n_pms, self.n_pairs)
        else:
            cpu_by_pm = np.zeros(n_pms)
            bw_by_pair = np.zeros(self.n_pairs)
        demand = cpu_by_pm + vnf_demand

        # overload backlog, shedding beyond the queue bound
        shed = False
        for pm in self.pms:
            i = pm.pm_id
            if not pm.is_on:
                self.backlog[i] = 0.0
                continue
            self.backlog[i] = max(0.0, self.backlog[i]
                                  + (demand[i] - capacity[i]) * self.dt)
            bound = BACKLOG_BOUND_S * capacity[i]
            if self.backlog[i] > bound:
                rows = act[ft.pm[act] == i]
                rows = rows[ft.status[rows] == ACTIVE]
                need = demand[i] - capacity[i]
                if rows.size and need > 0:
                    for k in self.event_rng.permutation(rows.size):
                        if need <= 0:
                            break
                        row = rows[k]
                        self._mark_lost(row)
                        need -= ft.cpu[row]
                        demand[i] -= ft.cpu[row]
                        shed = True
                self.backlog[i] = bound
        if shed:
            act = ft.active_indices()
            if act.size:
                _, bw_by_pair = accel.accumulate_loads(
                    ft.pm[act], ft.pair[act], ft.cpu[act], ft.bw[act],
                    n_pms, self.n_pairs)
            else:
                bw_by_pair = np.zeros(self.n_pairs)

        utilization = np.where(on_mask & (capacity > 0),
                               np.minimum(1.0, demand / capacity), 0.0)
        for pm in self.pms:
            pm.cpu_utilization = float(utilization[pm.pm_id])
            pm.overload_backlog = float(self.backlog[pm.pm_id]
                                        / max(pm.cpu_capacity, 1e-12))

        # link loss: flows on an over-capacity link are shed with probability
        # equal to the excess fraction (aggregate loss tracks the excess share)
        link_load = self.link_incidence @ bw_by_pair
        with np.errstate(divide="ignore", invalid="ignore"):
            link_excess = np.where(link_load > self.link_capacity,
                                   1.0 - self.link_capacity / link_load, 0.0)
        if link_excess.any() and act.size:
            pair_risk = (self.link_incidence * link_excess[:, None]).max(axis=0)
            risk = pair_risk[ft.pair[act]]
            exposed = act[risk > 0]
            if exposed.size:
                draws = self.event_rng.random(exposed.size)
                for row in exposed[draws < risk[risk > 0]]:
                    self._mark_lost(row)
                act = ft.active_indices()

        switch_load = self.switch_incidence @ bw_by_pair
        switch_util = np.minimum(1.0, switch_load / self.switch_capacity)

        # per-flow delay and jitter
        pm_delay_ms = QUEUE_DELAY_MS * utilization / (1.0 - utilization + QUEUE_EPS) \
            + 1000.0 * self.backlog / np.maximum(capacity, 1e-12)
        mean_delay = 0.0
        mean_jitter = 0.0
        mean_setup = 0.0
        if act.size:
            is_new = ft.assign_tick[act] == self.tick_index
            delay, jitter = accel.flow_delays(
                ft.pair[act], ft.pm[act], ft.prev_delay[act], is_new,
                self.path_latency, pm_delay_ms)
            ft.prev_delay[act] = delay
            mean_delay = float(delay.mean())
            mean_jitter = float(jitter.mean())
            if is_new.any():
                mean_setup = float(delay[is_new].mean()) + 1000.0 * self.dt

        # completions retire and feed the smoothed response times
        if act.size:
            done = act[ft.end_time[act] <= t_next + 1e-9]
            for row in done:
                pm = self._pm_by_id[int(ft.pm[row])]
                pm.response_time = response_time_ewma(pm.response_time,
                                                      float(ft.prev_delay[row]))
                pm.active_connections -= 1
                ft.status[row] = COMPLETED
                self.served += 1

        on_pms = [pm for pm in self.pms if pm.is_on]
        ctl = cfg.controller
        if on_pms:
            system_temp = sum(pm_temperature(pm.cpu_utilization, ctl.alpha, ctl.beta)
                              for pm in on_pms) / len(on_pms)
        else:
            system_temp = 0.0

        return MetricsRecord(
            tick=self.tick_index,
            pm_utilization=tuple(float(pm.cpu_utilization) for pm in self.pms),
            pm_power_w=tuple(power_draw(pm, cfg.power.idle_w, cfg.power.peak_w)
                             for pm in self.pms),
            pm_connections=tuple(pm.active_connections for pm in self.pms),
            switch_utilization=tuple(float(u) for u in switch_util),
            offered=self.offered,
            served=self.served,
            rejected=self.rejected,
            lost=self.lost,
            mean_delay_ms=mean_delay,
            mean_jitter_ms=mean_jitter,
            mean_setup_ms=mean_setup,
            system_temperature=system_temp,
            on_pm_count=len(on_pms),
            vnf_count=len(self.vnfs),
        )

    # -- stepping -------------------------------------------------------------------

    def tick(self) -> MetricsRecord:
        self._apply_matured_transitions()
        requests = []
        if self.tick_index == 0 and self.config.traffic.warm_start:
            requests = self.traffic.initial_sessions(self.traffic_rng,
                                                     self._next_request_id)
            self._next_request_id += len(requests)
        fresh = self.traffic.generate(self.tick_index, self.dt,
                                      self.traffic_rng, self._next_request_id)
        self._next_request_id += len(fresh)
        requests += fresh
        self.offered += len(requests)
        self._place_requests(requests)
        if self.mode == MODE_PROPOSED:
            try:
                plan = self.vnf_controller.vnf_tick(self)
            except NoActivePmError:
                plan = None
            self._apply_plan(plan)
        record = self._service_step()
        self._check_invariants()
        self.tick_index += 1
        self.clock += self.dt
        return record

    def run(self, ticks=None):
        if ticks is None:
            ticks = int(round(self.config.duration_s / self.dt))
        return [self.tick() for _ in range(ticks)]

    def _check_invariants(self):
        assert len(self.vnfs) == self._initial_vnf_count, "VNF count not conserved"
        for vnf in self.vnfs:
            host = self._pm_by_id[vnf.host]
            assert host.is_on or host.pm_id in self.deferred_off, \
                f"VNF {vnf.vnf_id} hosted on powered-off PM {host.name}"

    # conservation counter, exposed for tests: offered = served + rejected
    # + lost + in-flight
    def in_flight(self) -> int:
        return int((self.flows.status[:self.flows.n] == ACTIVE).sum())


def flow_qos(world: World, row: int) -> QosSample:
    """QoS sample of one accepted flow against the current world state.

    delay = path latency + the serving PM's queueing term; jitter compares
    with the flow's previous delay (zero on its first tick); setup adds the
    one-tick placement latency; lost reports the loss condition (PM backlog
    beyond its bound, or an over-capacity link on the path).
    """
    ft = world.flows
    pm = world.pm_by_id(int(ft.pm[row]))
    u = pm.cpu_utilization
    queue_ms = QUEUE_DELAY_MS * u / (1.0 - u + QUEUE_EPS) \
        + 1000.0 * world.backlog[pm.pm_id] / max(pm.cpu_capacity, 1e-12)
    delay = float(world.path_latency[int(ft.pair[row])]) + queue_ms
    is_new = ft.assign_tick[row] == world.tick_index
    jitter = 0.0 if is_new else abs(delay - float(ft.prev_delay[row]))
    setup = delay + 1000.0 * world.dt

    act = ft.active_indices()
    if act.size:
        _, bw_by_pair = accel.accumulate_loads(
            ft.pm[act], ft.pair[act], ft.cpu[act], ft.bw[act],
            len(world.pms), world.n_pairs)
    else:
        bw_by_pair = np.zeros(world.n_pairs)
    link_load = world.link_incidence @ bw_by_pair
    over = link_load > world.link_capacity
    links_over = {world.topology.links[i].link_id for i in np.nonzero(over)[0]}
    on_over_link = bool(links_over.intersection(
        world.pair_links[int(ft.pair[row])]))
    backlog_over = world.backlog[pm.pm_id] > BACKLOG_BOUND_S * pm.cpu_capacity - 1e-9 \
        and world.backlog[pm.pm_id] > 0
    lost = bool(on_over_link or (ft.status[row] == LOST) or backlog_over)
    return QosSample(delay, jitter, setup, lost)
