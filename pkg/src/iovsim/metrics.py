"""Per-tick records, QoE scoring (R-factor / MOS) and run summaries.

The R-factor uses a simplified E-model with fixed, documented coefficients
so scores are reproducible:

    R  = 93.2 - Id - Ie, clamped to [0, 100]
    Id = 0.024 * delay_ms + 0.11 * max(0, delay_ms - 177.3)
    Ie = 30 * ln(1 + 15 * loss_fraction)

MOS is the standard cubic mapping of R onto [1, 4.5].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .errors import EmptyRunError, MismatchedScenariosError, NoActivePmError


@dataclass(frozen=True)
class MetricsRecord:
    tick: int
    pm_utilization: tuple
    pm_power_w: tuple
    pm_connections: tuple
    switch_utilization: tuple
    offered: int
    served: int
    rejected: int
    lost: int
    mean_delay_ms: float
    mean_jitter_ms: float
    mean_setup_ms: float
    system_temperature: float
    on_pm_count: int
    vnf_count: int


def r_factor(delay_ms: float, loss_fraction: float) -> float:
    """Rating factor in [0, 100] for a given mouth-to-ear delay and loss."""
    i_d = 0.024 * delay_ms + 0.11 * max(0.0, delay_ms - 177.3)
    i_e = 30.0 * math.log(1.0 + 15.0 * loss_fraction)
    r = 93.2 - i_d - i_e
    return min(100.0, max(0.0, r))


def mos(r: float) -> float:
    """Mean opinion score in [1, 4.5] from an R-factor."""
    if r <= 0.0:
        return 1.0
    if r >= 100.0:
        return 4.5
    score = 1.0 + 0.035 * r + 7.0e-6 * r * (r - 60.0) * (100.0 - r)
    # the cubic dips below 1 for tiny r; scores stay inside [1, 4.5]
    return min(4.5, max(1.0, score))


def balance_spread(values) -> float:
    """max - min over the given utilizations, in the units of the inputs."""
    values = list(values)
    if not values:
        raise NoActivePmError("spread over an empty unit set")
    return max(values) - min(values)


@dataclass
class ScenarioSummary:
    name: str
    mode: str
    seed: int
    duration_s: float
    mean_pm_utilization: tuple
    mean_utilization: float
    total_energy_kwh: float
    goodput: float
    loss_rate: float
    mean_mos: float
    mean_r_factor: float
    mean_pm_spread_pp: float
    mean_switch_spread_pp: float
    offered: int
    served: int
    rejected: int
    lost: int

    def to_dict(self):
        d = asdict(self)
        d["mean_pm_utilization"] = list(self.mean_pm_utilization)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["mean_pm_utilization"] = tuple(d["mean_pm_utilization"])
        return cls(**d)


def summarize(records, name="", mode="", seed=0, dt=1.0) -> ScenarioSummary:
    """Aggregate a record stream into time-averages and run totals."""
    records = list(records)
    if not records:
        raise EmptyRunError("no records to summarize")
    n_pms = len(records[0].pm_utilization)
    pm_util_sum = [0.0] * n_pms
    energy_j = 0.0
    r_sum = 0.0
    mos_sum = 0.0
    pm_spread_sum = 0.0
    pm_spread_ticks = 0
    sw_spread_sum = 0.0
    for rec in records:
        for i in range(n_pms):
            pm_util_sum[i] += rec.pm_utilization[i]
        energy_j += sum(rec.pm_power_w) * dt
        loss_frac = rec.lost / rec.offered if rec.offered else 0.0
        r = r_factor(rec.mean_delay_ms, loss_frac)
        r_sum += r
        mos_sum += mos(r)
        on_utils = [u for u, p in zip(rec.pm_utilization, rec.pm_power_w) if p > 0.0]
        if on_utils:
            pm_spread_sum += balance_spread(on_utils) * 100.0
            pm_spread_ticks += 1
        if rec.switch_utilization:
            sw_spread_sum += balance_spread(rec.switch_utilization) * 100.0
    n = len(records)
    last = records[-1]
    offered = last.offered
    goodput = 1.0 - (last.rejected + last.lost) / offered if offered else 1.0
    return ScenarioSummary(
        name=name,
        mode=mode,
        seed=seed,
        duration_s=n * dt,
        mean_pm_utilization=tuple(s / n for s in pm_util_sum),
        mean_utilization=sum(pm_util_sum) / (n * n_pms),
        total_energy_kwh=energy_j / 3.6e6,
        goodput=goodput,
        loss_rate=last.lost / offered if offered else 0.0,
        mean_mos=mos_sum / n,
        mean_r_factor=r_sum / n,
        mean_pm_spread_pp=pm_spread_sum / pm_spread_ticks if pm_spread_ticks else 0.0,
        mean_switch_spread_pp=sw_spread_sum / n,
        offered=offered,
        served=last.served,
        rejected=last.rejected,
        lost=last.lost,
    )


@dataclass
class ComparisonReport:
    name: str
    seed: int
    candidate_mode: str
    baseline_mode: str
    energy_reduction_pct: float
    pm_spread_delta_pp: float
    switch_spread_delta_pp: float
    mos_delta: float
    goodput_delta: float

    def to_dict(self):
        return asdict(self)


def compare(candidate: ScenarioSummary, baseline: ScenarioSummary) -> ComparisonReport:
    """Deltas of a candidate run against a baseline run of the same scenario."""
    if candidate.name != baseline.name or candidate.seed != baseline.seed:
        raise MismatchedScenariosError(
            f"cannot compare {candidate.name}/seed{candidate.seed} "
            f"with {baseline.name}/seed{baseline.seed}")
    if baseline.total_energy_kwh > 0:
        reduction = 100.0 * (baseline.total_energy_kwh - candidate.total_energy_kwh) \
            / baseline.total_energy_kwh
    else:
        reduction = 0.0
    return ComparisonReport(
        name=candidate.name,
        seed=candidate.seed,
        candidate_mode=candidate.mode,
        baseline_mode=baseline.mode,
        energy_reduction_pct=reduction,
        pm_spread_delta_pp=candidate.mean_pm_spread_pp - baseline.mean_pm_spread_pp,
        switch_spread_delta_pp=candidate.mean_switch_spread_pp - baseline.mean_switch_spread_pp,
        mos_delta=candidate.mean_mos - baseline.mean_mos,
        goodput_delta=candidate.goodput - baseline.goodput,
    )


# -- CSV schema (shared with the CLI) -------------------------------------------

def csv_header(pm_names, switch_names):
    cols = ["tick"]
    cols += [f"util_{n}" for n in pm_names]
    cols += [f"power_w_{n}" for n in pm_names]
    cols += [f"connections_{n}" for n in pm_names]
    cols += [f"util_{n}" for n in switch_names]
    cols += ["offered", "served", "rejected", "lost",
             "mean_delay_ms", "mean_jitter_ms", "mean_setup_ms",
             "system_temperature", "on_pm_count", "vnf_count"]
    return cols


def record_to_row(rec: MetricsRecord):
    row = [str(rec.tick)]
    row += [repr(v) for v in rec.pm_utilization]
    row += [repr(v) for v in rec.pm_power_w]
    row += [str(v) for v in rec.pm_connections]
    row += [repr(v) for v in rec.switch_utilization]
    row += [str(rec.offered), str(rec.served), str(rec.rejected), str(rec.lost),
            repr(rec.mean_delay_ms), repr(rec.mean_jitter_ms), repr(rec.mean_setup_ms),
            repr(rec.system_temperature), str(rec.on_pm_count), str(rec.vnf_count)]
    return row
