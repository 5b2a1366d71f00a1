"""Scenario configuration: dataclasses, named presets, JSON (de)serialization.

Named presets pin the five vehicle counts (300..1500). Per-vehicle request
rates are part of the preset and are tuned so each scenario settles at its
reference operating point: two active PMs for very_low/low/medium, three for
high/very_high, with per-PM utilization near the 0.6 target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

from .domain import (Link, Switch, Topology, build_default_topology,
                     DEFAULT_LINK_CAPACITY_MBPS, DEFAULT_LINK_LATENCY_MS)
from .errors import ConfigParseError, ConfigValidationError

MODES = ("proposed", "traditional")

# name -> (vehicle_count, per-vehicle request rate [1/s], provisioned VNFs)
PRESETS = {
    "very_low": (300, 0.09660, 4),
    "low": (600, 0.04915, 6),
    "medium": (900, 0.03333, 8),
    "high": (1200, 0.02543, 10),
    "very_high": (1500, 0.03072, 12),
}


@dataclass
class ControllerConfig:
    target_load: float = 0.6
    target_temperature: float = 0.6
    kp: float = 0.5
    ki: float = 0.1
    kd: float = 0.05
    delta: float = 0.0
    theta: float = 0.0
    alpha: float = 0.2
    beta: float = 0.8
    deadband: float = 0.05
    history_window: int = 8
    load_step_size: float = 0.5
    resource_step_size: float = 0.5
    dt: float = 1.0
    integral_limit: float = 10.0
    migration_delay_s: float = 0.5


@dataclass
class TrafficConfig:
    request_rate: float = 0.03333
    duration_mean_s: float = 30.0
    cpu_demand_range: tuple = (1.08, 1.32)
    bandwidth_demand_range: tuple = (0.558, 0.682)
    vnf_count: int = 8
    vnf_cpu_demand: float = 0.5
    # start with the stationary session population instead of an empty system
    warm_start: bool = True


@dataclass
class PowerConfig:
    idle_w: float = 100.0
    peak_w: float = 250.0


@dataclass
class ScenarioConfig:
    name: str = "default"
    vehicle_count: int = 900
    duration_s: float = 600.0
    seed: int = 1
    mode: str = "proposed"
    topology: object = "default"  # "default" or a topology dict
    server_cpu_capacity: float = 1000.0
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    power: PowerConfig = field(default_factory=PowerConfig)
    output_dir: str = "out"

    def to_dict(self):
        d = asdict(self)
        d["traffic"]["cpu_demand_range"] = list(self.traffic.cpu_demand_range)
        d["traffic"]["bandwidth_demand_range"] = list(self.traffic.bandwidth_demand_range)
        return d


def preset(name, **overrides) -> ScenarioConfig:
    """Build one of the named scenario configurations."""
    if name not in PRESETS:
        raise ConfigValidationError("name", f"unknown preset {name!r}; "
                                    f"expected one of {sorted(PRESETS)}")
    vehicles, rate, vnfs = PRESETS[name]
    cfg = ScenarioConfig(name=name, vehicle_count=vehicles)
    cfg.traffic.request_rate = rate
    cfg.traffic.vnf_count = vnfs
    for key, value in overrides.items():
        if not hasattr(cfg, key):
            raise ConfigValidationError(key, "unknown scenario field")
        setattr(cfg, key, value)
    validate(cfg)
    return cfg


def _build_section(d, cls, section):
    if not isinstance(d, dict):
        raise ConfigValidationError(section, "must be an object")
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(d) - known
    if unknown:
        raise ConfigValidationError(f"{section}.{sorted(unknown)[0]}", "unknown key")
    obj = cls()
    for key, value in d.items():
        if key in ("cpu_demand_range", "bandwidth_demand_range"):
            value = tuple(value)
        setattr(obj, key, value)
    return obj


def config_from_dict(d) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigValidationError("<root>", "configuration must be a JSON object")
    d = dict(d)
    cfg = ScenarioConfig()
    simple = ("name", "vehicle_count", "duration_s", "seed", "mode",
              "topology", "server_cpu_capacity", "output_dir")
    for key in simple:
        if key in d:
            setattr(cfg, key, d.pop(key))
    if "controller" in d:
        cfg.controller = _build_section(d.pop("controller"), ControllerConfig, "controller")
    if "traffic" in d:
        cfg.traffic = _build_section(d.pop("traffic"), TrafficConfig, "traffic")
    if "power" in d:
        cfg.power = _build_section(d.pop("power"), PowerConfig, "power")
    if d:
        raise ConfigValidationError(sorted(d)[0], "unknown key")
    validate(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    """Load and validate a scenario file; an empty file yields the defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return ScenarioConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, position=exc.pos) from exc
    return config_from_dict(data)


def save_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check_fraction(value, name):
    if not 0.0 <= value <= 1.0:
        raise ConfigValidationError(name, f"must lie in [0, 1], got {value}")


def validate(cfg: ScenarioConfig) -> None:
    if cfg.vehicle_count < 0:
        raise ConfigValidationError("vehicle_count", "must be non-negative")
    if cfg.name in PRESETS and cfg.vehicle_count != PRESETS[cfg.name][0]:
        raise ConfigValidationError(
            "vehicle_count",
            f"preset {cfg.name!r} is defined with {PRESETS[cfg.name][0]} vehicles")
    if cfg.duration_s <= 0:
        raise ConfigValidationError("duration_s", "must be positive")
    if cfg.mode not in MODES:
        raise ConfigValidationError("mode", f"must be one of {MODES}")
    if cfg.server_cpu_capacity <= 0:
        raise ConfigValidationError("server_cpu_capacity", "must be positive")
    ctl = cfg.controller
    for name in ("target_load", "target_temperature", "alpha", "beta", "deadband",
                 "delta", "theta"):
        _check_fraction(getattr(ctl, name), f"controller.{name}")
    for name in ("load_step_size", "resource_step_size"):
        step = getattr(ctl, name)
        if not 0.0 < step < 2.0:
            raise ConfigValidationError(f"controller.{name}",
                                        f"step size must lie in (0, 2), got {step}")
    if not ctl.alpha < ctl.beta:
        raise ConfigValidationError("controller.alpha", "alpha must be below beta")
    if ctl.history_window < 2:
        raise ConfigValidationError("controller.history_window", "must be at least 2")
    if ctl.dt <= 0:
        raise ConfigValidationError("controller.dt", "must be positive")
    if min(ctl.kp, ctl.ki, ctl.kd) < 0:
        raise ConfigValidationError("controller.gains", "must be non-negative")
    if ctl.migration_delay_s < 0:
        raise ConfigValidationError("controller.migration_delay_s", "must be non-negative")
    tr = cfg.traffic
    if tr.request_rate < 0:
        raise ConfigValidationError("traffic.request_rate", "must be non-negative")
    if tr.duration_mean_s <= 0:
        raise ConfigValidationError("traffic.duration_mean_s", "must be positive")
    for name in ("cpu_demand_range", "bandwidth_demand_range"):
        lo, hi = getattr(tr, name)
        if lo < 0 or hi < lo:
            raise ConfigValidationError(f"traffic.{name}", "must be an ordered pair of"
                                        " non-negative values")
    if tr.vnf_count < 0:
        raise ConfigValidationError("traffic.vnf_count", "must be non-negative")
    if tr.vnf_cpu_demand <= 0:
        raise ConfigValidationError("traffic.vnf_cpu_demand", "must be positive")
    if cfg.power.idle_w < 0 or cfg.power.peak_w < cfg.power.idle_w:
        raise ConfigValidationError("power", "need 0 <= idle_w <= peak_w")
    if not isinstance(cfg.topology, (str, dict)) or \
            (isinstance(cfg.topology, str) and cfg.topology != "default"):
        raise ConfigValidationError("topology", 'must be "default" or a topology object')
    if isinstance(cfg.topology, dict):
        topology_from_dict(cfg.topology)  # raises on malformed input


def topology_from_dict(d) -> Topology:
    """Build a Topology from its config-file representation."""
    try:
        switches = [Switch(s["name"], float(s.get("capacity_mbps", 1000.0)))
                    for s in d["switches"]]
        links = [Link(int(l["id"]), l["a"], l["b"],
                      float(l.get("capacity_mbps", DEFAULT_LINK_CAPACITY_MBPS)),
                      float(l.get("latency_ms", DEFAULT_LINK_LATENCY_MS)))
                 for l in d["links"]]
        return Topology(switches, links, list(d["rsus"]), list(d["servers"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigValidationError("topology", f"malformed topology object: {exc}") from exc


def resolve_topology(cfg: ScenarioConfig) -> Topology:
    if cfg.topology == "default":
        return build_default_topology()
    return topology_from_dict(cfg.topology)
