"""Deterministic simulator for PID-regulated software-defined multimedia IoV.

A flow controller balances vehicle sessions over multimedia servers (NLMS
load prediction plus a PID-gated switch between Least Connection and Least
Response Time), while a VNF controller regulates the system "temperature"
(normalized predicted CPU) by consolidating VNFs onto fewer servers or
expanding onto standby ones. A traditional baseline (static assignment,
spanning-tree routing, no consolidation) runs in the same engine for
comparison.
"""

from .config import PRESETS, ScenarioConfig, load_config, preset
from .domain import (FlowRequest, PhysicalMachine, Topology, ThresholdState,
                     Vnf, build_default_topology, shortest_path)
from .engine import World, baseline_assign, flow_qos, power_draw
from .flow_controller import (FlowController, least_connection,
                              least_response_time, select_pm)
from .metrics import (MetricsRecord, ScenarioSummary, balance_spread, compare,
                      mos, r_factor, summarize)
from .pid import (FirstOrderPlant, PidController, apply_threshold_filter,
                  closed_loop_settles, pid_step)
from .predictor import NlmsPredictor
from .vnf_controller import (Migrate, Plan, PowerOff, PowerOn, VnfController,
                             pm_temperature, system_temperature)

__version__ = "0.1.0"
