"""Discrete-time PID regulator and the [0.2, 0.8] threshold filter.

One PidController instance drives the load threshold, another the
temperature threshold. Discretization: rectangular integral, backward
difference derivative on the error, derivative zero on the first step.
The integral is clamped to +/- integral_limit because the downstream
threshold actuator saturates at 0.2/0.8 (anti-windup).
"""

from __future__ import annotations

from dataclasses import dataclass, field

THRESHOLD_MIN = 0.2
THRESHOLD_MAX = 0.8


@dataclass
class PidController:
    kp: float = 0.5
    ki: float = 0.1
    kd: float = 0.05
    setpoint: float = 0.6
    dt: float = 1.0
    integral_limit: float = 10.0
    integral: float = 0.0
    prev_error: float = 0.0
    last_output: float = 0.0
    _primed: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("gains must be non-negative")

    def step(self, measurement: float) -> float:
        """Advance one control period and return the control output."""
        error = self.setpoint - measurement
        self.integral += error * self.dt
        if self.integral > self.integral_limit:
            self.integral = self.integral_limit
        elif self.integral < -self.integral_limit:
            self.integral = -self.integral_limit
        derivative = 0.0 if not self._primed else (error - self.prev_error) / self.dt
        output = self.kp * error + self.ki * self.integral + self.kd * derivative
        self.prev_error = error
        self.last_output = output
        self._primed = True
        return output


def pid_step(controller: PidController, measurement: float) -> float:
    return controller.step(measurement)


def apply_threshold_filter(threshold: float, control: float,
                           lo: float = THRESHOLD_MIN, hi: float = THRESHOLD_MAX) -> float:
    """Move a threshold by the control output, clamped into [lo, hi]."""
    moved = threshold + control
    return lo if moved < lo else (hi if moved > hi else moved)


class FirstOrderPlant:
    """Test plant x' = (u - x) / tau, integrated with forward Euler."""

    def __init__(self, tau: float = 5.0, x0: float = 0.0, dt: float = 1.0):
        self.tau = tau
        self.x = x0
        self.dt = dt

    def update(self, u: float) -> float:
        self.x += self.dt * (u - self.x) / self.tau
        return self.x


def closed_loop_settles(plant: FirstOrderPlant, controller: PidController,
                        steps: int = 200, band: float = 0.02, hold: int = 20) -> bool:
    """True when the closed loop ends inside the +/-band for the last `hold` steps."""
    trace = []
    for _ in range(steps):
        u = controller.step(plant.x)
        trace.append(plant.update(u))
    return all(abs(x - controller.setpoint) < band for x in trace[-hold:])
