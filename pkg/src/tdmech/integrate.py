"""Fixed-step Runge-Kutta integration and the sampled-trajectory container.

The integrator is the classical fourth-order scheme with a constant step.
No structure preservation is claimed; accuracy comes from the small step
sizes used by the callers and is covered by the conservation checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError, IntegrationBlowup

#: Slack added before flooring a span/step quotient, so spans that are an
#: exact multiple of the step in real arithmetic stay exact in floats.
_STEP_SLACK = 1e-9


def step_count(t0: float, t_end: float, dt: float) -> int:
    """Number of full steps of size ``dt`` from ``t0`` towards ``t_end``."""
    if dt <= 0.0:
        raise InputError(f"step size must be positive, got {dt}")
    if t_end <= t0:
        raise InputError(f"t_end={t_end} must lie after t0={t0}")
    return int(np.floor((t_end - t0) / dt + _STEP_SLACK))


def _stage(state: np.ndarray, t: float) -> np.ndarray:
    # A non-finite intermediate means the current step already diverged;
    # report the step start as the last good time.
    if not np.all(np.isfinite(state)):
        raise IntegrationBlowup(float(t))
    return state


def _rk4_step(rhs: Callable, t: float, state: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, _stage(state + 0.5 * dt * k1, t))
    k3 = rhs(t + 0.5 * dt, _stage(state + 0.5 * dt * k2, t))
    k4 = rhs(t + dt, _stage(state + dt * k3, t))
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_path(
    rhs: Callable, t0: float, state0: np.ndarray, dt: float, n_steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate and record every sample; times are ``t0 + k*dt`` exactly."""
    state = np.asarray(state0, dtype=float)
    times = t0 + dt * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, state.size))
    states[0] = state
    for k in range(n_steps):
        state = _rk4_step(rhs, times[k], state, dt)
        if not np.all(np.isfinite(state)):
            raise IntegrationBlowup(float(times[k]))
        states[k + 1] = state
    return times, states


def rk4_to(rhs: Callable, t: float, state0: np.ndarray, t_target: float, dt: float) -> np.ndarray:
    """Integrate to an exact target time, in either direction.

    Full signed steps of magnitude ``dt`` are followed by one remainder step
    that lands on ``t_target``.
    """
    if dt <= 0.0:
        raise InputError(f"step size must be positive, got {dt}")
    state = np.asarray(state0, dtype=float)
    span = t_target - t
    if span == 0.0:
        return state
    direction = 1.0 if span > 0 else -1.0
    step = direction * dt
    n_full = int(np.floor(abs(span) / dt + _STEP_SLACK))
    for k in range(n_full):
        state = _rk4_step(rhs, t + k * step, state, step)
        if not np.all(np.isfinite(state)):
            raise IntegrationBlowup(t + k * step)
    t_reached = t + n_full * step
    remainder = t_target - t_reached
    if abs(remainder) > 1e-14 * max(1.0, abs(t_target)):
        state = _rk4_step(rhs, t_reached, state, remainder)
        if not np.all(np.isfinite(state)):
            raise IntegrationBlowup(t_reached)
    return state


def difference_quotients(values: np.ndarray, dt: float) -> np.ndarray:
    """Second-order time derivatives of uniformly sampled rows.

    Centered differences inside, one-sided three-point stencils at the two
    ends, so every sample gets an O(dt^2) rate.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
        return difference_quotients(v, dt)[:, 0]
    if v.shape[0] < 3:
        raise InputError("difference quotients need at least three samples")
    if dt <= 0.0:
        raise InputError(f"step size must be positive, got {dt}")
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dt)
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled solution curve.

    ``kind`` is ``"phase"`` for samples ``(y, p)`` or ``"jet"`` for samples
    ``(y, v)``; ``states`` holds one sample per row with the two blocks
    concatenated.
    """

    kind: str
    times: np.ndarray
    states: np.ndarray
    dt: float

    def __post_init__(self):
        if self.kind not in ("phase", "jet"):
            raise InputError(f"unknown trajectory kind {self.kind!r}")
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise InputError("trajectory needs one state row per sample time")
        if states.shape[1] % 2 != 0:
            raise InputError("trajectory state rows must hold two equal blocks")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(states))):
            raise InputError("trajectory samples must be finite")
        if times.size >= 2:
            gaps = np.diff(times)
            if np.any(gaps <= 0.0):
                raise InputError("sample times must increase strictly")
            if np.max(np.abs(gaps - self.dt)) > 1e-12:
                raise InputError("sample times must be uniform in the step size")

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    @property
    def n_samples(self) -> int:
        return self.times.size

    def first_block(self) -> np.ndarray:
        return self.states[:, : self.n]

    def second_block(self) -> np.ndarray:
        return self.states[:, self.n :]
