"""Outer time integration with optional adaptive step control.

Marches the state from t=0 to t=T through converged inner solves. The
adaptive policy reacts to the inner iteration count between steps and,
when a step fails outright, retries it at a shrunken h_t before giving
up. Only converged iterates are ever committed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .grid import SystemField
from .pdhg import CONVERGED, PdhgParams, StepTrace, pdhg_step

MAX_SHRINKS = 20


@dataclass(frozen=True)
class TimeSchedule:
    """Final time, stepsize cap, and the adaptive thresholds."""

    t_final: float
    h_t0: float
    adaptive: bool = False
    eta: float = 0.75
    n_star_hi: int = 100
    n_star_lo: int = 20

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.h_t0 <= 0:
            raise ValueError("h_t0 must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie strictly between 0 and 1")
        if not self.n_star_hi > self.n_star_lo > 0:
            raise ValueError("thresholds must satisfy n_star_hi > n_star_lo > 0")

    @property
    def h_t_min(self) -> float:
        return self.h_t0 * self.eta**MAX_SHRINKS


@dataclass
class RunReport:
    """Accepted-step history plus requested snapshots."""

    times: np.ndarray
    ht_history: np.ndarray
    pdhg_iters: np.ndarray
    snapshots: list
    wall_time: float
    final_state: SystemField
    step_traces: dict = field(default_factory=dict)
    final_residuals: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def total_steps(self) -> int:
        return len(self.times)

    @property
    def total_pdhg_iterations(self) -> int:
        return int(np.sum(self.pdhg_iters))


class StepFailure(RuntimeError):
    """A time step could not be advanced; carries the failing trace."""

    def __init__(self, message: str, trace: StepTrace, t: float, h_t: float):
        super().__init__(message)
        self.trace = trace
        self.t = t
        self.h_t = h_t


def adapt_ht(h_t: float, m_pdhg: int, schedule: TimeSchedule) -> float:
    """Between-step policy: shrink when the solver labored, grow when idle."""
    if m_pdhg > schedule.n_star_hi:
        return schedule.eta * h_t
    if m_pdhg < schedule.n_star_lo:
        enlarged = h_t / schedule.eta
        if enlarged <= schedule.h_t0:
            return enlarged
    return h_t


def retry_with_shrink(model, u_prev, h_t, schedule: TimeSchedule, params: PdhgParams):
    """Solve one step, shrinking h_t on failure; returns (u, h_t_used, trace)."""
    if not schedule.adaptive:
        raise ValueError("retry_with_shrink requires an adaptive schedule")
    floor = schedule.h_t_min
    for attempt in range(MAX_SHRINKS + 1):
        u, trace = pdhg_step(model, u_prev, h_t, params)
        if trace.outcome == CONVERGED:
            return u, h_t, trace
        shrunk = schedule.eta * h_t
        if attempt == MAX_SHRINKS or shrunk < floor * (1.0 - 1e-9):
            break
        h_t = shrunk
    raise StepFailure(
        f"step failed ({trace.outcome}) after shrink retries down to h_t={h_t:g}",
        trace,
        t=float("nan"),
        h_t=h_t,
    )


def run(
    model,
    u0: SystemField,
    schedule: TimeSchedule,
    params: PdhgParams,
    snapshot_times=(),
    observers=(),
    trace_steps=(),
) -> RunReport:
    """March from t=0 to t=T; returns the accepted-step report.

    snapshot_times are satisfied by the first accepted time at or after
    each requested time (t=0 requests use the initial state). observers
    are called as observer(step, t, state, trace) after every accepted
    step; traces of the 1-based steps listed in trace_steps are kept on
    the report.
    """
    if u0.spec != model.spec or u0.n_components != model.n_components:
        raise ValueError("initial state does not match the model's grid or size")
    t_final = schedule.t_final
    started = time.perf_counter()

    pending = sorted(snapshot_times)
    snapshots = []
    state = u0.stack()
    spec = model.spec
    if pending and pending[0] <= 0.0:
        snapshots.append((0.0, SystemField.from_stack(spec, state)))
        while pending and pending[0] <= 0.0:
            pending.pop(0)

    wanted_traces = set(trace_steps)
    kept_traces: dict[int, StepTrace] = {}
    times, ht_history, iters, final_res = [], [], [], []
    t = 0.0
    h_t = schedule.h_t0
    step = 0
    while t < t_final:
        # Land on t_final whenever the remaining interval fits in one step,
        # stretching by up to a relative 1e-6 so accumulated round-off in t
        # cannot leave a sliver step whose residual target delta * h_t is
        # below float resolution.
        remaining = t_final - t
        landing = remaining <= h_t * (1.0 + 1e-6)
        h_t_eff = remaining if landing else h_t
        if schedule.adaptive:
            try:
                state, h_t_used, trace = retry_with_shrink(
                    model, state, h_t_eff, schedule, params
                )
            except StepFailure as failure:
                failure.t = t
                raise
        else:
            state, trace = pdhg_step(model, state, h_t_eff, params)
            if trace.outcome != CONVERGED:
                raise StepFailure(
                    f"step {step + 1} at t={t:g} ended {trace.outcome} "
                    f"after {trace.iterations} iterations",
                    trace,
                    t=t,
                    h_t=h_t_eff,
                )
            h_t_used = h_t_eff
        step += 1
        t = t_final if landing and h_t_used == h_t_eff else t + h_t_used
        times.append(t)
        ht_history.append(h_t_used)
        iters.append(trace.iterations)
        final_res.append(trace.residual_norms[-1])
        if step in wanted_traces:
            kept_traces[step] = trace
        if pending and pending[0] <= t:
            snapshots.append((t, SystemField.from_stack(spec, state)))
            while pending and pending[0] <= t:
                pending.pop(0)
        for observer in observers:
            observer(step, t, state, trace)
        if schedule.adaptive:
            base = h_t_used if h_t_used < h_t_eff else h_t
            h_t = max(adapt_ht(base, trace.iterations, schedule), schedule.h_t_min)

    return RunReport(
        times=np.asarray(times),
        ht_history=np.asarray(ht_history),
        pdhg_iters=np.asarray(iters, dtype=int),
        snapshots=snapshots,
        wall_time=time.perf_counter() - started,
        final_state=SystemField.from_stack(spec, state),
        step_traces=kept_traces,
        final_residuals=np.asarray(final_res),
    )
