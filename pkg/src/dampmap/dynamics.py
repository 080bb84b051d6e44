"""Equations of motion for the six frames and the adaptive integrator.

Every frame is integrated as a first-order system in (q1, q2, v1, v2).  The
regularized (sextic oscillator) flow is augmented with the physical clock
dt/dtau = r/c, and the Bohlin chain with dt/dtau = 4|omega|^2.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import conserved
from .errors import (
    CollisionSingularity,
    EventHit,
    FrameMismatch,
    IntegrationError,
    InvalidParams,
    StepCollapse,
)
from .model import Frame, PhysParams, State, Trajectory, omega_tilde

_METHODS = ("RK45", "DOP853")


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    initial_step: Optional[float] = None
    r_min_event: float = 1e-6
    dense_output: bool = True
    method: str = "DOP853"
    n_samples: Optional[int] = None

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InvalidParams(f"{name} must lie in (0, 1), got {v!r}")
        if self.r_min_event < 0:
            raise InvalidParams("r_min_event must be >= 0")
        if self.method not in _METHODS:
            raise InvalidParams(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.n_samples is not None and self.n_samples < 2:
            raise InvalidParams("n_samples must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)

    def tightened(self, factor: float) -> "IntegratorConfig":
        return IntegratorConfig(**{**asdict(self), "rel_tol": self.rel_tol * factor,
                                   "abs_tol": self.abs_tol * factor})


def _accel(frame: Frame, params: PhysParams, s: float, y) -> tuple:
    x1, x2, v1, v2 = y[0], y[1], y[2], y[3]
    m, k, lam = params.m, params.k, params.lam
    if frame.is_kepler:
        r2 = x1 * x1 + x2 * x2
        if r2 == 0.0:
            raise CollisionSingularity(f"r = 0 in {frame.slug}")
        inv_r3 = 1.0 / (r2 * math.sqrt(r2))
    if frame is Frame.DAMPED_KEPLER:
        g = (k / m) * math.exp(-1.5 * lam * s) * inv_r3
        return -lam * v1 - g * x1, -lam * v2 - g * x2
    if frame is Frame.TRANSFORMED_KEPLER:
        a = lam * lam / 4.0 - (k / m) * inv_r3
        return a * x1, a * x2
    if frame is Frame.BOHLIN_KEPLER:
        a = -(k / m) * inv_r3
        return a * x1, a * x2
    if frame is Frame.SEXTIC_OSC:
        if params.cal_E is None:
            raise InvalidParams("sextic-osc frame needs params.cal_E")
        c2 = params.c**2
        r = params.gamma * (x1 * x1 + x2 * x2)
        a = -(params.cal_E / (2.0 * m * c2) - 3.0 * lam * lam * r * r / (16.0 * c2))
        return a * x1, a * x2
    if frame is Frame.DAMPED_HO:
        w2 = params.Omega**2
        return -lam * v1 - w2 * x1, -lam * v2 - w2 * x2
    if frame is Frame.SHIFTED_HO:
        w2 = omega_tilde(params) ** 2
        return -w2 * x1, -w2 * x2
    raise ValueError(f"unhandled frame {frame}")


def rhs(frame: Frame, params: PhysParams, state: State) -> tuple:
    """Acceleration pair for ``state`` in ``frame``."""
    return _accel(frame, params, state.s, (state.q1, state.q2, state.v1, state.v2))


def _vector_field(frame, params, clock: Optional[Callable] = None):
    if frame is Frame.SHIFTED_HO:
        w2 = omega_tilde(params) ** 2  # validate once, outside the hot loop

        def f(s, y):
            out = [y[2], y[3], -w2 * y[0], -w2 * y[1]]
            if clock is not None:
                out.append(clock(s, y))
            return out
        return f

    def f(s, y):
        a1, a2 = _accel(frame, params, s, y)
        out = [y[2], y[3], a1, a2]
        if clock is not None:
            out.append(clock(s, y))
        return out
    return f


def _solve(fun, span, y0, cfg: IntegratorConfig, events=None, t_eval=None):
    kw = dict(method=cfg.method, rtol=cfg.rel_tol, atol=cfg.abs_tol,
              dense_output=cfg.dense_output, events=events, t_eval=t_eval)
    if math.isfinite(cfg.max_step):
        kw["max_step"] = cfg.max_step
    if cfg.initial_step is not None:
        kw["first_step"] = cfg.initial_step
    return solve_ivp(fun, (float(span[0]), float(span[1])), np.asarray(y0, dtype=float), **kw)


def _stats(sol) -> dict:
    ts = sol.sol.ts if sol.sol is not None else sol.t
    steps = np.diff(ts)
    return {
        "method": None,
        "nfev": int(sol.nfev),
        "n_steps": int(len(steps)),
        "min_step": float(steps.min()) if len(steps) else 0.0,
        "max_step": float(steps.max()) if len(steps) else 0.0,
        "status": int(sol.status),
    }


def _make_traj(frame, params, s, y4, dense, stats) -> Trajectory:
    diag = conserved.diagnostics(frame, params, s, y4)
    return Trajectory(frame=frame, params=params, s=np.asarray(s), y=np.asarray(y4),
                      diagnostics=diag, dense=dense, stats=stats)


def _sample_times(span, cfg: IntegratorConfig):
    if cfg.n_samples is None:
        return None
    return np.linspace(span[0], span[1], cfg.n_samples)


def _finish(frame, params, sol, cfg):
    stats = _stats(sol)
    stats["method"] = cfg.method
    if sol.status == -1:
        msg = sol.message
        partial = None
        if len(sol.t) > 1:
            partial = _make_traj(frame, params, sol.t, sol.y[:4].T, sol.sol, stats)
        if "step size" in msg.lower():
            raise StepCollapse(msg, s=float(sol.t[-1]), trajectory=partial)
        raise IntegrationError(msg, trajectory=partial)
    return stats


def integrate(
    frame: Frame,
    params: PhysParams,
    state0: State,
    span: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate ``frame``'s flow from ``state0`` over ``span``.

    Kepler-type frames stop with :class:`EventHit` when r reaches
    ``cfg.r_min_event``.
    """
    if state0.frame is not frame:
        raise FrameMismatch(f"state is in {state0.frame.slug}, expected {frame.slug}")
    if not span[1] > span[0]:
        raise InvalidParams("span must be increasing")
    fun = _vector_field(frame, params)
    events = None
    if frame.is_kepler and cfg.r_min_event > 0:
        r_min = cfg.r_min_event

        def near_collision(s, y):
            return math.hypot(y[0], y[1]) - r_min
        near_collision.terminal = True
        near_collision.direction = -1
        events = [near_collision]
    sol = _solve(fun, span, state0.as_array(), cfg, events=events,
                 t_eval=_sample_times(span, cfg))
    stats = _finish(frame, params, sol, cfg)
    if sol.status == 1:
        s_ev = float(sol.t_events[0][0])
        y_ev = sol.y_events[0][0]
        s = np.append(sol.t, s_ev) if sol.t[-1] < s_ev else sol.t
        y = np.vstack([sol.y.T, y_ev]) if sol.t[-1] < s_ev else sol.y.T
        partial = _make_traj(frame, params, s, y, sol.sol, stats)
        raise EventHit(f"r reached r_min={cfg.r_min_event} at {frame.time_var}={s_ev!r}",
                       s=s_ev, state=y_ev, r_min=cfg.r_min_event, trajectory=partial)
    return _make_traj(frame, params, sol.t, sol.y.T, sol.sol, stats)


@dataclass(frozen=True, eq=False)
class ClockedRun:
    """A trajectory integrated together with a physical clock t(s)."""

    trajectory: Trajectory
    t: np.ndarray

    def __iter__(self):
        return iter((self.trajectory, self.t))


def integrate_clocked(
    frame: Frame,
    params: PhysParams,
    state0: State,
    span: Sequence[float],
    cfg: IntegratorConfig,
    clock: Callable,
    t0: float = 0.0,
    t_stop: Optional[float] = None,
) -> ClockedRun:
    """Integrate ``frame`` jointly with dt/ds = clock(s, y).

    When ``t_stop`` is given the run ends as soon as the clock reaches it.
    The trajectory's ``dense`` attribute returns all five components.
    """
    if state0.frame is not frame:
        raise FrameMismatch(f"state is in {state0.frame.slug}, expected {frame.slug}")
    fun = _vector_field(frame, params, clock)
    events = None
    if t_stop is not None:
        def reached(s, y):
            return y[4] - t_stop
        reached.terminal = True
        reached.direction = 1
        events = [reached]
    y0 = np.append(state0.as_array(), t0)
    sol = _solve(fun, span, y0, cfg, events=events, t_eval=_sample_times(span, cfg))
    stats = _finish(frame, params, sol, cfg)
    s, y = sol.t, sol.y.T
    if sol.status == 1 and len(sol.t_events[0]) and sol.t[-1] < sol.t_events[0][0]:
        s = np.append(s, sol.t_events[0][0])
        y = np.vstack([y, sol.y_events[0][0]])
    traj = _make_traj(frame, params, s, y[:, :4], sol.sol, stats)
    return ClockedRun(traj, y[:, 4].copy())


def integrate_regularized(
    params: PhysParams,
    u_state0: State,
    tau_span: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
    t0: float = 0.0,
    t_stop: Optional[float] = None,
) -> ClockedRun:
    """Sextic-oscillator flow in fictitious time with dt/dtau = r/c, r = gamma|U|^2."""
    if params.cal_E is None:
        raise InvalidParams("integrate_regularized needs params.cal_E")
    g_over_c = params.gamma / params.c

    def clock(s, y):
        return g_over_c * (y[0] * y[0] + y[1] * y[1])

    return integrate_clocked(Frame.SEXTIC_OSC, params, u_state0, tau_span, cfg, clock,
                             t0=t0, t_stop=t_stop)
