"""Bohmian trajectory integration.

Relativistic trajectories are integral curves of dx^mu/ds = j^mu/(2 m |psi|^2)
parameterized by the auxiliary scalar s; nonrelativistic ones follow
dx/dt = grad(S)/m in coordinate time.  Integration uses an adaptive
embedded Runge-Kutta 4(5) pair (scipy's Dormand-Prince stepper driven
manually) with events -- hyperplane crossings, turning points, node
proximity -- located on the dense output and refined to tolerance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .errors import NodeAbort as NodeAbortError, NodeProximity, StepLimitExceeded
from .relativistic import FourVector


class Termination(enum.Enum):
    REACHED_PARAM_LIMIT = "ReachedParamLimit"
    REACHED_HYPERPLANE = "ReachedHyperplane"
    NODE_ABORT = "NodeAbort"
    STEP_LIMIT_EXCEEDED = "StepLimitExceeded"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tolerance: float = 1e-9
    abs_tolerance: float = 1e-11
    max_steps: int = 10**6
    crossing_tolerance: float = 1e-10

    def __post_init__(self):
        if min(self.rel_tolerance, self.abs_tolerance, self.crossing_tolerance) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class Event:
    kind: str  # "hyperplane_crossing" | "turning_point" | "node_proximity"
    param: float
    coords: np.ndarray
    level: float | None = None
    direction: int = 0  # sign of d(coord time)/d(param) at a crossing


@dataclass(frozen=True)
class TrajectoryPoint:
    param: float
    coords: np.ndarray
    velocity: np.ndarray
    speed_ratio: float = np.nan  # |dx/dt| in units of c, relativistic only


@dataclass
class Trajectory:
    kind: str  # "rel" | "nonrel" | "two_particle"
    points: list
    events: list
    termination: Termination
    start: np.ndarray = dc_field(default=None)

    @property
    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    @property
    def coords(self) -> np.ndarray:
        return np.stack([p.coords for p in self.points])

    @property
    def end(self) -> np.ndarray:
        return self.points[-1].coords


class _EventSpec:
    """Scalar event function g(param, y); roots are located on dense output."""

    def __init__(self, kind, g, *, level=None, direction=0, terminal=False):
        self.kind = kind
        self.g = g
        self.level = level
        self.direction = direction  # for crossings: required sign of dg/dparam
        self.terminal = terminal


def _refine_root(g, lo, hi, xtol):
    a, b = (lo, hi) if lo < hi else (hi, lo)
    return brentq(g, a, b, xtol=xtol)


def _drive(rhs, y0, span, config, events, kind, param_eval=None):
    """Adaptive RK45 loop with event search on each accepted step.

    ``rhs(param, y)`` may raise :class:`NodeProximity`, which terminates
    the trajectory with a node-abort flag.  ``events`` is a list of
    :class:`_EventSpec`; a terminal event truncates the trajectory at the
    refined root.
    """
    s0, s1 = span
    y0 = np.asarray(y0, dtype=float)
    recorded = []
    found_events = []

    def point_at(s, y):
        try:
            v, extra = rhs(s, y), None
        except NodeProximity:
            return TrajectoryPoint(s, np.asarray(y, float), np.full_like(y, np.nan))
        return _make_point(kind, s, np.asarray(y, float), np.asarray(v, float))

    try:
        v_start = rhs(s0, y0)
    except NodeProximity as exc:
        raise NodeAbortError(f"start point is at a node: {exc}") from exc

    recorded.append(_make_point(kind, s0, y0, np.asarray(v_start, float)))
    eval_queue = list(param_eval) if param_eval is not None else None
    if eval_queue is not None:
        # first requested sample may coincide with the start
        while eval_queue and abs(eval_queue[0] - s0) <= 1e-300:
            eval_queue.pop(0)

    solver = RK45(lambda s, y: np.asarray(rhs(s, y), float), s0, y0, s1,
                  rtol=config.rel_tolerance, atol=config.abs_tolerance)
    g_prev = [ev.g(s0, y0) for ev in events]
    termination = Termination.REACHED_PARAM_LIMIT
    steps = 0

    while solver.status == "running":
        if steps >= config.max_steps:
            termination = Termination.STEP_LIMIT_EXCEEDED
            break
        try:
            solver.step()
        except NodeProximity:
            found_events.append(Event("node_proximity", recorded[-1].param,
                                      recorded[-1].coords))
            termination = Termination.NODE_ABORT
            break
        steps += 1
        dense = solver.dense_output()
        s_old, s_new = dense.t_old, dense.t
        stop_at = None

        for i, ev in enumerate(events):
            g_new = ev.g(s_new, solver.y)
            if g_prev[i] == 0.0 or g_prev[i] * g_new < 0.0:
                def gd(s, _ev=ev):
                    return _ev.g(s, dense(s))
                if g_prev[i] == 0.0:
                    g_prev[i] = g_new
                    continue
                s_root = _refine_root(gd, s_old, s_new, config.crossing_tolerance)
                slope = np.sign(g_new - g_prev[i]) * np.sign(s_new - s_old)
                if ev.direction == 0 or slope == ev.direction:
                    y_root = dense(s_root)
                    found_events.append(Event(ev.kind, s_root, np.asarray(y_root, float),
                                              level=ev.level, direction=int(slope)))
                    if ev.terminal and (stop_at is None
                                        or abs(s_root - s_old) < abs(stop_at - s_old)):
                        stop_at = s_root
            g_prev[i] = g_new

        s_stop = stop_at if stop_at is not None else s_new
        if eval_queue is not None:
            while eval_queue and (eval_queue[0] - s_old) * (s_new - s_old) >= 0 \
                    and abs(eval_queue[0] - s_old) <= abs(s_stop - s_old):
                s_q = eval_queue.pop(0)
                recorded.append(point_at(s_q, dense(s_q)))
        if stop_at is not None:
            # drop events past the truncation point
            found_events = [e for e in found_events
                            if abs(e.param - s0) <= abs(stop_at - s0) + config.crossing_tolerance]
            recorded.append(point_at(stop_at, dense(stop_at)))
            termination = Termination.REACHED_HYPERPLANE
            break
        if eval_queue is None:
            recorded.append(point_at(s_new, solver.y))
    else:
        if solver.status == "failed":
            termination = Termination.STEP_LIMIT_EXCEEDED
        elif recorded[-1].param != solver.t:
            recorded.append(point_at(solver.t, solver.y))

    found_events.sort(key=lambda e: abs(e.param - s0))
    traj = Trajectory(kind=kind, points=recorded, events=found_events,
                      termination=termination, start=y0)
    return traj


def _make_point(kind, s, y, v):
    if kind == "rel":
        ratio = _speed_ratio(v[0], v[1:])
    elif kind == "two_particle":
        ratio = np.nan
    else:
        ratio = np.nan
    return TrajectoryPoint(float(s), y, v, ratio)


def _speed_ratio(v0, vspace):
    if abs(v0) < 1e-300:
        return np.inf
    return float(np.linalg.norm(vspace) / abs(v0))


# -- velocity fields ----------------------------------------------------


def velocity_rel(relfield, point) -> FourVector:
    """Contravariant 4-velocity dx^mu/ds = j^mu / (2 m |psi|^2).

    ``point`` is (t, x...).  Raises :class:`NodeProximity` below the
    field's node threshold.
    """
    t, x = point[0], np.asarray(point[1:], float)
    if relfield.spatial_dim == 1:
        x = x[0]
    dens = float(relfield.density(t, x))
    if dens <= relfield.node_threshold:
        raise NodeProximity(f"|psi|^2 = {dens:.3e} at (t={t}, x={x})")
    j0, jvec = relfield.current(t, x)
    scale = 2.0 * relfield.mass * dens
    return FourVector(float(j0) / scale, np.atleast_1d(jvec) / scale)


def _rel_rhs(relfield, scale_fn=None):
    def rhs(_s, y):
        v = velocity_rel(relfield, y)
        out = v.as_array()
        if scale_fn is not None:
            out = out * scale_fn(y)
        return out
    return rhs


def _nonrel_rhs(nrfield):
    def rhs(t, y):
        x = y[0] if nrfield.config_dim == 1 else y
        v = nrfield.velocity(x, t)
        return np.atleast_1d(v)
    return rhs


# -- public integration entry points ------------------------------------


def integrate_rel(relfield, start, s_span, config=None, *,
                  stop_hyperplane=None, record_hyperplanes=(),
                  record_turning=True, velocity_scale=None,
                  param_eval=None) -> Trajectory:
    """Integrate a relativistic trajectory from spacetime point ``start``.

    Parameters
    ----------
    start : (t, x...)
    s_span : (s0, s1)
        May be decreasing for backward tracing.
    stop_hyperplane : (t_star, direction) or None
        Terminate at the first crossing of coordinate time t_star with
        the given sign of dt/ds (0 = either).
    record_hyperplanes : iterable of float
        Non-terminal t-levels whose crossings are recorded as events.
    velocity_scale : callable or None
        Optional positive scalar multiplier lambda(y) on the velocity
        field; the integral curve must not depend on it.
    param_eval : array_like or None
        Record trajectory points at these parameter values instead of at
        the solver's own steps.
    """
    config = config or IntegratorConfig()
    events = []
    if record_turning:
        def g_turn(_s, y):
            try:
                return velocity_rel(relfield, y).time_component
            except NodeProximity:
                return np.nan
        events.append(_EventSpec("turning_point", g_turn))
    for level in record_hyperplanes:
        events.append(_EventSpec("hyperplane_crossing",
                                 lambda _s, y, L=level: y[0] - L, level=level))
    if stop_hyperplane is not None:
        t_star, direction = stop_hyperplane
        events.append(_EventSpec("hyperplane_crossing",
                                 lambda _s, y, L=t_star: y[0] - L,
                                 level=t_star, direction=int(direction), terminal=True))
    rhs = _rel_rhs(relfield, velocity_scale)
    return _drive(rhs, np.asarray(start, float), s_span, config, events,
                  "rel", param_eval=param_eval)


def integrate_nonrel(nrfield, x0, t_span, config=None, *, param_eval=None) -> Trajectory:
    """Integrate dx/dt = Im(grad psi / psi)/m from configuration point x0."""
    config = config or IntegratorConfig()
    y0 = np.atleast_1d(np.asarray(x0, float))
    return _drive(_nonrel_rhs(nrfield), y0, t_span, config, [],
                  "nonrel", param_eval=param_eval)


def integrate_two_particle(field2, starts, s_span, config=None, *,
                           param_eval=None):
    """Integrate the coupled two-particle system in the common parameter s.

    ``starts`` is a pair of (t, x) spacetime points, possibly with
    different time coordinates (the synchronization offset is free); both
    are assigned the same initial s.  Returns a pair of single-particle
    Trajectory views sharing the parameter values.
    """
    config = config or IntegratorConfig()
    (t1, x1), (t2, x2) = starts
    y0 = np.array([t1, x1, t2, x2], dtype=float)

    def rhs(_s, y):
        v1, v2 = field2.velocities((y[0], y[1]), (y[2], y[3]))
        return np.array([v1[0], v1[1], v2[0], v2[1]])

    joint = _drive(rhs, y0, s_span, config, [], "two_particle",
                   param_eval=param_eval)
    return _split_two_particle(joint)


def _split_two_particle(joint: Trajectory):
    def view(sl):
        pts = [TrajectoryPoint(p.param, p.coords[sl], p.velocity[sl],
                               _speed_ratio(p.velocity[sl][0], p.velocity[sl][1:]))
               for p in joint.points]
        return Trajectory(kind="rel", points=pts, events=[],
                          termination=joint.termination, start=joint.start[sl])
    return view(slice(0, 2)), view(slice(2, 4)), joint


def retrace_check(field, trajectory: Trajectory, config=None) -> float:
    """Integrate back from the endpoint with reversed parameter and return
    the distance to the original start (integrator round-trip error)."""
    config = config or IntegratorConfig()
    s_start, s_end = trajectory.points[0].param, trajectory.points[-1].param
    if trajectory.kind == "rel":
        back = integrate_rel(field, trajectory.end, (s_end, s_start), config,
                             record_turning=False)
    elif trajectory.kind == "nonrel":
        back = integrate_nonrel(field, trajectory.end, (s_end, s_start), config)
    else:
        raise ValueError(f"cannot retrace trajectory kind {trajectory.kind!r}")
    return float(np.linalg.norm(back.end - trajectory.start))
