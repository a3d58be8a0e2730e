"""Nonrelativistic Bohmian phenomenology: equilibrium sampling,
equivariance of the ensemble density with |psi|^2, and von Neumann
channel measurements with Born-rule statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (ExcessNodeAborts, PhysicsInvariantViolated,
                     UnresolvedExcess, WindowTooSmall)
from .flows import STATUS_REACHED_END, flow, nonrel_rhs
from .schrodinger import AxisGaussian, GaussComponent, NonRelField

OVERLAP_TOLERANCE = 1e-8
SUPPORT_RADIUS_SIGMA = 4.0    # channel support = center +/- 4 pointer widths
# Two unit-mass Gaussians of common width w separated by d overlap by
# exp(-d^2 / (8 w^2)), so meeting OVERLAP_TOLERANCE needs at least
# sqrt(8 ln(1/tol)) ~ 12.14 widths of separation (more than the bare
# 8-width visual criterion, which only reaches exp(-8) ~ 3e-4).
SEPARATION_SIGMA = max(8.0, 1.01 * float(np.sqrt(8.0 * np.log(1.0 / OVERLAP_TOLERANCE))))


@dataclass(frozen=True)
class Ensemble:
    """Unweighted configuration-space samples drawn at one time."""

    positions: np.ndarray
    t: float
    seed: int


@dataclass
class ChannelOutcome:
    counts: np.ndarray       # per-channel trajectory counts
    frequencies: np.ndarray  # counts / n
    unresolved: int          # endpoints in no channel support (incl. aborts)
    n: int
    n_aborted: int


@dataclass(frozen=True)
class Channel:
    coefficient: complex
    system_center: float
    system_velocity: float
    system_width: float
    drift_velocity: float


@dataclass
class MeasurementScenario:
    """Von Neumann measurement: Psi(x, y, t) = sum_a c_a psi_a(x,t) chi_a(y,t).

    The pointer factors chi_a are Gaussians in y, all centered at 0 at
    t = 0 with a common width and distinct drift velocities; a heavy
    pointer mass keeps their spreading negligible over the run.
    """

    channels: list
    system_mass: float = 1.0
    pointer_mass: float = 500.0
    pointer_width: float = 0.1
    final_time: float = 1.0
    overlap_tolerance: float = OVERLAP_TOLERANCE

    def __post_init__(self):
        total = sum(abs(c.coefficient) ** 2 for c in self.channels)
        if abs(total - 1.0) > 1e-12:
            raise PhysicsInvariantViolated(
                f"channel coefficients must satisfy sum |c_a|^2 = 1, got {total}")
        drifts = [c.drift_velocity for c in self.channels]
        if len(set(drifts)) != len(drifts):
            raise PhysicsInvariantViolated("pointer drift velocities must be distinct")

    @property
    def separation_time(self) -> float:
        gaps = []
        drifts = [c.drift_velocity for c in self.channels]
        for i in range(len(drifts)):
            for j in range(i + 1, len(drifts)):
                gaps.append(abs(drifts[i] - drifts[j]))
        if not gaps:
            return 0.0  # a lone channel is separated from the start
        t = SEPARATION_SIGMA * self.pointer_width / min(gaps)
        # the pointers spread a little while drifting apart; a couple of
        # fixed-point passes through the time-dependent width suffice
        for _ in range(3):
            t = SEPARATION_SIGMA * self.pointer_width_at(t) / min(gaps)
        return t

    def build_field(self) -> NonRelField:
        comps = []
        for ch in self.channels:
            comps.append(GaussComponent(
                complex(ch.coefficient),
                (AxisGaussian(self.system_mass, ch.system_center,
                              ch.system_velocity, ch.system_width),
                 AxisGaussian(self.pointer_mass, 0.0, ch.drift_velocity,
                              self.pointer_width)),
            ))
        f = NonRelField(comps, channels=self)
        return f

    def pointer_width_at(self, t: float) -> float:
        ax = AxisGaussian(self.pointer_mass, 0.0, 0.0, self.pointer_width)
        return ax.physical_width(t)

    def channel_supports(self, t: float):
        """Per-channel (lo, hi) interval in y at time t."""
        w = self.pointer_width_at(t)
        return [(ch.drift_velocity * t - SUPPORT_RADIUS_SIGMA * w,
                 ch.drift_velocity * t + SUPPORT_RADIUS_SIGMA * w)
                for ch in self.channels]

    def pointer_overlap(self, t: float) -> float:
        """max_{a != a'} integral |chi_a chi_a'| dy at time t."""
        w = self.pointer_width_at(t)
        worst = 0.0
        for i in range(len(self.channels)):
            for j in range(i + 1, len(self.channels)):
                d = abs(self.channels[i].drift_velocity
                        - self.channels[j].drift_velocity) * t
                ys = np.linspace(-d, 2 * d, 4001) if d > 0 else np.linspace(-8 * w, 8 * w, 4001)
                c_i = self.channels[i].drift_velocity * t
                c_j = self.channels[j].drift_velocity * t
                amp = (2 * np.pi * w**2) ** -0.25
                chi_i = amp * np.exp(-((ys - c_i) ** 2) / (4 * w**2))
                chi_j = amp * np.exp(-((ys - c_j) ** 2) / (4 * w**2))
                worst = max(worst, float(np.trapezoid(chi_i * chi_j, ys)))
        return worst

    def validate(self):
        for t in (self.separation_time, self.final_time):
            ov = self.pointer_overlap(t)
            if ov > self.overlap_tolerance:
                raise PhysicsInvariantViolated(
                    f"pointer overlap {ov:.2e} above tolerance at t={t}")
        if self.final_time <= self.separation_time:
            raise PhysicsInvariantViolated("final_time must exceed separation_time")


# -- sampling -----------------------------------------------------------


def sample_density(nrfield: NonRelField, t: float, n: int, seed: int,
                   *, mass_tolerance: float = 1e-6) -> Ensemble:
    """Draw n samples from |psi(., t)|^2 by rejection on the +/-8 sigma window.

    Deterministic for a fixed seed.  Raises :class:`WindowTooSmall` if the
    declared window holds less than 1 - mass_tolerance of the total mass
    (probed against a doubled window).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    window = nrfield.sampling_window(t)
    wide_mass = _window_mass(nrfield, t, nsigma=16.0)
    mass = _window_mass(nrfield, t, nsigma=8.0)
    if mass < (1.0 - mass_tolerance) * wide_mass:
        raise WindowTooSmall(f"window holds {mass / wide_mass:.8f} of the mass")

    dim = nrfield.config_dim
    lo = np.array([w[0] for w in window])
    hi = np.array([w[1] for w in window])
    bound = 1.3 * _density_max(nrfield, t, window)

    rng = np.random.default_rng(seed)
    out = np.empty((n, dim))
    filled = 0
    while filled < n:
        m = max(4 * (n - filled), 1024)
        prop = lo + (hi - lo) * rng.random((m, dim))
        u = bound * rng.random(m)
        dens = nrfield.density(prop[:, 0] if dim == 1 else prop, t)
        acc = prop[u < dens]
        take = min(n - filled, len(acc))
        out[filled:filled + take] = acc[:take]
        filled += take
    positions = out[:, 0] if dim == 1 else out
    return Ensemble(positions=positions, t=float(t), seed=int(seed))


def _window_mass(nrfield, t, nsigma):
    window = nrfield.sampling_window(t, nsigma=nsigma)
    if nrfield.config_dim == 1:
        xs = np.linspace(window[0][0], window[0][1], 4001)
        return float(np.trapezoid(nrfield.density(xs, t), xs))
    xs = np.linspace(window[0][0], window[0][1], 801)
    ys = np.linspace(window[1][0], window[1][1], 801)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    dens = nrfield.density(grid, t)
    return float(np.trapezoid(np.trapezoid(dens, ys, axis=1), xs))


def _density_max(nrfield, t, window):
    if nrfield.config_dim == 1:
        xs = np.linspace(window[0][0], window[0][1], 4001)
        return float(np.max(nrfield.density(xs, t)))
    xs = np.linspace(window[0][0], window[0][1], 401)
    ys = np.linspace(window[1][0], window[1][1], 401)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    return float(np.max(nrfield.density(grid, t)))


# -- equivariance -------------------------------------------------------


def exact_bin_masses(nrfield: NonRelField, t: float, edges: np.ndarray,
                     sub: int = 24) -> np.ndarray:
    """Probability mass of each histogram bin under |psi(., t)|^2 (1-D),
    normalized over the sampling window."""
    masses = np.empty(len(edges) - 1)
    for b in range(len(edges) - 1):
        xs = np.linspace(edges[b], edges[b + 1], sub)
        masses[b] = np.trapezoid(nrfield.density(xs, t), xs)
    total = _window_mass(nrfield, t, nsigma=8.0)
    return masses / total


def equivariance_test(nrfield: NonRelField, t0: float, t1: float, n: int,
                      bins: int, seed: int, *,
                      max_abort_fraction: float = 1e-3) -> float:
    """L1 distance between the propagated ensemble histogram and the exact
    bin masses of |psi(., t1)|^2.  Exact equivariance leaves only sampling
    and integration noise, roughly sqrt(bins / n)."""
    ens = sample_density(nrfield, t0, n, seed)
    res = flow(nonrel_rhs(nrfield), np.atleast_2d(ens.positions).T
               if nrfield.config_dim == 1 else ens.positions,
               t0, p_end=t1)
    if res.n_aborted > max_abort_fraction * n:
        raise ExcessNodeAborts(f"{res.n_aborted}/{n} trajectories aborted")
    ok = res.status == STATUS_REACHED_END
    final = res.y[ok, 0]
    window = nrfield.sampling_window(t1)
    edges = np.linspace(window[0][0], window[0][1], bins + 1)
    counts, _ = np.histogram(final, bins=edges)
    p_hat = counts / len(final)
    p_exact = exact_bin_masses(nrfield, t1, edges)
    return float(np.sum(np.abs(p_hat - p_exact)))


# -- measurement --------------------------------------------------------


def run_measurement(scenario: MeasurementScenario, n: int, seed: int,
                    *, max_abort_fraction: float = 1e-3) -> ChannelOutcome:
    """Integrate n (x, y) trajectories under the full entangled wave
    function and classify endpoints by occupied pointer channel.  The
    empirical channel frequencies estimate |c_a|^2."""
    scenario.validate()
    nrfield = scenario.build_field()
    ens = sample_density(nrfield, 0.0, n, seed)
    res = flow(nonrel_rhs(nrfield), ens.positions, 0.0,
               p_end=scenario.final_time)
    if res.n_aborted > max_abort_fraction * n:
        raise ExcessNodeAborts(f"{res.n_aborted}/{n} trajectories aborted")
    counts, unresolved = classify_endpoints(scenario, res.y[:, 1],
                                            scenario.final_time,
                                            invalid=~(res.status == STATUS_REACHED_END))
    outcome = ChannelOutcome(counts=counts, frequencies=counts / n,
                             unresolved=unresolved, n=n,
                             n_aborted=res.n_aborted)
    if unresolved > 0.01 * n:
        raise UnresolvedExcess(f"{unresolved}/{n} endpoints in no channel")
    return outcome


def classify_endpoints(scenario, y_values, t, invalid=None):
    supports = scenario.channel_supports(t)
    counts = np.zeros(len(supports), dtype=np.int64)
    assigned = np.zeros(len(y_values), dtype=bool)
    if invalid is not None:
        assigned |= np.asarray(invalid)  # aborted endpoints count unresolved
    for a, (lo, hi) in enumerate(supports):
        hit = (~assigned) & (y_values >= lo) & (y_values <= hi)
        counts[a] = int(np.sum(hit))
        assigned |= hit
    return counts, len(y_values) - int(counts.sum())


@dataclass
class ExclusivityReport:
    violations: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def channel_exclusivity_check(scenario: MeasurementScenario, y_snapshots,
                              times) -> ExclusivityReport:
    """Assert each trajectory's pointer coordinate sits in at most one
    channel support at every checked time.  Returns a report; overlapping
    supports (a mis-built scenario) show up as violations."""
    report = ExclusivityReport()
    for t, ys in zip(times, y_snapshots):
        supports = scenario.channel_supports(t)
        for i, y in enumerate(np.atleast_1d(ys)):
            inside = [a for a, (lo, hi) in enumerate(supports) if lo <= y <= hi]
            if len(inside) > 1:
                report.violations.append((float(t), int(i), inside))
    return report


def collapsed_field(scenario: MeasurementScenario, channel: int) -> NonRelField:
    """The single-channel wave function c_a psi_a chi_a (normalized)."""
    ch = scenario.channels[channel]
    comp = GaussComponent(
        1.0 + 0.0j,
        (AxisGaussian(scenario.system_mass, ch.system_center,
                      ch.system_velocity, ch.system_width),
         AxisGaussian(scenario.pointer_mass, 0.0, ch.drift_velocity,
                      scenario.pointer_width)),
    )
    return NonRelField([comp])


def effective_collapse_deviation(scenario: MeasurementScenario, n: int,
                                 seed: int, t_split: float | None = None) -> float:
    """Max deviation of the system coordinate between evolution under the
    full superposition and under the occupied channel alone, over
    [t_split, final_time], for an n-trajectory sample.

    ``t_split`` defaults to just past the separation time.
    """
    scenario.validate()
    nrfield = scenario.build_field()
    if t_split is None:
        t_split = 1.10 * scenario.separation_time
    ens = sample_density(nrfield, 0.0, n, seed)
    mid = flow(nonrel_rhs(nrfield), ens.positions, 0.0, p_end=t_split)
    ok = mid.status == STATUS_REACHED_END
    pts = mid.y[ok]
    supports = scenario.channel_supports(t_split)
    worst = 0.0
    for a, (lo, hi) in enumerate(supports):
        sel = (pts[:, 1] >= lo) & (pts[:, 1] <= hi)
        if not sel.any():
            continue
        seg = pts[sel]
        full = flow(nonrel_rhs(nrfield), seg, t_split,
                    p_end=scenario.final_time)
        single = flow(nonrel_rhs(collapsed_field(scenario, a)), seg, t_split,
                      p_end=scenario.final_time)
        good = (full.status == STATUS_REACHED_END) & (single.status == STATUS_REACHED_END)
        if good.any():
            worst = max(worst, float(np.max(np.abs(full.y[good, 0]
                                                   - single.y[good, 0]))))
    return worst
