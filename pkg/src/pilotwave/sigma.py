"""Detection-probability prediction on a measurement hyperplane.

Even positive-frequency Klein-Gordon superpositions can have a negative
current time component j0 in parts of spacetime.  If the density is
nonnegative at the preparation time t0 while backflow develops before the
measurement onset t1, some crossings of the t1 hyperplane are not first
crossings and cannot register.  The hyperplane splits into

* Sigma-minus: j0(x, t1) < 0,
* Sigma-plus:  j0(x, t1) > 0 but connected to the backflow region by a
  trajectory below t1 (a backward trace from (t1, x) re-crosses t1
  before reaching t0),
* Sigma-prime: everything else,

and the measurable density is j0 on Sigma-prime and zero elsewhere.
A Monte Carlo first-crossing ensemble provides the independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ExcessNodeAborts, PreconditionViolated
from .flows import (Level, STATUS_ABORTED, STATUS_CROSSED, flow, rel_rhs)
from .guidance import IntegratorConfig, integrate_rel
from .relativistic import RelField

SIGMA_PRIME = 0
SIGMA_PLUS = 1
SIGMA_MINUS = 2
INDETERMINATE = 3

LABEL_NAMES = {SIGMA_PRIME: "sigma_prime", SIGMA_PLUS: "sigma_plus",
               SIGMA_MINUS: "sigma_minus", INDETERMINATE: "indeterminate"}

POSITIVITY_TOLERANCE_FRACTION = 1e-9
FLUX_TOLERANCE = 0.01


@dataclass(frozen=True)
class ScenarioWindow:
    """Preparation time, measurement onset and the field between them."""

    field: RelField
    t0: float
    t1: float

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise ValueError("t1 must exceed t0")

    @property
    def mean_j0(self) -> float:
        # normalized fields carry unit flux over the box
        return 1.0 / self.field.box_length**self.field.spatial_dim

    @property
    def positivity_tolerance(self) -> float:
        return POSITIVITY_TOLERANCE_FRACTION * self.mean_j0


@dataclass
class WindowReport:
    min_j0: float
    argmin_x: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.min_j0 >= -self.tolerance


@dataclass
class SigmaClassification:
    grid: np.ndarray      # cell centers on [0, L)
    labels: np.ndarray    # SIGMA_* / INDETERMINATE codes
    j0: np.ndarray        # j0(x, t1) at cell centers
    density: np.ndarray   # predicted measurable density
    t0: float
    t1: float
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def cell_width(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def flux(self) -> float:
        """Integral of the predicted density (= flux through Sigma-prime)."""
        return float(np.sum(self.density) * self.cell_width)

    def counts(self) -> dict:
        return {name: int(np.sum(self.labels == code))
                for code, name in LABEL_NAMES.items()}

    def bin_masses(self, edges: np.ndarray) -> np.ndarray:
        """Aggregate the predicted density onto histogram bins."""
        masses = np.zeros(len(edges) - 1)
        which = np.clip(np.searchsorted(edges, self.grid, side="right") - 1,
                        0, len(edges) - 2)
        np.add.at(masses, which, self.density * self.cell_width)
        return masses


# -- density scanning ---------------------------------------------------


def _min_points_per_wavelength(field: RelField) -> int:
    p_max = max(float(np.max(np.abs(m.momentum))) for m in field.modes)
    if p_max == 0:
        return 8
    wavelength = 2.0 * np.pi / p_max
    return int(np.ceil(8.0 * field.box_length / wavelength))


def scan_negative_density(field: RelField, t_values, n_x: int | None = None):
    """Grid-local spatial minima of j0 with negative value, for each scanned
    time, refined by quadratic interpolation through the bracketing nodes.

    Returns a list of (t, x, j0_min) records.
    """
    need = _min_points_per_wavelength(field)
    n_x = max(n_x or 0, need, 256)
    xs = np.linspace(0.0, field.box_length, n_x, endpoint=False)
    records = []
    for t in np.atleast_1d(t_values):
        j0, _ = field.current(np.full(n_x, float(t)), xs)
        left, right = np.roll(j0, 1), np.roll(j0, -1)
        local_min = (j0 < left) & (j0 <= right) & (j0 < 0)
        for i in np.nonzero(local_min)[0]:
            x_ref, j_ref = _quadratic_refine(
                xs[i], field.box_length / n_x,
                left[i], j0[i], right[i])
            records.append((float(t), x_ref % field.box_length, j_ref))
    return records


def _quadratic_refine(x_mid, dx, f_left, f_mid, f_right):
    denom = f_left - 2.0 * f_mid + f_right
    if denom <= 0:
        return float(x_mid), float(f_mid)
    shift = 0.5 * (f_left - f_right) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    x_min = x_mid + shift * dx
    f_min = f_mid - 0.25 * (f_left - f_right) * shift
    return float(x_min), float(f_min)


def verify_window(window: ScenarioWindow, n_grid: int = 4096) -> WindowReport:
    """Scan j0(., t0) and report its minimum against the positivity tolerance."""
    n = max(n_grid, _min_points_per_wavelength(window.field))
    xs = np.linspace(0.0, window.field.box_length, n, endpoint=False)
    j0, _ = window.field.current(np.full(n, window.t0), xs)
    i = int(np.argmin(j0))
    x_ref, j_ref = _quadratic_refine(xs[i], window.field.box_length / n,
                                     j0[i - 1], j0[i], j0[(i + 1) % n])
    return WindowReport(min_j0=min(float(j0[i]), j_ref), argmin_x=x_ref,
                        tolerance=window.positivity_tolerance)


# -- classification -----------------------------------------------------


def _backward_levels(window):
    # backward param sigma = -s increases; t falls through t0 (slope -1)
    # for a first crossing, or climbs back through t1 (slope +1) for a
    # non-first crossing
    return [Level(comp=0, value=window.t0, direction=-1),
            Level(comp=0, value=window.t1, direction=+1)]


def _span_limit(window) -> float:
    # generous |s| budget: dt/ds is O(omega/m) away from turning points,
    # so s ~ (t1 - t0) m / omega suffices for a direct passage; backflow
    # loops and slow stretches get two orders of magnitude of headroom
    return 100.0 * (window.t1 - window.t0 + 1.0)


def classify_grid(window: ScenarioWindow, n_grid: int,
                  *, rtol: float = 1e-9, atol: float = 1e-11) -> SigmaClassification:
    """Label every cell of the uniform grid at t1 and assemble the
    predicted density (j0 on Sigma-prime, zero elsewhere)."""
    L = window.field.box_length
    dx = L / n_grid
    centers = (np.arange(n_grid) + 0.5) * dx
    j0, _ = window.field.current(np.full(n_grid, window.t1), centers)
    labels = np.full(n_grid, SIGMA_PRIME, dtype=np.int8)
    labels[j0 < 0] = SIGMA_MINUS

    todo = np.nonzero(labels != SIGMA_MINUS)[0]
    if len(todo):
        y0 = np.stack([np.full(len(todo), window.t1), centers[todo]], axis=1)
        res = flow(rel_rhs(window.field, direction=-1.0), y0, 0.0,
                   levels=_backward_levels(window),
                   span_limit=_span_limit(window), rtol=rtol, atol=atol)
        cell_labels = np.full(len(todo), INDETERMINATE, dtype=np.int8)
        crossed = res.status == STATUS_CROSSED
        cell_labels[crossed & (res.level_hit == 0)] = SIGMA_PRIME
        cell_labels[crossed & (res.level_hit == 1)] = SIGMA_PLUS
        labels[todo] = cell_labels
        diagnostics = {
            "n_backward_traces": int(len(todo)),
            "n_aborted": int(np.sum(res.status == STATUS_ABORTED)),
            "n_exhausted": int(np.sum(~crossed & (res.status != STATUS_ABORTED))),
            "mean_backward_span": float(np.mean(np.abs(res.p[crossed])))
            if crossed.any() else 0.0,
        }
    else:
        diagnostics = {"n_backward_traces": 0, "n_aborted": 0, "n_exhausted": 0}

    density = np.where(labels == SIGMA_PRIME, j0, 0.0)
    return SigmaClassification(grid=centers, labels=labels, j0=j0,
                               density=density, t0=window.t0, t1=window.t1,
                               diagnostics=diagnostics)


def classify_point(window: ScenarioWindow, x: float, **kw):
    """(label code, diagnostics) for a single space point at t1."""
    j0, _ = window.field.current(window.t1, x)
    if float(j0) < 0:
        return SIGMA_MINUS, {"j0": float(j0)}
    res = flow(rel_rhs(window.field, direction=-1.0),
               np.array([[window.t1, float(x)]]), 0.0,
               levels=_backward_levels(window),
               span_limit=_span_limit(window),
               rtol=kw.get("rtol", 1e-9), atol=kw.get("atol", 1e-11))
    diag = {"j0": float(j0), "backward_span": float(res.p[0]),
            "end": res.y[0].copy()}
    if res.status[0] == STATUS_CROSSED:
        label = SIGMA_PRIME if res.level_hit[0] == 0 else SIGMA_PLUS
        return label, diag
    return INDETERMINATE, diag


def predict_density(window: ScenarioWindow, n_grid: int,
                    *, max_indeterminate_fraction: float = 1e-3,
                    **kw) -> SigmaClassification:
    """The measurable density at t1, after checking the t0 precondition."""
    report = verify_window(window)
    if not report.passed:
        raise PreconditionViolated(
            f"j0(x={report.argmin_x:.4f}, t0) = {report.min_j0:.3e} < 0")
    cls = classify_grid(window, n_grid, **kw)
    n_ind = int(np.sum(cls.labels == INDETERMINATE))
    cls.diagnostics["indeterminate_fraction"] = n_ind / n_grid
    if n_ind > max_indeterminate_fraction * n_grid:
        cls.diagnostics["warning"] = "excess indeterminate cells"
    return cls


# -- Monte Carlo first-crossing oracle ----------------------------------


@dataclass
class McCrossing:
    edges: np.ndarray
    masses: np.ndarray     # histogram normalized to the surviving fraction
    crossings: np.ndarray  # raw first-crossing positions folded into [0, L)
    n: int
    n_aborted: int
    n_lost: int            # never reached t1 within the span budget


def sample_initial_density(window: ScenarioWindow, n: int, seed: int) -> np.ndarray:
    """Rejection-sample x0 from rho(x, t0) = j0(x, t0) on the box."""
    L = window.field.box_length
    grid = np.linspace(0.0, L, 8192, endpoint=False)
    j0, _ = window.field.current(np.full(len(grid), window.t0), grid)
    bound = 1.3 * float(np.max(j0))
    rng = np.random.default_rng(seed)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(4 * (n - filled), 1024)
        prop = L * rng.random(m)
        u = bound * rng.random(m)
        dens, _ = window.field.current(np.full(m, window.t0), prop)
        acc = prop[u < np.maximum(dens, 0.0)]
        take = min(n - filled, len(acc))
        out[filled:filled + take] = acc[:take]
        filled += take
    return out


def mc_first_crossing(window: ScenarioWindow, n: int, seed: int, bins: int,
                      *, max_abort_fraction: float = 1e-3,
                      rtol: float = 1e-8, atol: float = 1e-10) -> McCrossing:
    """Forward-integrate an equilibrium ensemble from t0 and histogram the
    positions of the FIRST crossing of the t1 hyperplane (measurement
    onset truncates each trajectory at first arrival)."""
    report = verify_window(window)
    if not report.passed:
        raise PreconditionViolated(
            f"j0(x={report.argmin_x:.4f}, t0) = {report.min_j0:.3e} < 0")
    x0 = sample_initial_density(window, n, seed)
    y0 = np.stack([np.full(n, window.t0), x0], axis=1)
    res = flow(rel_rhs(window.field), y0, 0.0,
               levels=[Level(comp=0, value=window.t1, direction=0)],
               span_limit=_span_limit(window), rtol=rtol, atol=atol)
    crossed = res.status == STATUS_CROSSED
    n_aborted = int(np.sum(res.status == STATUS_ABORTED))
    n_lost = int(np.sum(~crossed)) - n_aborted
    if n_aborted > max_abort_fraction * n:
        raise ExcessNodeAborts(f"{n_aborted}/{n} trajectories aborted")
    L = window.field.box_length
    xs = res.y[crossed, 1] % L
    edges = np.linspace(0.0, L, bins + 1)
    counts, _ = np.histogram(xs, bins=edges)
    return McCrossing(edges=edges, masses=counts / n, crossings=xs,
                      n=n, n_aborted=n_aborted, n_lost=n_lost)


def l1_distance(masses_a: np.ndarray, masses_b: np.ndarray) -> float:
    return float(np.sum(np.abs(masses_a - masses_b)))


def clipped_conventional_density(window: ScenarioWindow, n_grid: int):
    """The trajectory-free guess: j0(., t1) clipped at zero, renormalized.
    Used only as a contrast against the Bohmian prediction."""
    L = window.field.box_length
    centers = (np.arange(n_grid) + 0.5) * (L / n_grid)
    j0, _ = window.field.current(np.full(n_grid, window.t1), centers)
    clipped = np.maximum(j0, 0.0)
    clipped /= np.sum(clipped) * (L / n_grid)
    return centers, clipped


# -- backflow anatomy ---------------------------------------------------


def find_backflow_trajectory(window: ScenarioWindow,
                             classification: SigmaClassification | None = None,
                             *, n_grid: int = 400, max_candidates: int = 12,
                             span: float | None = None,
                             config: IntegratorConfig | None = None):
    """A trajectory crossing t1 three times (forward, backward, forward).

    Sigma-plus cells sit on backflow arcs, so integrating forward from
    (t1, x) with full event recording picks up the S-shaped history
    directly (in many states these arcs close into trapped loops that
    never touch t0 -- precisely why they can register no first crossing).
    Returns a :class:`~pilotwave.guidance.Trajectory`, or None.
    """
    cls = classification or classify_grid(window, n_grid)
    config = config or IntegratorConfig()
    if span is None:
        span = 25.0 * (window.t1 - window.t0 + 1.0)
    plus_cells = np.nonzero(cls.labels == SIGMA_PLUS)[0]
    for idx in plus_cells[:max_candidates]:
        x = cls.grid[idx]
        traj = integrate_rel(window.field, (window.t1, float(x)), (0.0, span),
                             config, record_hyperplanes=[window.t1],
                             record_turning=True)
        crossings = [e for e in traj.events if e.kind == "hyperplane_crossing"]
        turnings = [e for e in traj.events if e.kind == "turning_point"]
        dirs = [e.direction for e in crossings]
        for i in range(len(dirs) - 2):
            if dirs[i:i + 3] == [1, -1, 1]:
                s_lo, s_hi = crossings[i].param, crossings[i + 2].param
                inner = [e for e in turnings if s_lo <= e.param <= s_hi]
                if len(inner) >= 2:
                    return traj
    return None
