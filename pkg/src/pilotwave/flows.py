"""Vectorized trajectory ensembles.

Single trajectories (with full event logs) live in :mod:`pilotwave.guidance`;
this module propagates many independent trajectories at once with a
per-particle adaptive Dormand-Prince 4(5) stepper.  All particles share
each right-hand-side call, so a 10^5-particle ensemble costs a handful of
vectorized field evaluations per step.  Stopping conditions (reaching a
target parameter, or a state component crossing a level) are detected per
particle and refined on the cubic Hermite interpolant of the accepted step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Dormand-Prince 4(5) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])

STATUS_ACTIVE = 0
STATUS_REACHED_END = 1
STATUS_CROSSED = 2
STATUS_ABORTED = -1
STATUS_EXHAUSTED = -2


@dataclass(frozen=True)
class Level:
    """Stop a particle when state component ``comp`` crosses ``value``.

    ``direction`` restricts to crossings with that sign of the component's
    parameter derivative (0 = either).
    """

    comp: int
    value: float
    direction: int = 0


@dataclass
class FlowResult:
    y: np.ndarray        # final state per particle (crossing state if crossed)
    p: np.ndarray        # final parameter per particle
    status: np.ndarray   # STATUS_* per particle
    level_hit: np.ndarray  # index into levels, -1 if none

    @property
    def aborted(self) -> np.ndarray:
        return self.status == STATUS_ABORTED

    @property
    def n_aborted(self) -> int:
        return int(np.sum(self.aborted))


def _hermite(theta, y0, y1, f0, f1, h):
    """Cubic Hermite interpolant on one step, vectorized over particles."""
    t2 = theta * theta
    h00 = (1 + 2 * theta) * (1 - theta) ** 2
    h10 = theta * (1 - theta) ** 2
    h01 = t2 * (3 - 2 * theta)
    h11 = t2 * (theta - 1)
    return h00 * y0 + h01 * y1 + (h10 * f0 + h11 * f1) * h


def flow(rhs, y0, p0: float, *, p_end: float | None = None,
         levels=(), span_limit: float | None = None,
         rtol: float = 1e-8, atol: float = 1e-10,
         h0: float | None = None, max_steps: int = 200_000) -> FlowResult:
    """Propagate an ensemble until each particle stops.

    Parameters
    ----------
    rhs : callable
        ``rhs(p, y) -> (f, valid)`` with ``p`` shape (n,), ``y`` shape
        (n, d); ``valid`` flags particles whose velocity is defined
        (``False`` marks node proximity -- the step is retried smaller and
        the particle eventually aborted).
    y0 : ndarray, shape (n, d)
    p0 : float
        Common initial parameter.
    p_end : float, optional
        Target parameter; particles land on it exactly.
    levels : sequence of Level
        Per-particle terminal crossings, refined on the Hermite interpolant.
    span_limit : float, optional
        Particles whose |p - p0| exceeds this are flagged exhausted.
    """
    y = np.array(y0, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n, d = y.shape
    p = np.full(n, float(p0))
    status = np.full(n, STATUS_ACTIVE, dtype=np.int8)
    level_hit = np.full(n, -1, dtype=np.int64)
    levels = list(levels)

    direction = 1.0
    if p_end is not None:
        direction = 1.0 if p_end >= p0 else -1.0
    elif h0 is not None:
        direction = np.sign(h0) or 1.0

    f, valid = rhs(p, y)
    if not np.all(valid):
        status[~valid] = STATUS_ABORTED
    f = np.asarray(f, dtype=float)

    if h0 is None:
        scale = atol + rtol * np.abs(y)
        fnorm = np.sqrt(np.mean((f / scale) ** 2, axis=1))
        h = direction * 0.01 / np.maximum(fnorm, 1e-12)
    else:
        h = np.full(n, float(h0))
    h_floor = 1e-13

    for _ in range(max_steps):
        active = status == STATUS_ACTIVE
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        ya, pa, fa, ha = y[idx], p[idx], f[idx], h[idx]
        if p_end is not None:
            ha = np.clip(ha, None, p_end - pa) if direction > 0 \
                else np.clip(ha, p_end - pa, None)

        k = np.empty((7, len(idx), d))
        k[0] = fa
        bad = np.zeros(len(idx), dtype=bool)
        for i, arow in enumerate(_A):
            ys = ya + ha[:, None] * np.einsum("s,snd->nd", arow, k[: i + 1])
            ki, vi = rhs(pa + _C[i + 1] * ha, ys)
            bad |= ~vi
            k[i + 1] = np.where(vi[:, None], ki, 0.0)
        y_new = ya + ha[:, None] * np.einsum("s,snd->nd", _B, k[:6])
        k6, v6 = rhs(pa + ha, y_new)
        bad |= ~v6
        k[6] = np.where(v6[:, None], k6, 0.0)

        err = ha[:, None] * np.einsum("s,snd->nd", _E, k)
        scale = atol + rtol * np.maximum(np.abs(ya), np.abs(y_new))
        errnorm = np.sqrt(np.mean((err / scale) ** 2, axis=1))

        accept = (errnorm <= 1.0) & ~bad
        with np.errstate(divide="ignore"):
            factor = 0.9 * errnorm ** -0.2
        factor = np.clip(np.where(np.isfinite(factor), factor, 5.0), 0.2, 5.0)
        factor = np.where(bad, 0.3, factor)

        # aborted: node proximity persists down to a vanishing step
        dead = bad & (np.abs(ha) < h_floor * (1.0 + np.abs(pa)))
        if dead.any():
            status[idx[dead]] = STATUS_ABORTED

        if accept.any():
            ai = np.nonzero(accept)[0]
            gi = idx[ai]
            p_new = pa[ai] + ha[ai]
            crossed = np.zeros(len(ai), dtype=bool)
            theta_best = np.full(len(ai), np.inf)
            hit = np.full(len(ai), -1, dtype=np.int64)
            for li, lv in enumerate(levels):
                g0 = ya[ai, lv.comp] - lv.value
                g1 = y_new[ai, lv.comp] - lv.value
                cand = g0 * g1 < 0.0
                if lv.direction != 0:
                    slope = np.sign(g1 - g0) * np.sign(ha[ai])
                    cand &= slope == lv.direction
                if not cand.any():
                    continue
                lo = np.zeros(len(ai))
                hi = np.ones(len(ai))
                for _b in range(60):
                    mid = 0.5 * (lo + hi)
                    gm = _hermite(mid, ya[ai, lv.comp], y_new[ai, lv.comp],
                                  k[0][ai, lv.comp], k[6][ai, lv.comp],
                                  ha[ai]) - lv.value
                    left = np.sign(gm) == np.sign(g0)
                    lo = np.where(left, mid, lo)
                    hi = np.where(left, hi, mid)
                theta = 0.5 * (lo + hi)
                better = cand & (theta < theta_best)
                theta_best = np.where(better, theta, theta_best)
                hit = np.where(better, li, hit)
                crossed |= cand

            if crossed.any():
                ci = np.nonzero(crossed)[0]
                th = theta_best[ci][:, None]
                y_cross = _hermite(th, ya[ai[ci]], y_new[ai[ci]],
                                   k[0][ai[ci]], k[6][ai[ci]], ha[ai[ci], None])
                gci = gi[ci]
                y[gci] = y_cross
                p[gci] = pa[ai[ci]] + theta_best[ci] * ha[ai[ci]]
                status[gci] = STATUS_CROSSED
                level_hit[gci] = hit[ci]

            keep = ~crossed
            ki_ = np.nonzero(keep)[0]
            gki = gi[ki_]
            y[gki] = y_new[ai[ki_]]
            p[gki] = p_new[ki_]
            f[gki] = k[6][ai[ki_]]
            if p_end is not None:
                done = np.abs(p[gki] - p_end) <= 1e-14 * (1.0 + abs(p_end))
                status[gki[done]] = STATUS_REACHED_END
            if span_limit is not None:
                out = np.abs(p[gki] - p0) >= span_limit
                status[gki[out]] = STATUS_EXHAUSTED

        h[idx] = ha * factor
    else:
        pass  # remaining STATUS_ACTIVE particles report as active-exhausted

    return FlowResult(y=y, p=p, status=status, level_hit=level_hit)


# -- right-hand sides ---------------------------------------------------


def nonrel_rhs(nrfield):
    """Ensemble RHS for dx/dt = Im(grad psi/psi)/m; param is coordinate time."""
    def rhs(t, y):
        x = y[:, 0] if nrfield.config_dim == 1 else y
        v, valid = nrfield.velocity(x, t)
        return v, valid
    return rhs


def rel_rhs(relfield, direction: float = 1.0):
    """Ensemble RHS for dx^mu/ds = j^mu/(2 m |psi|^2); state is (t, x)."""
    mass = relfield.mass
    thr = relfield.node_threshold

    def rhs(_s, y):
        t, x = y[:, 0], y[:, 1]
        psi, dt_psi, dx_psi = relfield.derivatives(t, x)
        dens = (psi * psi.conj()).real
        valid = dens > thr
        safe = np.where(valid, dens, 1.0)
        j0 = -2.0 * (psi.conj() * dt_psi).imag
        jx = 2.0 * (psi.conj() * dx_psi[..., 0]).imag
        scale = direction / (2.0 * mass * safe)
        return np.stack([j0 * scale, jx * scale], axis=1), valid
    return rhs
