"""Free-particle Schrodinger fields built from analytically evolving
Gaussian components.

The evolution of each 1-D Gaussian factor is hard-coded in closed form
(complex width sigma(t) = sigma0 * (1 + i t / (2 m sigma0^2))); there is
no PDE time-stepper anywhere in the package.  Configuration spaces of one
or two dimensions are supported, the two-dimensional case covering
system-plus-pointer measurement wave functions Psi(x, y, t).  Units are
natural (hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NodeProximity, PhysicsInvariantViolated

NODE_THRESHOLD_FRACTION = 1e-10
_QUARTER_LOG_2PI = 0.25 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class AxisGaussian:
    """One 1-D free-Gaussian factor exp-form parameters.

    The factor is normalized to unit L2 norm at every time:

        phi(x, t) = (2 pi s0^2)^(-1/4) (s_t/s0)^(-1/2)
                    * exp(-(x - x0 - u t)^2 / (4 s0 s_t)
                          + i m u (x - x0) - i m u^2 t / 2)

    with s_t = s0 (1 + i t / (2 m s0^2)).
    """

    mass: float
    center: float
    velocity: float
    width: float

    def spread_time(self) -> float:
        """Characteristic spreading time tau = 2 m sigma0^2."""
        return 2.0 * self.mass * self.width**2

    def complex_width(self, t: float) -> complex:
        return self.width * (1.0 + 1j * t / self.spread_time())

    def physical_width(self, t: float) -> float:
        """|sigma(t)|, the actual packet width at time t."""
        return abs(self.complex_width(t))

    def log_value(self, x, t: float):
        """log phi(x, t), stable for far tails."""
        s0, st = self.width, self.complex_width(t)
        dx = np.asarray(x, dtype=float) - self.center - self.velocity * t
        phase = self.mass * self.velocity * (np.asarray(x) - self.center) \
            - 0.5 * self.mass * self.velocity**2 * t
        return (-_QUARTER_LOG_2PI - 0.5 * np.log(s0) - 0.5 * np.log(st / s0)
                - dx * dx / (4.0 * s0 * st) + 1j * phase)

    def dlog(self, x, t: float):
        """d/dx log phi."""
        dx = np.asarray(x, dtype=float) - self.center - self.velocity * t
        return -dx / (2.0 * self.width * self.complex_width(t)) \
            + 1j * self.mass * self.velocity

    def d2log(self, t: float) -> complex:
        """d^2/dx^2 log phi (x-independent)."""
        return -1.0 / (2.0 * self.width * self.complex_width(t))


@dataclass(frozen=True)
class GaussComponent:
    """weight * product of per-axis Gaussian factors."""

    weight: complex
    axes: tuple


class NonRelField:
    """Superposition of freely evolving Gaussian components.

    Immutable; evaluation methods are pure functions of (point, time) and
    safe for concurrent use.  ``masses[i]`` is the mass attached to
    configuration axis i (the pointer axis of a measurement wave function
    may be much heavier than the system axis).
    """

    def __init__(self, components, *, channels=None):
        if not components:
            raise PhysicsInvariantViolated("a field needs at least one component")
        dim = len(components[0].axes)
        if dim not in (1, 2):
            raise PhysicsInvariantViolated("config_dim must be 1 or 2")
        if any(len(c.axes) != dim for c in components):
            raise PhysicsInvariantViolated("components must share the config dimension")
        masses = tuple(ax.mass for ax in components[0].axes)
        for c in components:
            if any(ax.mass != masses[i] for i, ax in enumerate(c.axes)):
                raise PhysicsInvariantViolated("per-axis masses must match across components")
            if any(ax.width <= 0 for ax in c.axes):
                raise PhysicsInvariantViolated("widths must be positive")

        self.components = tuple(components)
        self.config_dim = dim
        self.masses = masses
        self.mass = masses[0]
        self.channels = channels  # measurement metadata, set by the lab
        # reference density scale: sum of t=0 component peak densities
        peak = 0.0
        for c in self.components:
            peak += abs(c.weight) ** 2 * float(
                np.prod([1.0 / np.sqrt(2.0 * np.pi * ax.width**2) for ax in c.axes])
            )
        self.node_threshold = NODE_THRESHOLD_FRACTION * peak

    # -- constructors ---------------------------------------------------

    @classmethod
    def gaussian_1d(cls, mass: float, components) -> "NonRelField":
        """Build a 1-D field from (weight, center, velocity, width) tuples."""
        comps = [
            GaussComponent(complex(w), (AxisGaussian(mass, float(x0), float(u), float(s)),))
            for (w, x0, u, s) in components
        ]
        return cls(comps)

    # -- evaluation -----------------------------------------------------

    def _component_values(self, x, t: float):
        """Component values psi_c(x, t), shape S + (C,).

        For config_dim 1 the coordinate carries no component axis.
        """
        x = np.asarray(x, dtype=float)
        if self.config_dim == 1:
            x = x[..., None]
        vals = []
        for c in self.components:
            lg = sum(ax.log_value(x[..., i], t) for i, ax in enumerate(c.axes))
            vals.append(c.weight * np.exp(lg))
        return np.stack(vals, axis=-1)

    def psi(self, x, t: float):
        return self._component_values(x, t).sum(axis=-1)

    def density(self, x, t: float):
        p = self.psi(x, t)
        return (p * p.conj()).real

    def derivatives(self, x, t: float):
        """psi, its gradient and the per-axis second derivatives.

        Returns
        -------
        psi : shape S
        grad : shape S + (D,)
        d2 : shape S + (D,)
            Unmixed second derivatives d^2 psi / dx_i^2.
        """
        x = np.asarray(x, dtype=float)
        xc = x[..., None] if self.config_dim == 1 else x
        vals = self._component_values(x, t)
        grad = np.zeros(vals.shape[:-1] + (self.config_dim,), dtype=complex)
        d2 = np.zeros_like(grad)
        for ci, c in enumerate(self.components):
            for i, ax in enumerate(c.axes):
                g1 = ax.dlog(xc[..., i], t)
                grad[..., i] += vals[..., ci] * g1
                d2[..., i] += vals[..., ci] * (ax.d2log(t) + g1 * g1)
        return vals.sum(axis=-1), grad, d2

    def velocity(self, x, t: float):
        """Guidance velocity v_i = Im(d_i psi / psi) / m_i.

        Vector input returns ``(v, valid)`` where ``valid`` flags points
        above the node threshold (velocities at invalid points are zeroed).
        Scalar-point input raises :class:`NodeProximity` below threshold.
        """
        psi, grad, _ = self.derivatives(x, t)
        dens = (psi * psi.conj()).real
        scalar = np.asarray(dens).ndim == 0
        safe = np.where(dens > 0, dens, 1.0)
        v = (psi.conj()[..., None] * grad).imag / safe[..., None]
        v /= np.asarray(self.masses)
        valid = dens > self.node_threshold
        if scalar:
            if not valid:
                raise NodeProximity(f"|psi|^2 = {float(dens):.3e} at x={x}, t={t}")
            return v
        v[~valid] = 0.0
        return v, valid

    def polar(self, x, t: float):
        """(R, Q) with Q = -sum_i d_i^2 R / (2 m_i R), from analytic derivatives."""
        psi, grad, d2 = self.derivatives(x, t)
        dens = (psi * psi.conj()).real
        if np.any(np.asarray(dens) <= self.node_threshold):
            if np.asarray(dens).ndim == 0:
                raise NodeProximity(f"|psi|^2 = {float(dens):.3e} at x={x}, t={t}")
        R = np.sqrt(dens)
        dR = (psi.conj()[..., None] * grad).real / R[..., None]
        d2R = ((psi.conj()[..., None] * d2).real + np.abs(grad) ** 2
               - dR**2) / R[..., None]
        Q = -np.sum(d2R / np.asarray(self.masses), axis=-1) / (2.0 * R)
        return R, Q

    def eval_point(self, x, t: float):
        """(psi, v, R, Q) at one configuration point."""
        v = self.velocity(x, t)
        R, Q = self.polar(x, t)
        return self.psi(x, t), v, float(R), float(Q)

    # -- geometry -------------------------------------------------------

    def sampling_window(self, t: float, *, nsigma: float = 8.0):
        """Per-axis (lo, hi) interval containing all but ~1e-15 of the mass."""
        los, his = [], []
        for i in range(self.config_dim):
            lo, hi = np.inf, -np.inf
            for c in self.components:
                ax = c.axes[i]
                center = ax.center + ax.velocity * t
                w = ax.physical_width(t)
                lo = min(lo, center - nsigma * w)
                hi = max(hi, center + nsigma * w)
            los.append(lo)
            his.append(hi)
        return list(zip(los, his))

    def norm_squared(self, t: float, points_per_axis: int = 2001) -> float:
        """Numerical L2 norm over the sampling window (trapezoid rule)."""
        window = self.sampling_window(t)
        if self.config_dim == 1:
            xs = np.linspace(window[0][0], window[0][1], points_per_axis)
            return float(np.trapezoid(self.density(xs, t), xs))
        xs = np.linspace(window[0][0], window[0][1], points_per_axis)
        ys = np.linspace(window[1][0], window[1][1], points_per_axis)
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
        dens = self.density(grid, t)
        return float(np.trapezoid(np.trapezoid(dens, ys, axis=1), xs))
