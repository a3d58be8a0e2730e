"""Analytic Klein-Gordon wave fields on a periodic box.

A field is a finite superposition of positive-frequency plane-wave modes
in natural units (hbar = c = 1) with metric signature (+,-,-,-).  Every
quantity -- the wave function, its derivatives, the conserved current,
the polar amplitude/phase data, the quantum potential and the effective
squared mass -- is evaluated in closed form; no finite differences enter
the production path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NodeProximity, PhysicsInvariantViolated

#: polar quantities are invalid where |psi|^2 falls below this fraction
#: of the box-average density
NODE_THRESHOLD_FRACTION = 1e-10


@dataclass(frozen=True)
class FourVector:
    """A four-vector with contravariant components under (+,-,-,-).

    ``lowered()`` flips the sign of the spatial part, so ``a.dot(b)``
    is the Minkowski inner product a^mu b_mu.
    """

    time_component: float
    space_components: np.ndarray

    def lowered(self) -> "FourVector":
        return FourVector(self.time_component, -np.asarray(self.space_components))

    def dot(self, other: "FourVector") -> float:
        return self.time_component * other.time_component - float(
            np.dot(self.space_components, other.space_components)
        )

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.time_component], np.atleast_1d(self.space_components)))


@dataclass(frozen=True)
class Mode:
    """One positive-frequency plane-wave component c * exp(-i(w t - p.x)).

    ``frequency`` is always the positive root of the mass-shell relation
    w^2 = p^2 + m^2; it is derived, never supplied.
    """

    amplitude: complex
    momentum: np.ndarray
    frequency: float

    @staticmethod
    def create(amplitude: complex, momentum, mass: float) -> "Mode":
        p = np.atleast_1d(np.asarray(momentum, dtype=float))
        omega = float(np.sqrt(np.dot(p, p) + mass * mass))
        return Mode(complex(amplitude), p, omega)


@dataclass(frozen=True)
class PolarData:
    """Polar decomposition psi = R exp(iS) at one spacetime point.

    ``S_gradient`` holds the covariant components d_mu S, recovered from
    the current rather than the (multivalued) phase itself.
    """

    R: float
    S_gradient: FourVector
    Q: float
    meff2: float


class RelField:
    """Finite superposition of on-shell plane waves on a periodic box.

    Immutable after construction; all evaluation methods are pure and are
    safe to call concurrently.  Amplitudes are rescaled on construction so
    that the current's time component integrates to one over the box
    (``normalize=False`` keeps the raw amplitudes).

    Parameters
    ----------
    mass : float
        Particle mass (> 0), in natural units.
    box_length : float
        Spatial period L; every momentum must be an integer multiple
        of 2*pi/L.
    modes : sequence of (amplitude, momentum)
        Momentum may be a scalar (1-D) or a d-vector.
    """

    def __init__(self, mass: float, box_length: float, modes, *, normalize: bool = True):
        if mass <= 0:
            raise PhysicsInvariantViolated("mass must be positive")
        if box_length <= 0:
            raise PhysicsInvariantViolated("box_length must be positive")
        if not modes:
            raise PhysicsInvariantViolated("a field needs at least one mode")

        built = [Mode.create(a, p, mass) for a, p in modes]
        dim = built[0].momentum.size
        if any(m.momentum.size != dim for m in built):
            raise PhysicsInvariantViolated("all modes must share the spatial dimension")
        if dim not in (1, 2, 3):
            raise PhysicsInvariantViolated("spatial dimension must be 1, 2 or 3")

        dk = 2.0 * np.pi / box_length
        for m in built:
            k = m.momentum / dk
            if np.any(np.abs(k - np.round(k)) > 1e-9 * (1.0 + np.abs(k))):
                raise PhysicsInvariantViolated(
                    f"momentum {m.momentum} is not a multiple of 2*pi/L"
                )
        keys = {tuple(np.round(m.momentum / dk).astype(int)) for m in built}
        if len(keys) != len(built):
            raise PhysicsInvariantViolated("duplicate momenta; merge amplitudes first")

        self.mass = float(mass)
        self.box_length = float(box_length)
        self.spatial_dim = dim

        # cross terms integrate to zero over the box, so the total current
        # flux is 2 L^d sum_k w_k |c_k|^2 at every time
        raw_flux = 2.0 * box_length**dim * sum(
            m.frequency * abs(m.amplitude) ** 2 for m in built
        )
        self.normalization = 1.0 / np.sqrt(raw_flux) if normalize else 1.0
        self.modes = tuple(
            Mode(m.amplitude * self.normalization, m.momentum, m.frequency) for m in built
        )

        self._amps = np.array([m.amplitude for m in self.modes])
        self._omegas = np.array([m.frequency for m in self.modes])
        self._ps = np.stack([m.momentum for m in self.modes])  # (K, d)
        # box-average of |psi|^2 (cross terms average to zero)
        self.mean_density = float(np.sum(np.abs(self._amps) ** 2))
        self.node_threshold = NODE_THRESHOLD_FRACTION * self.mean_density

    # -- evaluation -----------------------------------------------------

    def _phases(self, t, x):
        """Mode phase factors c_k exp(-i phi_k), broadcast over points.

        ``t`` has shape S.  For d = 1 the coordinate ``x`` carries no
        component axis (shape S); for d > 1 it has shape S + (d,).
        Returns shape S + (K,).
        """
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.spatial_dim == 1:
            x = x[..., None]
        phi = self._omegas * t[..., None] - np.einsum("...d,kd->...k", x, self._ps)
        return self._amps * np.exp(-1j * phi)

    def psi(self, t, x):
        """Wave function psi(t, x); accepts scalars or broadcastable arrays."""
        return self._phases(t, x).sum(axis=-1)

    def derivatives(self, t, x):
        """psi and its first derivatives, all analytic.

        Returns
        -------
        psi : complex
        dt_psi : complex
        dx_psi : ndarray, shape (..., d)
            Spatial gradient (lower-index coordinate derivatives d_i psi).
        """
        terms = self._phases(t, x)
        psi = terms.sum(axis=-1)
        dt_psi = (-1j * self._omegas * terms).sum(axis=-1)
        dx_psi = np.einsum("...k,kd->...d", 1j * terms, self._ps)
        return psi, dt_psi, dx_psi

    def density(self, t, x):
        """|psi|^2."""
        p = self.psi(t, x)
        return (p * p.conj()).real

    def current(self, t, x):
        """Contravariant conserved current j^mu = i psi* d^mu psi - c.c.

        Returns ``(j0, jvec)`` where ``j0`` is j^0 and ``jvec`` the
        spatial components j^i, broadcast over the input points.
        For a single mode of amplitude c this is 2|c|^2 (w, p).
        """
        psi, dt_psi, dx_psi = self.derivatives(t, x)
        j0 = -2.0 * (psi.conj() * dt_psi).imag
        jvec = 2.0 * (psi.conj()[..., None] * dx_psi).imag
        return j0, jvec

    def current_fourvector(self, t: float, x) -> FourVector:
        j0, jvec = self.current(t, x)
        return FourVector(float(j0), np.atleast_1d(jvec))

    def dalembertian_R_over_R(self, t, x):
        """(box R)/R from analytic psi-derivatives.

        Uses R^2 = psi* psi, so
        R box R = Re(psi* box psi) + d^mu psi* d_mu psi - d^mu R d_mu R
        with box psi = -m^2 psi for on-shell modes.  Raises nothing; the
        caller decides how close to a node is too close.
        """
        psi, dt_psi, dx_psi = self.derivatives(t, x)
        dens = (psi * psi.conj()).real
        R = np.sqrt(dens)
        dt_R = (psi.conj() * dt_psi).real / R
        dx_R = (psi.conj()[..., None] * dx_psi).real / R[..., None]
        grad_psi_sq = np.abs(dt_psi) ** 2 - np.sum(np.abs(dx_psi) ** 2, axis=-1)
        grad_R_sq = dt_R**2 - np.sum(dx_R**2, axis=-1)
        box_R = (-self.mass**2 * dens + grad_psi_sq - grad_R_sq) / R
        return box_R / R

    def polar(self, t: float, x) -> PolarData:
        """Polar decomposition at a single point.

        Raises
        ------
        NodeProximity
            If |psi|^2 is below the node threshold.
        """
        dens = float(self.density(t, x))
        if dens <= self.node_threshold:
            raise NodeProximity(f"|psi|^2 = {dens:.3e} at (t={t}, x={x})")
        R = np.sqrt(dens)
        j0, jvec = self.current(t, x)
        # dx^mu/ds = -d^mu S / m = j^mu/(2 m R^2)  =>  d_mu S = -j_mu / (2 R^2)
        dS = FourVector(-float(j0) / (2.0 * dens), np.atleast_1d(jvec) / (2.0 * dens))
        box_R_over_R = float(self.dalembertian_R_over_R(t, x))
        Q = box_R_over_R / (2.0 * self.mass)
        meff2 = self.mass**2 + box_R_over_R
        return PolarData(R=float(R), S_gradient=dS, Q=Q, meff2=meff2)


def two_mode_reference(mass: float = 1.0, omega2: float = 10.0,
                       amplitudes=(1.0, 0.5), *, normalize: bool = True) -> RelField:
    """The standard two-mode backflow field: one mode at rest (w1 = m) and
    one boosted mode with frequency ``omega2``, on the box that makes the
    boosted momentum the fundamental 2*pi/L.

    With amplitudes (1, 0.5) and frequencies (1, 10) the unnormalized
    current minimum is 2(1 + 2.5 - 0.5 * 11) = -4.
    """
    p2 = np.sqrt(omega2**2 - mass**2)
    box = 2.0 * np.pi / p2
    return RelField(mass, box, [(amplitudes[0], 0.0), (amplitudes[1], p2)],
                    normalize=normalize)
