"""Two-particle relativistic wave functions on a periodic box (1+1 D each).

For free fields the two-particle wave function is realized directly as a
(symmetrized) product of single-particle plane-wave superpositions,

    psi(x1, x2) = [f(x1) g(x2) + g(x1) f(x2)] / sqrt(2),

each argument a full spacetime point.  Per-particle currents
j_a^mu = i psi* d_a^mu psi - c.c. drive the coupled guidance equations,
and the quantum potential sums the per-particle d'Alembertians of R --
the channel through which one particle's motion depends on the other's
instantaneous spacetime position.
"""

from __future__ import annotations

import numpy as np

from .errors import NodeProximity
from .relativistic import RelField


class TwoParticleField:
    """Symmetrized or plain product of two mode superpositions.

    ``modes_f`` and ``modes_g`` are sequences of (amplitude, momentum)
    pairs; amplitudes are used raw (velocities are insensitive to the
    overall normalization).
    """

    def __init__(self, mass: float, box_length: float, modes_f, modes_g,
                 *, symmetrized: bool = True):
        self.f = RelField(mass, box_length, modes_f, normalize=False)
        self.g = RelField(mass, box_length, modes_g, normalize=False)
        if self.f.spatial_dim != 1 or self.g.spatial_dim != 1:
            raise ValueError("two-particle fields are 1+1 dimensional per particle")
        self.mass = float(mass)
        self.box_length = float(box_length)
        self.symmetrized = bool(symmetrized)
        scale = self.f.mean_density * self.g.mean_density
        self.node_threshold = 1e-10 * (2.0 * scale if symmetrized else scale)

    # -- evaluation -----------------------------------------------------

    def _parts(self, p1, p2):
        """Values and first derivatives of f, g at both spacetime points."""
        t1, x1 = p1
        t2, x2 = p2
        F1 = self.f.derivatives(t1, x1)
        G2 = self.g.derivatives(t2, x2)
        if not self.symmetrized:
            return F1, G2, None, None
        G1 = self.g.derivatives(t1, x1)
        F2 = self.f.derivatives(t2, x2)
        return F1, G2, G1, F2

    def psi(self, p1, p2):
        F1, G2, G1, F2 = self._parts(p1, p2)
        if not self.symmetrized:
            return F1[0] * G2[0]
        return (F1[0] * G2[0] + G1[0] * F2[0]) / np.sqrt(2.0)

    def psi_and_gradients(self, p1, p2):
        """psi and the four coordinate derivatives (d_t1, d_x1, d_t2, d_x2).

        Spatial entries are the lower-index coordinate derivatives; the
        1-D spatial component is unpacked from the single-particle fields.
        """
        F1, G2, G1, F2 = self._parts(p1, p2)
        f1, dtf1, dxf1 = F1[0], F1[1], F1[2][..., 0]
        g2, dtg2, dxg2 = G2[0], G2[1], G2[2][..., 0]
        if not self.symmetrized:
            psi = f1 * g2
            return psi, (dtf1 * g2, dxf1 * g2, f1 * dtg2, f1 * dxg2)
        g1, dtg1, dxg1 = G1[0], G1[1], G1[2][..., 0]
        f2, dtf2, dxf2 = F2[0], F2[1], F2[2][..., 0]
        r = 1.0 / np.sqrt(2.0)
        psi = (f1 * g2 + g1 * f2) * r
        d_t1 = (dtf1 * g2 + dtg1 * f2) * r
        d_x1 = (dxf1 * g2 + dxg1 * f2) * r
        d_t2 = (f1 * dtg2 + g1 * dtf2) * r
        d_x2 = (f1 * dxg2 + g1 * dxf2) * r
        return psi, (d_t1, d_x1, d_t2, d_x2)

    def currents(self, p1, p2):
        """Contravariant per-particle currents (j1^mu, j2^mu) and |psi|^2."""
        psi, (d_t1, d_x1, d_t2, d_x2) = self.psi_and_gradients(p1, p2)
        dens = (psi * psi.conj()).real
        pc = psi.conj()
        j1 = np.stack([-2.0 * (pc * d_t1).imag, 2.0 * (pc * d_x1).imag], axis=-1)
        j2 = np.stack([-2.0 * (pc * d_t2).imag, 2.0 * (pc * d_x2).imag], axis=-1)
        return j1, j2, dens

    def velocities(self, p1, p2):
        """Guidance 4-velocities dx_a^mu/ds = j_a^mu / (2 m |psi|^2)."""
        j1, j2, dens = self.currents(p1, p2)
        if np.ndim(dens) == 0 and dens <= self.node_threshold:
            raise NodeProximity(f"|psi|^2 = {float(dens):.3e} at ({p1}, {p2})")
        scale = 2.0 * self.mass * dens
        return j1 / scale, j2 / scale

    def quantum_potential(self, p1, p2):
        """Q(x1, x2) = [box_1 R + box_2 R] / (2 m R), analytic derivatives.

        Needs per-particle second derivatives only through
        box_a psi = -m^2 psi (modes are on shell).
        """
        psi, grads = self.psi_and_gradients(p1, p2)
        dens = (psi * psi.conj()).real
        if np.ndim(dens) == 0 and dens <= self.node_threshold:
            raise NodeProximity(f"|psi|^2 = {float(dens):.3e} at ({p1}, {p2})")
        R = np.sqrt(dens)
        pc = psi.conj()
        total = 0.0
        for d_t, d_x in ((grads[0], grads[1]), (grads[2], grads[3])):
            dR_t = (pc * d_t).real / R
            dR_x = (pc * d_x).real / R
            grad_psi_sq = np.abs(d_t) ** 2 - np.abs(d_x) ** 2
            grad_R_sq = dR_t**2 - dR_x**2
            box_R = (-self.mass**2 * dens + grad_psi_sq - grad_R_sq) / R
            total = total + box_R
        return total / (2.0 * self.mass * R)
