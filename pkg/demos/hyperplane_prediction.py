"""Predicting what a detector switched on at t1 actually measures.

Conventionally one would read j0(., t1) as the detection density, but j0
is negative in places for this field.  The trajectory picture fixes the
prediction: only first arrivals at t1 count.  Cells where j0 < 0
(Sigma-minus) register nothing, and neither do positive cells whose
backward trace re-enters the future of t1 (Sigma-plus): their flux is
borrowed from a later, already-truncated pass.  The measurable density
is j0 on the remainder and exactly zero on the excluded cells.

A 100k-trajectory Monte Carlo of first crossings is the referee.

Run:  python3 demos/hyperplane_prediction.py   (about 10 s)
"""

import os

import numpy as np

from pilotwave import classify_grid, l1_distance, mc_first_crossing
from pilotwave.scenario import build_window, load
from pilotwave.sigma import LABEL_NAMES, SIGMA_MINUS, SIGMA_PLUS
from pilotwave.svgplot import density_figure

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "output")


def main():
    os.makedirs(OUT, exist_ok=True)
    sc = load(os.path.join(HERE, "..", "scenarios",
                           "prediction_reference.json"))
    window = build_window(sc)

    cls = classify_grid(window, 2000)
    counts = cls.counts()
    print("cell classification at t1:")
    for name in LABEL_NAMES.values():
        print(f"  {name:13s} {counts[name]:5d}")
    print(f"flux through the admitted cells: {cls.flux:.4f} (should be ~1)")

    n, bins, seed = 100_000, 100, 1
    print(f"\nintegrating {n} trajectories from the t0 equilibrium ensemble...")
    mc = mc_first_crossing(window, n, seed, bins)
    pred = cls.bin_masses(mc.edges)
    l1 = l1_distance(mc.masses, pred)
    dx = cls.cell_width
    cell = np.clip((mc.crossings / dx).astype(int), 0, len(cls.grid) - 1)
    leak = np.mean(np.isin(cls.labels[cell], [SIGMA_PLUS, SIGMA_MINUS]))
    print(f"L1(monte carlo, prediction) = {l1:.4f}")
    print(f"first-crossing mass inside excluded cells: {leak:.5f}")

    # contrast: the clipped j0 guess disagrees with the trajectory count
    from pilotwave import clipped_conventional_density
    _, clipped = clipped_conventional_density(window, 2000)
    clipped_masses = np.zeros(bins)
    which = np.clip(np.searchsorted(mc.edges, cls.grid, side="right") - 1,
                    0, bins - 1)
    np.add.at(clipped_masses, which, clipped * dx)
    print(f"L1(monte carlo, clipped-j0 guess) = "
          f"{l1_distance(mc.masses, clipped_masses):.4f}")

    centers = 0.5 * (mc.edges[:-1] + mc.edges[1:])
    bands, lo = [], None
    for i, lab in enumerate(cls.labels):
        zeroed = lab in (SIGMA_PLUS, SIGMA_MINUS)
        if zeroed and lo is None:
            lo = cls.grid[i] - 0.5 * dx
        elif not zeroed and lo is not None:
            bands.append((lo, cls.grid[i] - 0.5 * dx))
            lo = None
    if lo is not None:
        bands.append((lo, cls.grid[-1] + 0.5 * dx))
    fig = density_figure(centers, [mc.masses, pred], zero_bands=bands,
                         labels=["monte carlo", "prediction"],
                         title="first-crossing density at t1")
    path = os.path.join(OUT, "hyperplane_prediction.svg")
    fig.save(path)
    print(f"figure -> {path}")


if __name__ == "__main__":
    main()
