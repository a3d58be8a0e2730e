"""Seeded search for fields whose density is nonnegative at the
preparation time but develops backflow before the measurement onset.

A two-mode superposition cannot provide this: its density pattern depends
on the single phase difference and translates rigidly, so a negative
minimum exists at every time or never.  Three or more modes beat against
each other non-rigidly, and a random scan over small mode sets finds
states where j0(., 0) >= 0 everywhere while j0 dips strongly negative at
a later time.  The first hit under a fixed seed becomes the shipped
reference scenario; none of its numbers are hand-picked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .relativistic import RelField
from .sigma import (SIGMA_MINUS, SIGMA_PLUS, ScenarioWindow, classify_grid,
                    verify_window)


@dataclass
class SearchResult:
    field: RelField
    t1: float
    min_j0_t0: float
    min_j0_t1: float
    trial: int
    seed: int

    @property
    def window(self) -> ScenarioWindow:
        return ScenarioWindow(self.field, 0.0, self.t1)


def search_prediction_scenario(seed: int = 2024, *, max_trials: int = 2000,
                               n_modes_range=(3, 5), box_length: float = 2.0 * np.pi,
                               mass: float = 1.0, t_max: float = 6.0,
                               depth_fraction: float = 0.1,
                               require_sigma_plus: bool = True,
                               n_x: int = 2048, n_t: int = 480) -> SearchResult:
    """Scan random small mode sets for a usable prediction scenario.

    Acceptance of a trial requires, on fine grids:

    * min_x j0(x, 0) >= 0 (preparation-time positivity),
    * min_x j0(x, t1) < -depth_fraction * mean for some t1 in (0, t_max],
    * (optionally) both Sigma-minus and Sigma-plus nonempty when the
      hyperplane at that t1 is classified.

    Deterministic for a fixed seed; returns the first hit.
    """
    rng = np.random.default_rng(seed)
    mean = 1.0 / box_length
    xs = np.linspace(0.0, box_length, n_x, endpoint=False)
    ts = np.linspace(0.0, t_max, n_t + 1)[1:]

    for trial in range(max_trials):
        n_modes = int(rng.integers(n_modes_range[0], n_modes_range[1] + 1))
        ks = rng.choice(np.arange(-3, 6), size=n_modes, replace=False)
        mags = rng.uniform(0.15, 1.0, size=n_modes)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)
        amps = mags * np.exp(1j * phases)
        try:
            field = RelField(mass, box_length,
                             [(a, 2.0 * np.pi * k / box_length)
                              for a, k in zip(amps, ks)])
        except Exception:
            continue

        j0_t0, _ = field.current(np.zeros(n_x), xs)
        if float(np.min(j0_t0)) < 0.0:
            continue

        j0_grid, _ = field.current(ts[:, None] * np.ones(n_x), xs[None, :])
        per_t_min = j0_grid.min(axis=1)
        i_best = int(np.argmin(per_t_min))
        if per_t_min[i_best] >= -depth_fraction * mean:
            continue
        t1 = float(ts[i_best])

        window = ScenarioWindow(field, 0.0, t1)
        if not verify_window(window).passed:
            continue
        if require_sigma_plus:
            cls = classify_grid(window, 400)
            if not (np.any(cls.labels == SIGMA_MINUS)
                    and np.any(cls.labels == SIGMA_PLUS)):
                continue
        return SearchResult(field=field, t1=t1,
                            min_j0_t0=float(np.min(j0_t0)),
                            min_j0_t1=float(per_t_min[i_best]),
                            trial=trial, seed=seed)
    raise RuntimeError(f"no scenario found in {max_trials} trials (seed={seed})")
