"""A particle that crosses the detector plane three times.

The shipped reference field is a three-mode Klein-Gordon superposition
whose density is nonnegative everywhere at t = 0 but develops regions of
negative j0 before the measurement time t1.  Inside those regions the
guidance velocity points backwards in coordinate time, so some world
lines form an S: they cross t1 going forward, come back down through it,
and cross forward again.  Only the first crossing can register on a
detector that switches on at t1.

Run:  python3 demos/backflow_worldline.py
"""

import os

import numpy as np

from pilotwave import find_backflow_trajectory
from pilotwave.scenario import build_window, load
from pilotwave.svgplot import worldline_figure

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "output")


def main():
    os.makedirs(OUT, exist_ok=True)
    window = build_window(load(os.path.join(HERE, "..", "scenarios",
                                            "prediction_reference.json")))
    print(f"measurement hyperplane at t1 = {window.t1}")

    traj = find_backflow_trajectory(window)
    if traj is None:
        print("no S-shaped trajectory found (unexpected for this field)")
        return

    crossings = [e for e in traj.events if e.kind == "hyperplane_crossing"]
    turnings = [e for e in traj.events if e.kind == "turning_point"]
    print(f"start: (t, x) = ({traj.start[0]:.4f}, {traj.start[1]:.4f})")
    print(f"{len(crossings)} crossings of t1, {len(turnings)} turning points")
    for e in crossings[:5]:
        word = "forward" if e.direction > 0 else "backward"
        print(f"  s = {e.param:7.3f}  x = {e.coords[1]:7.4f}  {word}")

    field = window.field
    n_super = sum(1 for p in traj.points
                  if np.isfinite(p.speed_ratio) and p.speed_ratio > 1)
    print(f"{n_super} of {len(traj.points)} sampled points are superluminal")
    for e in turnings[:4]:
        t, x = e.coords
        meff2 = field.mass**2 + float(field.dalembertian_R_over_R(t, x))
        print(f"  turning point at x = {x:.4f}: meff^2 = {meff2:+.3f} "
              "(tachyonic where negative)")

    coords = traj.coords
    dirs = np.sign(np.gradient(coords[:, 0], traj.params))
    fig = worldline_figure(coords[:, 0], coords[:, 1], dirs, t1=window.t1,
                           title="S-shaped world line through the detector plane")
    path = os.path.join(OUT, "backflow_worldline.svg")
    fig.save(path)
    print(f"figure -> {path}")


if __name__ == "__main__":
    main()
