"""Scenario files: JSON descriptions of fields, windows and runs.

One scenario per file, schema_version 1.  Serialization is canonical
(sorted keys, fixed separators) so the content digest is stable and
parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .ensembles import Channel, MeasurementScenario
from .errors import ScenarioError
from .relativistic import RelField
from .schrodinger import NonRelField
from .sigma import ScenarioWindow
from .twoparticle import TwoParticleField

SCHEMA_VERSION = 1
KINDS = ("rel_field", "nonrel_field", "measurement", "window", "two_particle")

DEFAULT_RUN = {"grid": 2000, "n": 100_000, "seed": 1, "bins": 100}


@dataclass(frozen=True)
class Scenario:
    kind: str
    physics: dict
    run: dict
    schema_version: int = SCHEMA_VERSION

    def canonical(self) -> str:
        doc = {"schema_version": self.schema_version, "kind": self.kind,
               "physics": self.physics, "run": self.run}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def run_param(self, name: str, override=None):
        if override is not None:
            return override
        return self.run.get(name, DEFAULT_RUN.get(name))


def _complex_pair(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise ScenarioError(f"expected number or [re, im], got {v!r}")


def _pair(z: complex):
    return [float(z.real), float(z.imag)]


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"unknown scenario kind {kind!r}")
    physics = doc.get("physics")
    if not isinstance(physics, dict):
        raise ScenarioError("missing physics section")
    run = doc.get("run", {})
    if not isinstance(run, dict):
        raise ScenarioError("run section must be an object")
    return Scenario(kind=kind, physics=physics, run=run, schema_version=version)


def load(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc


def save(scenario: Scenario, path):
    doc = json.loads(scenario.canonical())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


# -- builders ------------------------------------------------------------


def _require(physics: dict, *names):
    for name in names:
        if name not in physics:
            raise ScenarioError(f"physics section missing {name!r}")


def build_rel_field(sc: Scenario) -> RelField:
    p = sc.physics
    _require(p, "mass", "box_length", "modes")
    modes = [(_complex_pair(m["amplitude"]), m["momentum"]) for m in p["modes"]]
    return RelField(float(p["mass"]), float(p["box_length"]), modes,
                    normalize=bool(p.get("normalize", True)))


def build_window(sc: Scenario) -> ScenarioWindow:
    _require(sc.physics, "t0", "t1")
    return ScenarioWindow(build_rel_field(sc), float(sc.physics["t0"]),
                          float(sc.physics["t1"]))


def build_nonrel_field(sc: Scenario) -> NonRelField:
    p = sc.physics
    _require(p, "mass", "components")
    comps = [(_complex_pair(c["weight"]), float(c["center"]),
              float(c["velocity"]), float(c["width"]))
             for c in p["components"]]
    return NonRelField.gaussian_1d(float(p["mass"]), comps)


def build_measurement(sc: Scenario) -> MeasurementScenario:
    p = sc.physics
    _require(p, "channels")
    channels = [Channel(coefficient=_complex_pair(c["coefficient"]),
                        system_center=float(c["system_center"]),
                        system_velocity=float(c.get("system_velocity", 0.0)),
                        system_width=float(c["system_width"]),
                        drift_velocity=float(c["drift_velocity"]))
                for c in p["channels"]]
    return MeasurementScenario(
        channels=channels,
        system_mass=float(p.get("system_mass", 1.0)),
        pointer_mass=float(p.get("pointer_mass", 500.0)),
        pointer_width=float(p.get("pointer_width", 0.1)),
        final_time=float(p.get("final_time", 1.0)),
    )


def build_two_particle(sc: Scenario) -> TwoParticleField:
    p = sc.physics
    _require(p, "mass", "box_length", "modes_f", "modes_g")
    to_modes = lambda ms: [(_complex_pair(m["amplitude"]), m["momentum"]) for m in ms]
    return TwoParticleField(float(p["mass"]), float(p["box_length"]),
                            to_modes(p["modes_f"]), to_modes(p["modes_g"]),
                            symmetrized=bool(p.get("symmetrized", True)))


# -- writers for shipped scenarios ----------------------------------------


def rel_field_scenario(field: RelField, *, t0=None, t1=None, run=None) -> Scenario:
    """Scenario document for an existing field (window if t0/t1 given).

    Amplitudes are stored unnormalized-as-built divided back by the
    normalization factor, so rebuilding reproduces the same field.
    """
    modes = [{"amplitude": _pair(m.amplitude / field.normalization),
              "momentum": (float(m.momentum[0]) if field.spatial_dim == 1
                           else [float(v) for v in m.momentum])}
             for m in field.modes]
    physics = {"mass": field.mass, "box_length": field.box_length,
               "modes": modes, "normalize": True}
    kind = "rel_field"
    if t0 is not None or t1 is not None:
        physics["t0"] = float(t0)
        physics["t1"] = float(t1)
        kind = "window"
    return Scenario(kind=kind, physics=physics, run=dict(run or {}))
