"""Pilot-wave trajectory laboratory.

Closed-form Klein-Gordon and Schrodinger wave fields with Bohmian
guidance: trajectory integration, hyperplane classification of
measurable detection probabilities, equivariant ensembles and von
Neumann channel measurements.
"""

__version__ = "1.0.0"

from .errors import (ExcessNodeAborts, NodeAbort, NodeProximity,
                     PhysicsInvariantViolated, PilotwaveError,
                     PreconditionViolated, ScenarioError, StepLimitExceeded,
                     UnresolvedExcess, WindowTooSmall)
from .relativistic import FourVector, Mode, PolarData, RelField, two_mode_reference
from .schrodinger import AxisGaussian, GaussComponent, NonRelField
from .guidance import (IntegratorConfig, Termination, Trajectory,
                       integrate_nonrel, integrate_rel,
                       integrate_two_particle, retrace_check, velocity_rel)
from .flows import flow, nonrel_rhs, rel_rhs
from .twoparticle import TwoParticleField
from .sigma import (ScenarioWindow, SigmaClassification, classify_grid,
                    classify_point, clipped_conventional_density,
                    find_backflow_trajectory, l1_distance, mc_first_crossing,
                    predict_density, scan_negative_density, verify_window)
from .ensembles import (Channel, ChannelOutcome, Ensemble, MeasurementScenario,
                        channel_exclusivity_check, collapsed_field,
                        effective_collapse_deviation, equivariance_test,
                        run_measurement, sample_density)
from .search import SearchResult, search_prediction_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
