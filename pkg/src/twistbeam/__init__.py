"""Twisted (Laguerre-Gauss) beam kinematics: modes, moments, centroid masses and dynamics."""
from .beamcore import (
    C,
    HBAR,
    M_ELECTRON,
    ELECTRON,
    PHOTON,
    BeamGeometry,
    ModeSpec,
    ParaxialityWarning,
    beam_geometry,
    convert_units,
    laguerre,
    zeta_of,
)
from .expectations import ConvergenceError, centroid_mass, mean_vz, moments, vz_spectrum
from .kinematics import CentroidState, boost, centroid, mass_energy_ratio, rest_frame
from .lgfield import CartesianGrid, FieldGrid, PolarQuadrature, UnderResolvedError, eval_mode, sample_grid
from .localfields import velocity_map
from .noninertial import IntegrationError, NoninertialFrame, integrate
from .propagator import PropagationPlan, fidelity, measure_vz, propagate

__version__ = "0.1.0"
