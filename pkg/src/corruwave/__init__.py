"""Squeezed-light generation in corrugated, periodically poled LiNbO3 waveguides."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .materials import LINBO3, MaterialModel, Sellmeier, substrate_index, waveguide_index
from .modes import (CouplingSet, Device, GuidedMode, WaveguideSpec, build_mode, fundamental_mode,
                    linear_coupling, mismatches, nonlinear_coupling, qpm_period, single_mode_window,
                    solve_dispersion)
from .classical import BoundaryConditions, FieldState, linear_solution, solve_bvp
from .quantum import InputFieldSpec, InputMode, MomentSet, fundamental_matrix, squeeze_compound, squeeze_single
from .simulate import Drive, PointResult, run_point
from .design import DesignPoint, enhancement_factor, improvement_db, optimize_design
