"""Finite-volume solver for self-organized hydrodynamics with congestion.

The model couples a continuity equation for the density with a momentum
balance whose velocity direction lives on the unit circle; short-range
repulsion enters through a pressure that diverges at the congestion
density.  The solver keeps the stiff pressure part implicit (one elliptic
solve per step), so its stability does not degrade as the stiffness
parameter vanishes, and the density stays below the congestion bound by
construction.  A two-fluid variant models counterflowing crowds.
"""

from .core import (BC_OUTFLOW, BC_PERIODIC, CONGESTION_TOL, RHO_FLOOR,
                   FieldState, Grid, ModelParams, make_grid, omega_of,
                   total_mass, wrap_index)
from .pressure import PressureModel, make_pressure
from .scheme import (EllipticSystem, StepReport, ap_step, assemble_elliptic,
                     char_speeds_relax, conservative_step, diffusion_coeff,
                     explicit_step, newton_elliptic, relaxation_step)
from .analysis import (AngleState, WaveDecomposition, conservative_vars, g_of,
                       mach_number, matrix_A, rh_shock_speed,
                       shock_curve_residual, soh_char_speeds)
from .scenarios import (RiemannSpec, ShockTrack, congested_fraction,
                        init_collision, init_riemann, track_shock)
from .twofluid import (LaneDiagnostics, TwoFluidState, init_crowd,
                       lane_diagnostics, twofluid_conservative_step,
                       twofluid_relaxation_step, twofluid_step)

__version__ = "0.1.0"
