"""Finite-element homogenization laboratory on sectoral domains.

Builds graded sector meshes, solves heterogeneous elliptic problems with
periodic-coefficient microstructure, extracts sector-mode coefficients, and
compares the plain corrector expansion against the corner-adapted one through
shell-wise energy errors, growth profiles, and excess-decay measurements.
"""

from .geometry import SectorDomain, TriMesh, build_sector_mesh, locate_point, shell_elements
from .fields import (CheckerboardField, ConstantField, GenericPeriodicField,
                     RotatedPeriodicField, default_periodic_cell, eval_coeff,
                     normalize_to_identity)
from .fem import (FEFunction, SparseSystem, assemble_load_div, assemble_load_scalar,
                  assemble_stiffness, energy_seminorm_on, gradient_p0,
                  recover_gradient_nodal, solve_cg)
from .cell import (CellCorrectors, PulledBackCorrectors, homogenized_matrix,
                   solve_cell_corrector, solve_corrector_suite, solve_flux_corrector,
                   sublinearity_report)
from .singular import CutoffBump, SingularFunction, eval_cutoff, eval_tau
from .correctors import (ansatz_residual_check, growth_profile,
                         solve_corner_corrector, solve_dirichlet_corrector)
from .expansion import (ExpansionBundle, assemble_bundle, build_u_reg,
                        classical_expansion, default_forcing, extract_gamma,
                        hybrid_expansion, solve_pair)
from .analysis import (ExperimentReport, excess, excess_decay_experiment,
                       gain_report, loglog_slope, shell_error_curve)
from .extension import PolarField, extend, flux_check, sector_flux_balance
from .config import RunConfig

__version__ = "0.1.0"
