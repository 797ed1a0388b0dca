"""POD reduced-order models for incompressible flow with a projection-based
variational multiscale eddy-viscosity closure."""

from .fe_core import FeFunction, FeSpace, build_space, h1_semi_inner, l2_inner, load_vector, trilinear
from .manufactured import ManufacturedProblem, SnapshotSet, generate_snapshots
from .pod import PodBasis, build_basis, correlation_matrix, pod, sym_eig_descending
from .rom import ClosureConfig, ReducedModel, Variant, build_model, vms_matrix
from .integrator import Trajectory, simulate, stability_check, step
from .harness import dt_sweep, final_l2_error, loglog_regression, r_cutoff_sweep

__version__ = "0.1.0"

__all__ = [
    "FeFunction", "FeSpace", "build_space", "h1_semi_inner", "l2_inner", "load_vector",
    "trilinear",
    "ManufacturedProblem", "SnapshotSet", "generate_snapshots",
    "PodBasis", "build_basis", "correlation_matrix", "pod", "sym_eig_descending",
    "ClosureConfig", "ReducedModel", "Variant", "build_model", "vms_matrix",
    "Trajectory", "simulate", "stability_check", "step",
    "dt_sweep", "final_l2_error", "loglog_regression", "r_cutoff_sweep",
]
