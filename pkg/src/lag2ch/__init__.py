"""Lagrangian semi-discrete solver for the two-component Camassa-Holm system."""
from ._jit import JIT_ENABLED, set_threads, use_jit
from .core import Grid, GridFunction, dminus, dplus, kernel_apply, norm, operator_norm, young_bound
from .dynamics import (LagrangianState, SetBReport, SystemState, bid_residual, compute_RQ, hamiltonian,
                       kernel_rhs, momentum, state_rhs, validate_setB)
from .eulerian import (EulerianField, characteristics_export, e_norm_distance, interpolants,
                       push_to_eulerian)
from .greens import (DegenerateWronskian, KernelFactors, KernelSet, NegativeCoefficient, build_kernels,
                     constant_greens, factor_kernels, identity_residuals, lattice_sums, shoot_decaying,
                     sign_violations, symmetry_defects)
from .initdata import (AtomicMeasure, EulerianInit, gaussian, lagrangian_from_eulerian, peakon_pair,
                       smooth_init)
from .timeint import SimConfig, SimulationAborted, StepRejected, Trajectory, simulate

__version__ = "0.1.0"
__all__ = [k for k in dir() if not k.startswith("_")]
