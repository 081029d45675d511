"""Neural-network variational solver for radial Dirac bound states.

Builds the discretized two-component radial Dirac operator on log or
uniform meshes, trains a small softplus network as the trial wave function
by minimizing the Rayleigh quotient of the shifted inverse operator (or a
projected variant for excited states), and checks everything against
analytic hydrogen solutions and a shift-invert reference eigensolver.
"""

from .analytic import count_nodes, hydrogen_energy, hydrogen_wavefunction
from .gradients import AdamState, LossGraph, adam_step
from .mesh import RadialMesh, build_log_mesh, build_uniform_mesh, inner_product
from .network import NetParams, forward, init_params
from .operator import (DiracOperator, DiracSeaError, RadialSpinor,
                       SingularShiftError, assemble, factorize_shifted,
                       reconstruct_G)
from .oracle import bound_states_below, shift_invert_eigs
from .potentials import (CoulombSpec, Potentials, UnitSystem, WoodsSaxonSpec,
                         eval_potentials)
from .solver import (ConvergenceTrace, OperatorStack, SolveConfig,
                     TrainResult, direct_loss, inverse_loss,
                     orthonormal_project, train_state)

__all__ = [
    "AdamState", "ConvergenceTrace", "CoulombSpec", "DiracOperator",
    "DiracSeaError", "LossGraph", "NetParams", "OperatorStack", "Potentials",
    "RadialMesh", "RadialSpinor", "SingularShiftError", "SolveConfig",
    "TrainResult", "UnitSystem", "WoodsSaxonSpec", "adam_step", "assemble",
    "bound_states_below", "build_log_mesh", "build_uniform_mesh",
    "count_nodes", "direct_loss", "eval_potentials", "factorize_shifted",
    "forward", "hydrogen_energy", "hydrogen_wavefunction", "init_params",
    "inner_product", "inverse_loss", "orthonormal_project", "reconstruct_G",
    "shift_invert_eigs", "train_state",
]
