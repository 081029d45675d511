import numpy as np
import pytest

from diracnn.mesh import build_log_mesh
from diracnn.operator import assemble
from diracnn.potentials import CoulombSpec, eval_potentials
from diracnn.solver import OperatorStack


def log_box_mesh(box: float, M: int, x0: float = -10.0):
    return build_log_mesh(x0, float(np.log(box + np.exp(x0))), M)


@pytest.fixture(scope="session")
def hydrogen_small():
    """Hydrogen kappa=-1 on a coarse log mesh: cheap enough for dense eig."""
    spec = CoulombSpec()
    mesh = log_box_mesh(20.0, 100)
    pots = eval_potentials(spec, mesh)
    units = spec.units()
    op = assemble(pots, mesh, -1, units)
    return OperatorStack(mesh=mesh, potentials=pots, units=units, kappa=-1,
                         operator=op)


@pytest.fixture(scope="session")
def hydrogen_small_dense(hydrogen_small):
    """Full dense spectrum of the coarse operator: the independent route."""
    vals, vecs = np.linalg.eig(hydrogen_small.operator.H)
    order = np.argsort(vals.real)
    return vals.real[order], vecs.real[:, order]


@pytest.fixture(scope="session")
def hydrogen_paper_mesh():
    """Hydrogen kappa=-1 at the production resolution (box 20, M=1700)."""
    spec = CoulombSpec()
    mesh = log_box_mesh(20.0, 1700)
    pots = eval_potentials(spec, mesh)
    units = spec.units()
    op = assemble(pots, mesh, -1, units)
    return OperatorStack(mesh=mesh, potentials=pots, units=units, kappa=-1,
                         operator=op)
