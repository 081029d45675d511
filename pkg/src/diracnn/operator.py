# operator.py
#
# Dense discretization of the two-component radial Dirac Hamiltonian
#
#   H = [[ U,             kin*(-D + k/r) ],
#        [ kin*(D + k/r), W - 2 mc^2     ]]
#
# acting on stacked spinors phi = [F; G] over the interior points, plus an
# LU factorization of the shifted matrix (eps' I - H) that serves repeated
# forward and transposed solves, and the algebraic reconstruction of the
# small component G from F.
#
# The off-diagonal kinetic factor (c in atomic units, hbar*c in MeV/fm) is
# required for dimensional consistency. On the uniform mesh H is exactly
# symmetric; on the log mesh it is not, but it is self-adjoint under the
# quadrature-weighted inner product, so weighted Rayleigh quotients of it
# behave variationally either way.

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .mesh import RadialMesh, inner_product
from .potentials import Potentials, UnitSystem


class DiracSeaError(RuntimeError):
    """Raised when an energy wandered into the negative-energy branch."""


class SingularShiftError(RuntimeError):
    """Raised when eps' coincides with an eigenvalue of H."""


@dataclass
class RadialSpinor:
    """Paired large/small component samples on the interior mesh points."""

    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=float)
        self.G = np.asarray(self.G, dtype=float)
        if self.F.shape != self.G.shape or self.F.ndim != 1:
            raise ValueError("F and G must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.F)) and np.all(np.isfinite(self.G))):
            raise ValueError("spinor components must be finite")

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.F, self.G])

    @staticmethod
    def from_stacked(phi: np.ndarray) -> "RadialSpinor":
        n = phi.size // 2
        return RadialSpinor(F=phi[:n].copy(), G=phi[n:].copy())

    def normalized(self, mesh: RadialMesh) -> "RadialSpinor":
        nrm = inner_product(self, self, mesh)
        if nrm <= 0:
            raise ValueError("cannot normalize a zero spinor")
        s = 1.0 / np.sqrt(nrm)
        return RadialSpinor(F=self.F * s, G=self.G * s)


@dataclass
class DiracOperator:
    """Dense (2M-2) x (2M-2) radial Dirac matrix with its ingredients."""

    H: np.ndarray
    kappa: int
    units: UnitSystem
    mesh: RadialMesh
    potentials: Potentials = field(repr=False)

    @property
    def size(self) -> int:
        return self.H.shape[0]

    def weighted2(self) -> np.ndarray:
        """Quadrature weights duplicated over both spinor blocks."""
        return np.concatenate([self.mesh.weights, self.mesh.weights])


def assemble(potentials: Potentials, mesh: RadialMesh, kappa: int,
             units: UnitSystem) -> DiracOperator:
    """Build the dense radial Dirac matrix for one kappa block."""
    if kappa == 0:
        raise ValueError("kappa = 0 is not a valid Dirac quantum number")
    n = mesh.n_interior
    kin = units.kinetic_factor
    kr = np.diag(kappa / mesh.r)
    H = np.zeros((2 * n, 2 * n))
    H[:n, :n] = np.diag(potentials.U)
    H[:n, n:] = kin * (-mesh.D + kr)
    H[n:, :n] = kin * (mesh.D + kr)
    H[n:, n:] = np.diag(potentials.W - 2.0 * units.mc2)
    return DiracOperator(H=H, kappa=int(kappa), units=units, mesh=mesh,
                         potentials=potentials)


class ShiftedInverse:
    """LU factorization of (eps' I - H), reused for many solves.

    apply(v) computes (eps' I - H)^{-1} v; apply_transpose(v) solves against
    the transpose, which is what reverse-mode differentiation of the
    quadratic form phi^T B phi needs when B is not symmetric.
    """

    def __init__(self, op: DiracOperator, eps_prime: float):
        shifted = eps_prime * np.eye(op.size) - op.H
        anorm = float(np.max(np.sum(np.abs(shifted), axis=0)))
        lu, piv = lu_factor(shifted, overwrite_a=True, check_finite=False)
        # reciprocal condition estimate; pivot magnitudes alone are not a
        # reliable singularity signal for these matrices
        rcond = lapack.dgecon(lu, anorm, norm="1")[0]
        if rcond < 1e-15:
            raise SingularShiftError(
                "eps' coincides with an eigenvalue; perturb eps'"
            )
        self._lu = (lu, piv)
        self.eps_prime = float(eps_prime)
        self.op = op

    def apply(self, v: np.ndarray) -> np.ndarray:
        return lu_solve(self._lu, v, check_finite=False)

    def apply_transpose(self, v: np.ndarray) -> np.ndarray:
        return lu_solve(self._lu, v, trans=1, check_finite=False)


def factorize_shifted(op: DiracOperator, eps_prime: float) -> ShiftedInverse:
    return ShiftedInverse(op, eps_prime)


def g_denominator(eps_lag: float, potentials: Potentials, units: UnitSystem) -> np.ndarray:
    """eps - (V - S) + 2 mc^2: the denominator of the small-component map."""
    return eps_lag - potentials.W + 2.0 * units.mc2


def reconstruct_G(F: np.ndarray, eps_lag: float, potentials: Potentials,
                  mesh: RadialMesh, kappa: int, units: UnitSystem) -> np.ndarray:
    """Small component from the large one at a frozen energy eps_lag.

    G = kin * (dF/dr + (kappa/r) F) / (eps_lag - V + S + 2 mc^2).
    The denominator must stay positive; a non-positive value means eps_lag
    fell into the negative-energy branch.
    """
    denom = g_denominator(eps_lag, potentials, units)
    if np.any(denom <= 0.0):
        i = int(np.argmin(denom))
        raise DiracSeaError(
            f"small-component denominator <= 0 at r = {mesh.r[i]:.6g} "
            f"(value {denom[i]:.6g}); energy {eps_lag:.6g} lies in the Dirac sea"
        )
    return units.kinetic_factor * (mesh.D @ F + (kappa / mesh.r) * F) / denom
