# potentials.py
#
# Vector/scalar potential combinations U = V + S and W = V - S on a mesh,
# together with the unit constants each system uses.
#
# Coulomb (hydrogen-like): Hartree atomic units, V = -Z/r, S = 0; the
# kinetic blocks carry the speed of light c and the rest-mass term is c^2.
# Woods-Saxon (neutrons): MeV/fm units, kinetic blocks carry hbar*c; the
# depth of W is tied to U through the spin-orbit strength lambda_n.

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import RadialMesh

SPEED_OF_LIGHT_AU = 137.035999       # Hartree atomic units
HBARC_MEV_FM = 197.32698             # MeV fm
NUCLEON_MC2_MEV = 939.0              # default neutron rest energy


@dataclass(frozen=True)
class UnitSystem:
    """Constants entering the radial Dirac operator.

    kinetic_factor multiplies both off-diagonal derivative blocks
    (c in atomic units, hbar*c in MeV/fm); mc2 is the rest energy.
    """

    kinetic_factor: float
    mc2: float

    @staticmethod
    def atomic(c: float = SPEED_OF_LIGHT_AU) -> "UnitSystem":
        return UnitSystem(kinetic_factor=c, mc2=c * c)

    @staticmethod
    def nuclear(hbarc: float = HBARC_MEV_FM, mc2: float = NUCLEON_MC2_MEV) -> "UnitSystem":
        return UnitSystem(kinetic_factor=hbarc, mc2=mc2)


@dataclass(frozen=True)
class CoulombSpec:
    """Point-charge potential V = -Z/r, S = 0 (Hartree atomic units)."""

    Z: float = 1.0
    c: float = SPEED_OF_LIGHT_AU

    def __post_init__(self):
        if self.Z <= 0:
            raise ValueError(f"Coulomb charge must be positive, got Z={self.Z}")

    def units(self) -> UnitSystem:
        return UnitSystem.atomic(self.c)


@dataclass(frozen=True)
class WoodsSaxonSpec:
    """Neutron Woods-Saxon well (MeV/fm).

    U = V0 / (1 + exp((r - R0)/a)), W = -lambda_n V0 / (1 + exp((r - R0ls)/als))
    with V0 = depth * (1 - asym*(N-Z)/(N+Z)), R0 = r0 A^{1/3}, R0ls = r0ls A^{1/3}.
    The depth is an energy in MeV.
    """

    A: int
    N: int
    Z: int
    depth: float = -71.28          # MeV
    asym: float = 0.462
    r0: float = 1.233              # fm
    a: float = 0.615               # fm
    r0_ls: float = 1.144           # fm
    a_ls: float = 0.648            # fm
    lambda_n: float = 11.12
    mc2: float = NUCLEON_MC2_MEV   # MeV
    hbarc: float = HBARC_MEV_FM    # MeV fm

    def __post_init__(self):
        if self.A != self.N + self.Z:
            raise ValueError(f"A must equal N + Z, got A={self.A}, N={self.N}, Z={self.Z}")
        if self.a <= 0 or self.a_ls <= 0:
            raise ValueError("diffuseness parameters must be positive")

    @property
    def V0(self) -> float:
        return self.depth * (1.0 - self.asym * (self.N - self.Z) / (self.N + self.Z))

    @property
    def R0(self) -> float:
        return self.r0 * self.A ** (1.0 / 3.0)

    @property
    def R0_ls(self) -> float:
        return self.r0_ls * self.A ** (1.0 / 3.0)

    def units(self) -> UnitSystem:
        return UnitSystem.nuclear(self.hbarc, self.mc2)


@dataclass(frozen=True)
class Potentials:
    """Sampled U = V + S and W = V - S on the interior mesh points."""

    U: np.ndarray
    W: np.ndarray


def eval_potentials(spec, mesh: RadialMesh) -> Potentials:
    """Sample the potential combinations for a Coulomb or Woods-Saxon spec."""
    r = mesh.r
    if isinstance(spec, CoulombSpec):
        U = -spec.Z / r
        return Potentials(U=U, W=U.copy())
    if isinstance(spec, WoodsSaxonSpec):
        U = spec.V0 / (1.0 + np.exp((r - spec.R0) / spec.a))
        W = -spec.lambda_n * spec.V0 / (1.0 + np.exp((r - spec.R0_ls) / spec.a_ls))
        return Potentials(U=U, W=W)
    raise TypeError(f"unknown potential spec {type(spec).__name__}")
