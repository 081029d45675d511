# analytic.py
#
# Closed-form relativistic hydrogen-like bound states used as ground truth:
# energies from the fine-structure formula and radial wave functions from
# the terminating power series
#
#   F = e^{-rho} rho^s sum_m a_m rho^m,   G = e^{-rho} rho^s sum_m b_m rho^m,
#
# with s = sqrt(kappa^2 - (Z alpha)^2), rho = sqrt(c^4 - E^2)/c * r, and the
# coefficients generated by a single recurrence in C_q that both a_q and b_q
# are proportional to.  Published transcriptions of the auxiliary
#   mu = sqrt((c^2 - E)/(c^2 + E))
# sometimes square E; the first-power form is the one consistent with the
# coupled radial equations (checked here against operator eigenvectors).
#
# Node counting of the large component doubles as the state-identification
# tool: an (n, kappa) bound state has n - 1 - l interior zeros in F.

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import RadialMesh, inner_product
from .operator import RadialSpinor


def orbital_l(kappa: int) -> int:
    """Orbital angular momentum carried by the large component."""
    return kappa if kappa > 0 else -kappa - 1


def validate_quantum_numbers(n: int, kappa: int, Z: float, c: float) -> None:
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got n={n}")
    if kappa == 0:
        raise ValueError("kappa = 0 is not a valid Dirac quantum number")
    if kappa < 0:
        if -kappa > n:
            raise ValueError(f"kappa={kappa} requires n >= {-kappa}")
    else:
        if kappa > n - 1:
            raise ValueError(f"kappa={kappa} requires n >= {kappa + 1}")
    if Z / c >= abs(kappa):
        raise ValueError(
            f"Z*alpha = {Z/c:.4g} >= |kappa| = {abs(kappa)}: no real solution"
        )


def hydrogen_energy(n: int, kappa: int, Z: float = 1.0, c: float = 137.035999) -> float:
    """Bound-state energy without rest mass, in Hartree.

    Evaluated in the cancellation-free form
        eps = -c^2 t / (sqrt(1+t) (1 + sqrt(1+t))),
        t = (Z alpha)^2 / (n - j - 1/2 + sqrt((j+1/2)^2 - (Z alpha)^2))^2,
    which stays accurate down to the nonrelativistic limit -Z^2/(2 n^2).
    """
    validate_quantum_numbers(n, kappa, Z, c)
    alpha = 1.0 / c
    j = abs(kappa) - 0.5
    root = np.sqrt((j + 0.5) ** 2 - (Z * alpha) ** 2)
    t = (Z * alpha) ** 2 / (n - j - 0.5 + root) ** 2
    sq = np.sqrt(1.0 + t)
    return float(-c * c * t / (sq * (1.0 + sq)))


@dataclass(frozen=True)
class HydrogenState:
    """Series data for one analytic bound state."""

    n: int
    kappa: int
    Z: float
    c: float
    eps: float           # E - mc^2
    E: float             # full energy incl. rest mass
    s: float
    lam: float           # rho = lam * r
    mu: float
    a: np.ndarray        # large-component series coefficients
    b: np.ndarray        # small-component series coefficients
    C: np.ndarray        # shared recurrence coefficients, C_0 = 1


def hydrogen_series(n: int, kappa: int, Z: float = 1.0,
                    c: float = 137.035999) -> HydrogenState:
    """Coefficients of the terminating series for state (n, kappa)."""
    validate_quantum_numbers(n, kappa, Z, c)
    j = abs(kappa) - 0.5
    s = float(np.sqrt(kappa ** 2 - (Z / c) ** 2))
    eps = hydrogen_energy(n, kappa, Z, c)
    E = eps + c * c
    lam = float(np.sqrt((c * c - E) * (c * c + E)) / c)
    mu = float(np.sqrt((c * c - E) / (c * c + E)))

    n_terms = round(n - 0.5 - j) + 1   # series runs m = 0 .. n - 1/2 - j
    C = np.zeros(n_terms)
    C[0] = 1.0
    for q in range(1, n_terms):
        C[q] = 2.0 * (q - n + j - 0.5) / (q * (q + 2.0 * s)) * C[q - 1]
    q = np.arange(n_terms)
    a = C * ((s + q - kappa) / mu + Z / c)
    b = C * (s + q + kappa - Z / (c * mu))
    return HydrogenState(n=n, kappa=kappa, Z=Z, c=c, eps=eps, E=E,
                         s=s, lam=lam, mu=mu, a=a, b=b, C=C)


def hydrogen_wavefunction(n: int, kappa: int, Z: float, c: float,
                          mesh: RadialMesh) -> RadialSpinor:
    """Analytic (F, G) sampled on the mesh and normalized to unit norm."""
    st = hydrogen_series(n, kappa, Z, c)
    rho = st.lam * mesh.r
    poly_a = np.polynomial.polynomial.polyval(rho, st.a)
    poly_b = np.polynomial.polynomial.polyval(rho, st.b)
    envelope = np.exp(-rho) * rho ** st.s
    spinor = RadialSpinor(F=envelope * poly_a, G=envelope * poly_b)
    return spinor.normalized(mesh)


def count_nodes(F: np.ndarray, rel_floor: float = 1e-6) -> int:
    """Strict sign changes of F, ignoring samples below rel_floor * max|F|.

    The floor suppresses spurious flips from floating noise near the
    boundaries; it sits far below any physical oscillation amplitude.
    """
    F = np.asarray(F, dtype=float)
    peak = np.max(np.abs(F))
    if peak == 0.0:
        raise ValueError("cannot count nodes of an all-zero signal")
    kept = F[np.abs(F) > rel_floor * peak]
    signs = np.sign(kept)
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
