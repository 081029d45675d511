# mesh.py
#
# Radial grids for the two-component radial Dirac problem: a logarithmic
# mesh r = e^x - e^{x0} with x uniformly spaced (fine resolution near the
# origin, used for Coulomb systems) and a plain uniform mesh (used for
# finite-range nuclear wells).
#
# Conventions:
# - Dirichlet endpoints are dropped everywhere: vectors and matrices live
#   on the M-1 interior points only.
# - The first-derivative matrix D is the 3-point central difference; on the
#   log mesh each row i is scaled by 1/e^{x_i} (chain rule d/dr = e^{-x} d/dx).
# - Quadrature weights are midpoint/Riemann: w_i = e^{x_i} dx (log) or
#   w_i = dr (uniform), so sum_i w_i g(r_i) ~ int g dr over the box.

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RadialMesh:
    """Interior radial grid with derivative matrix and quadrature weights.

    Immutable after construction; safe to share read-only across workers.
    """

    kind: str                 # "log" | "uniform"
    M: int                    # total mesh count; interior points = M - 1
    r: np.ndarray             # interior radii, strictly increasing, > 0
    weights: np.ndarray       # quadrature weight per interior point
    D: np.ndarray             # (M-1) x (M-1) first-derivative matrix
    r_max: float              # box size (position of the dropped right endpoint)
    x0: float | None = None   # log-mesh left boundary in x
    dx: float | None = None   # log-mesh spacing in x
    dr: float | None = None   # uniform spacing
    x: np.ndarray | None = field(default=None, repr=False)  # log-mesh x_i

    @property
    def n_interior(self) -> int:
        return self.M - 1


def build_log_mesh(x0: float, x_max: float, M: int) -> RadialMesh:
    """Logarithmic mesh r_i = e^{x_i} - e^{x0} with x_i = x0 + i*dx, i = 1..M-1.

    The subtraction of e^{x0} pins r = 0 exactly at the conceptual left
    endpoint x0, so the Dirichlet condition there is meaningful.
    """
    if M < 3:
        raise ValueError(f"log mesh needs M >= 3, got {M}")
    if not x0 < x_max:
        raise ValueError(f"log mesh needs x0 < x_max, got x0={x0}, x_max={x_max}")
    dx = (x_max - x0) / M
    x = x0 + dx * np.arange(1, M)
    ex = np.exp(x)
    r = ex - np.exp(x0)
    weights = ex * dx

    n = M - 1
    D = np.zeros((n, n))
    rows = np.arange(n)
    D[rows[:-1], rows[:-1] + 1] = 1.0 / ex[:-1]
    D[rows[1:], rows[1:] - 1] = -1.0 / ex[1:]
    D /= 2.0 * dx

    return RadialMesh(
        kind="log", M=M, r=r, weights=weights, D=D,
        r_max=float(np.exp(x_max) - np.exp(x0)), x0=x0, dx=dx, x=x,
    )


def build_uniform_mesh(r_max: float, M: int) -> RadialMesh:
    """Uniform mesh r_i = i*dr, i = 1..M-1, dr = r_max/M."""
    if M < 3:
        raise ValueError(f"uniform mesh needs M >= 3, got {M}")
    if r_max <= 0:
        raise ValueError(f"uniform mesh needs r_max > 0, got {r_max}")
    dr = r_max / M
    r = dr * np.arange(1, M)

    n = M - 1
    D = np.zeros((n, n))
    rows = np.arange(n)
    D[rows[:-1], rows[:-1] + 1] = 1.0
    D[rows[1:], rows[1:] - 1] = -1.0
    D /= 2.0 * dr

    return RadialMesh(
        kind="uniform", M=M, r=r, weights=np.full(n, dr), D=D,
        r_max=float(r_max), dr=dr,
    )


def inner_product(a, b, mesh: RadialMesh) -> float:
    """Weighted inner product sum_i w_i a_i b_i on the interior points.

    Accepts plain sample arrays of length M-1, stacked two-component
    vectors of length 2(M-1), or (F, G) spinor pairs; for spinors the
    large- and small-component sums are added.
    """
    av = _as_stacked(a, mesh)
    bv = _as_stacked(b, mesh)
    if av.shape != bv.shape:
        raise ValueError(f"inner_product length mismatch: {av.shape} vs {bv.shape}")
    n = mesh.n_interior
    if av.size == n:
        return float(np.dot(mesh.weights, av * bv))
    w2 = np.concatenate([mesh.weights, mesh.weights])
    return float(np.dot(w2, av * bv))


def _as_stacked(a, mesh: RadialMesh) -> np.ndarray:
    # RadialSpinor quacks via .stacked(); avoid a circular import on the type.
    if hasattr(a, "stacked"):
        return a.stacked()
    arr = np.asarray(a, dtype=float)
    n = mesh.n_interior
    if arr.ndim != 1 or arr.size not in (n, 2 * n):
        raise ValueError(
            f"expected length {n} or {2*n} sample vector, got shape {arr.shape}"
        )
    return arr
