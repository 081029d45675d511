# gradients.py
#
# Exact reverse-mode gradients for the training losses, assembled by hand.
# The differentiable chain is
#
#   params -> f(r)  (network forward, batched over the mesh)
#          -> F = r * f          (or F = f when the 1/r trial factor is off)
#          -> G = Q F            (linear small-component map, eps_lag frozen)
#          -> phi = [F; G]       (split layout: G comes from its own head)
#          -> phi' = P phi       (optional projection against lower states)
#          -> loss = phi'^T W B phi' / phi'^T W phi'
#
# with B either the factorized inverse of (eps' I - H) or H itself.  The
# quadratic-form rule d(x^T A x)/dx = (A + A^T) x is applied with A = W B,
# where the transposed term costs one extra adjoint solve because B is not
# symmetric in general.  eps_lag is a differentiation constant: it is the
# previous epoch's energy estimate, never part of the graph.

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import network
from .mesh import RadialMesh
from .operator import DiracOperator, ShiftedInverse, g_denominator
from .potentials import Potentials, UnitSystem


class GradientError(RuntimeError):
    """Raised when a gradient evaluation produced non-finite values."""


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """First/second moment accumulators shaped like the parameter arrays."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def for_params(params: network.NetParams, lr: float = 0.001) -> "AdamState":
        arrays = params.flat_arrays()
        return AdamState(m=[np.zeros_like(a) for a in arrays],
                         v=[np.zeros_like(a) for a in arrays], lr=lr)


def adam_step(params: network.NetParams, grads: list[np.ndarray],
              state: AdamState) -> None:
    """One bias-corrected Adam update, in place on the parameter arrays."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    arrays = params.flat_arrays()
    if len(arrays) != len(grads):
        raise ValueError("gradient list does not match parameter layout")
    for i, (p, g) in enumerate(zip(arrays, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        p -= state.lr * (state.m[i] / bc1) / (np.sqrt(state.v[i] / bc2) + state.eps)


# ---------------------------------------------------------------------------
# Quadratic-form building block
# ---------------------------------------------------------------------------

def quadratic_form_grad(phi: np.ndarray, apply_B, apply_Bt, w2: np.ndarray):
    """value and gradient of phi^T W B phi; grad = (A + A^T) phi, A = W B."""
    Bphi = apply_B(phi)
    value = float(np.dot(w2, phi * Bphi))
    grad = w2 * Bphi + apply_Bt(w2 * phi)
    return value, grad


def rayleigh_quotient_grad(phi: np.ndarray, apply_B, apply_Bt, w2: np.ndarray):
    """Weighted quotient q = phi^T W B phi / phi^T W phi and dq/dphi."""
    num, dnum = quadratic_form_grad(phi, apply_B, apply_Bt, w2)
    den = float(np.dot(w2, phi * phi))
    if den < 1e-30:
        raise GradientError("degenerate trial state: norm underflow")
    q = num / den
    dphi = (dnum - q * (2.0 * w2 * phi)) / den
    return q, dphi


# ---------------------------------------------------------------------------
# Full loss graph
# ---------------------------------------------------------------------------

@dataclass
class LossGraph:
    """One state's differentiable loss, with the operator data baked in.

    method: "inverse" | "orthonormal" | "direct".  For "orthonormal" the
    shifted inverse is the lowest-state one (its eps' sits below the whole
    kappa block) and `lower` holds the stacked, normalized spinors to
    project against.
    """

    method: str
    mesh: RadialMesh
    potentials: Potentials
    units: UnitSystem
    kappa: int
    shifted: ShiftedInverse | None = None
    operator: DiracOperator | None = None
    lower: list[np.ndarray] = field(default_factory=list)
    r_scaling: bool = True
    weights: np.ndarray | None = None   # override for weight-sensitivity checks
    _DT: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.method not in ("inverse", "orthonormal", "direct"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "direct":
            if self.operator is None:
                raise ValueError("direct method needs the assembled operator")
        elif self.shifted is None:
            raise ValueError(f"{self.method} method needs a factorized shift")
        if self.weights is None:
            self.weights = self.mesh.weights
        self._DT = np.ascontiguousarray(self.mesh.D.T)
        self._w2 = np.concatenate([self.weights, self.weights])

    # -- operator application ------------------------------------------------
    def _apply_B(self, v):
        if self.method == "direct":
            return self.operator.H @ v
        return self.shifted.apply(v)

    def _apply_Bt(self, v):
        if self.method == "direct":
            return self.operator.H.T @ v
        return self.shifted.apply_transpose(v)

    # -- trial-state assembly --------------------------------------------------
    def build_phi(self, params: network.NetParams, eps_lag: float):
        """Forward pass to the stacked spinor; returns (phi, cache).

        The 1/r trial factor belongs to the large component (F = r * f);
        a second head, when present, emits the small component directly.
        """
        outs, caches = network.forward_with_cache(params, self.mesh.r)
        r = self.mesh.r
        scale = r if self.r_scaling else 1.0
        F = scale * outs[0]
        if params.n_heads() == 2:
            G = outs[1]
            q = None
        else:
            denom = g_denominator(eps_lag, self.potentials, self.units)
            q = self.units.kinetic_factor / denom
            G = q * (self.mesh.D @ F + (self.kappa / r) * F)
        phi = np.concatenate([F, G])
        return phi, (caches, q, params.n_heads())

    def project(self, phi: np.ndarray) -> np.ndarray:
        out = phi
        for pk in self.lower:
            out = out - pk * float(np.dot(self._w2, pk * out))
        return out

    def _project_transpose(self, u: np.ndarray) -> np.ndarray:
        out = u
        for pk in reversed(self.lower):
            out = out - self._w2 * pk * float(np.dot(pk, out))
        return out

    # -- value + gradient -----------------------------------------------------
    def value_and_grad(self, params: network.NetParams, eps_lag: float):
        """Returns (loss, eps_estimate, grads, phi_effective)."""
        phi, (caches, q, n_heads) = self.build_phi(params, eps_lag)
        phi_eff = self.project(phi) if self.method == "orthonormal" else phi

        loss, dphi_eff = rayleigh_quotient_grad(
            phi_eff, self._apply_B, self._apply_Bt, self._w2)

        if self.method == "direct":
            eps_est = loss
        else:
            eps_est = self.shifted.eps_prime - 1.0 / loss

        dphi = (self._project_transpose(dphi_eff)
                if self.method == "orthonormal" else dphi_eff)

        n = self.mesh.n_interior
        r = self.mesh.r
        scale = r if self.r_scaling else 1.0
        dF_block, dG_block = dphi[:n], dphi[n:]
        if n_heads == 2:
            d_outs = [scale * dF_block, dG_block]
        else:
            qdG = q * dG_block
            dF = dF_block + self._DT @ qdG + (self.kappa / r) * qdG
            d_outs = [scale * dF]

        grads = network.backward(params, caches, d_outs)
        if not all(np.all(np.isfinite(g)) for g in grads):
            raise GradientError("non-finite gradient encountered")
        return loss, eps_est, grads, phi_eff


def loss_gradient(params: network.NetParams, graph: LossGraph,
                  eps_lag: float) -> list[np.ndarray]:
    """Gradient of the graph's loss at the given parameters."""
    return graph.value_and_grad(params, eps_lag)[2]


def finite_difference_gradient(fn, params: network.NetParams,
                               entries: list[tuple[int, int]],
                               h: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar fn(params) at selected entries.

    entries are (array index in flat_arrays order, flat offset within it).
    Test-side oracle; intentionally independent of the reverse-mode path.
    """
    out = np.empty(len(entries))
    arrays = params.flat_arrays()
    for k, (ai, off) in enumerate(entries):
        flat = arrays[ai].reshape(-1)
        orig = flat[off]
        flat[off] = orig + h
        fp = fn(params)
        flat[off] = orig - h
        fm = fn(params)
        flat[off] = orig
        out[k] = (fp - fm) / (2.0 * h)
    return out
