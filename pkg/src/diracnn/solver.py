# solver.py
#
# Training loops for one bound state at a time.
#
# inverse      : minimize the weighted Rayleigh quotient of (eps' I - H)^{-1};
#                the state immediately above eps' is the minimizer, so the
#                energy estimate is eps' - 1/loss.  Works for the ground
#                state and, by moving eps' between neighboring levels, for
#                any excited state of the kappa block.
# orthonormal  : project the trial state against stored lower spinors, then
#                minimize the same quotient built with the lowest-state
#                shift; the minimizer over the orthogonal complement is the
#                next state up.
# direct       : minimize the Rayleigh quotient of H itself.  Deliberately
#                unsafe: with an unconstrained two-head trial state the
#                estimate dives into the Dirac sea (variational collapse),
#                which is exactly what the demo is for.
#
# Epoch structure: network forward, F = r*f, G from the frozen-energy map
# (or the second head), optional projection, loss, backprop, Adam step,
# then the frozen energy is replaced by the new estimate.  The first epoch
# uses eps' itself as the frozen energy.

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import network
from .analytic import count_nodes
from .gradients import AdamState, LossGraph, adam_step, rayleigh_quotient_grad
from .mesh import RadialMesh, inner_product
from .operator import (DiracOperator, DiracSeaError, RadialSpinor,
                       ShiftedInverse, factorize_shifted)
from .potentials import Potentials, UnitSystem

METHODS = ("inverse", "orthonormal", "direct")

# a direct-minimization trace this far below the sea edge counts as collapsed
DIRECT_COLLAPSE_FLOOR = 2.1   # in units of mc^2


@dataclass
class SolveConfig:
    """Everything one training run needs besides the operator stack."""

    method: str = "inverse"
    epsilon_prime: float = 0.0       # inversion point; for orthonormal: the lowest-state one
    max_epochs: int = 200_000
    window: int = 500                # epochs over which the estimate must be flat
    tol: float = 1e-9                # max-min spread of the estimate in the window
    seed: int = 0
    learning_rate: float = 0.001
    architecture: str = "fully_connected"
    hidden: int = 16
    r_scaling: bool = True           # trial function f = F/r
    check_every: int = 25            # convergence-test cadence

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be positive")
        if self.window < 2:
            raise ValueError("window must be at least 2")


@dataclass
class ConvergenceTrace:
    """Per-epoch energy estimate, loss value, and wall-clock seconds."""

    epoch: np.ndarray
    epsilon: np.ndarray
    loss: np.ndarray
    seconds: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,epsilon,loss,seconds\n")
            for e, eps, ls, sec in zip(self.epoch, self.epsilon, self.loss, self.seconds):
                fh.write(f"{int(e)},{eps:.17g},{ls:.17g},{sec:.17g}\n")


@dataclass
class TrainResult:
    eps: float
    spinor: RadialSpinor
    trace: ConvergenceTrace
    nodes: int
    epochs: int
    converged: bool
    collapsed: bool = False
    params: network.NetParams | None = None


@dataclass
class OperatorStack:
    """Assembled H for one kappa block plus cached shift factorizations."""

    mesh: RadialMesh
    potentials: Potentials
    units: UnitSystem
    kappa: int
    operator: DiracOperator
    _shifts: dict = field(default_factory=dict, repr=False)

    def shifted(self, eps_prime: float) -> ShiftedInverse:
        key = float(eps_prime)
        if key not in self._shifts:
            self._shifts[key] = factorize_shifted(self.operator, key)
        return self._shifts[key]

    def drop_factorizations(self) -> None:
        self._shifts.clear()


# ---------------------------------------------------------------------------
# Standalone loss evaluations (no gradients)
# ---------------------------------------------------------------------------

def _stacked(phi, mesh: RadialMesh) -> np.ndarray:
    if isinstance(phi, RadialSpinor):
        return phi.stacked()
    phi = np.asarray(phi, dtype=float)
    if phi.size != 2 * mesh.n_interior:
        raise ValueError("expected a stacked two-component vector")
    return phi


def inverse_loss(phi, shifted: ShiftedInverse, mesh: RadialMesh):
    """Weighted quotient of the shifted inverse and the mapped energy."""
    v = _stacked(phi, mesh)
    w2 = np.concatenate([mesh.weights, mesh.weights])
    loss, _ = rayleigh_quotient_grad(v, shifted.apply, shifted.apply_transpose, w2)
    return loss, shifted.eps_prime - 1.0 / loss


def direct_loss(phi, op: DiracOperator, mesh: RadialMesh) -> float:
    """Plain energy expectation value; the quantity that collapses."""
    v = _stacked(phi, mesh)
    w2 = np.concatenate([mesh.weights, mesh.weights])
    loss, _ = rayleigh_quotient_grad(v, lambda x: op.H @ x, lambda x: op.H.T @ x, w2)
    return loss


def orthonormal_project(phi, lower_states, mesh: RadialMesh) -> np.ndarray:
    """phi minus its components along the stored lower states."""
    v = _stacked(phi, mesh)
    w2 = np.concatenate([mesh.weights, mesh.weights])
    out = v.copy()
    for pk in lower_states:
        pk = _stacked(pk, mesh)
        out -= pk * float(np.dot(w2, pk * out))
    if float(np.dot(w2, out * out)) ** 0.5 < 1e-12:
        raise ValueError("trial state lies in the subspace spanned by the lower states")
    return out


def validate_lower_states(lower, mesh: RadialMesh, tol: float = 1e-8) -> list[np.ndarray]:
    """Require unit norms and mutual orthogonality before projecting."""
    stacked = [_stacked(p, mesh) for p in lower]
    w2 = np.concatenate([mesh.weights, mesh.weights])
    for i, pi in enumerate(stacked):
        for k, pk in enumerate(stacked[: i + 1]):
            g = float(np.dot(w2, pi * pk))
            expected = 1.0 if i == k else 0.0
            if abs(g - expected) > tol:
                raise ValueError(
                    f"lower states not orthonormal: <{k}|{i}> = {g:.3e}"
                )
    return stacked


# ---------------------------------------------------------------------------
# Sign convention
# ---------------------------------------------------------------------------

def first_extremum_sign(F: np.ndarray, rel_floor: float = 1e-3) -> float:
    """Sign of the first local extremum of F above a small amplitude floor."""
    F = np.asarray(F)
    peak = np.max(np.abs(F))
    if peak == 0.0:
        return 1.0
    floor = rel_floor * peak
    dF = np.diff(F)
    for i in range(1, len(F) - 1):
        if abs(F[i]) > floor and dF[i - 1] * dF[i] <= 0.0:
            return 1.0 if F[i] >= 0 else -1.0
    return 1.0 if F[np.argmax(np.abs(F))] >= 0 else -1.0


def fix_sign(spinor: RadialSpinor) -> RadialSpinor:
    s = first_extremum_sign(spinor.F)
    return RadialSpinor(F=s * spinor.F, G=s * spinor.G) if s < 0 else spinor


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train_state(config: SolveConfig, stack: OperatorStack,
                params: network.NetParams | None = None,
                lower_states=None) -> TrainResult:
    """Run one state to convergence (or to max_epochs / collapse)."""
    lower = validate_lower_states(lower_states or [], stack.mesh)
    if config.method == "orthonormal" and not lower:
        raise ValueError("orthonormal method needs at least one lower state")

    graph = LossGraph(
        method=config.method,
        mesh=stack.mesh,
        potentials=stack.potentials,
        units=stack.units,
        kappa=stack.kappa,
        shifted=None if config.method == "direct" else stack.shifted(config.epsilon_prime),
        operator=stack.operator if config.method == "direct" else None,
        lower=lower,
        r_scaling=config.r_scaling,
    )

    if params is None:
        params = network.init_params(config.seed, config.architecture, config.hidden)
    state = AdamState.for_params(params, lr=config.learning_rate)

    mc2 = stack.units.mc2
    eps_lag = config.epsilon_prime
    eps_hist = np.empty(config.max_epochs)
    loss_hist = np.empty(config.max_epochs)
    sec_hist = np.empty(config.max_epochs)
    converged = False
    collapsed = False
    epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        t0 = time.perf_counter()
        try:
            loss, eps_est, grads, _ = graph.value_and_grad(params, eps_lag)
        except DiracSeaError:
            if config.method == "direct":
                collapsed = True
                break
            raise
        if not np.isfinite(loss):
            raise FloatingPointError(f"non-finite loss at epoch {epoch}")

        adam_step(params, grads, state)
        eps_hist[epoch - 1] = eps_est
        loss_hist[epoch - 1] = loss
        sec_hist[epoch - 1] = time.perf_counter() - t0
        eps_lag = eps_est
        epochs = epoch

        if config.method != "direct" and eps_est < config.epsilon_prime - 2.0 * mc2:
            raise DiracSeaError(
                f"energy estimate {eps_est:.6g} fell below eps' - 2 mc^2 = "
                f"{config.epsilon_prime - 2.0 * mc2:.6g}: Dirac-sea entry"
            )
        if config.method == "direct" and eps_est < -DIRECT_COLLAPSE_FLOOR * mc2:
            collapsed = True
            break
        if (epoch >= config.window and epoch % config.check_every == 0):
            tail = eps_hist[epoch - config.window: epoch]
            if tail.max() - tail.min() < config.tol:
                converged = True
                break

    trace = ConvergenceTrace(
        epoch=np.arange(1, epochs + 1),
        epsilon=eps_hist[:epochs].copy(),
        loss=loss_hist[:epochs].copy(),
        seconds=sec_hist[:epochs].copy(),
    )

    eps_final = float(eps_hist[epochs - 1]) if epochs else np.nan
    phi, _ = graph.build_phi(params, eps_final if np.isfinite(eps_final) else config.epsilon_prime)
    if config.method == "orthonormal":
        phi = graph.project(phi)
    spinor = RadialSpinor.from_stacked(phi)
    nrm = inner_product(spinor, spinor, stack.mesh)
    if nrm > 0:
        spinor = spinor.normalized(stack.mesh)
    spinor = fix_sign(spinor)
    # classification floor 1e-2: physical lobes are >= ~0.2 of the peak,
    # while trained tails carry ~1e-3 boundary wiggles that are not nodes
    nodes = count_nodes(spinor.F, rel_floor=1e-2) if np.max(np.abs(spinor.F)) > 0 else 0

    return TrainResult(eps=eps_final, spinor=spinor, trace=trace, nodes=nodes,
                       epochs=epochs, converged=converged, collapsed=collapsed,
                       params=params)
