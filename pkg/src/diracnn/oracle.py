# oracle.py
#
# Reference eigensolver for the discretized operator: power iteration on
# the factorized (eps' I - H)^{-1} with Gram-Schmidt deflation in the
# quadrature-weighted inner product (the one in which H is self-adjoint on
# both mesh kinds, so eigenvectors deflate exactly).  Inverse eigenvalues
# map back through eps = eps' - 1/lambda.
#
# Two practical complications of the 3-point central difference are handled
# here.  First, nearly equidistant eigenvalue pairs stall plain power
# iteration, so a stalled run re-factorizes at its current Rayleigh
# quotient (shift refinement) and converges cubically onto one member.
# Second, the sign-flip F_i -> (-1)^i F_i maps the discrete kappa block
# unitarily onto the -kappa block, so every block also carries the mirror
# block's spectrum as sawtooth-shaped images.  Those images are genuine
# eigenpairs of the matrix but not states of the kappa channel being
# solved; they are classified by their high-frequency content and skipped
# when enumerating physical spectra.

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator import DiracOperator, SingularShiftError, factorize_shifted

# smooth channel states sit below ~0.1, sawtooth images near 4
ROUGHNESS_THRESHOLD = 1.0


class OracleConvergenceError(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


@dataclass
class EigenPair:
    eps: float
    vector: np.ndarray       # stacked [F; G], unit weighted norm
    residual: float
    roughness: float = 0.0

    @property
    def is_mirror_image(self) -> bool:
        return self.roughness > ROUGHNESS_THRESHOLD


def roughness_of(vector: np.ndarray) -> float:
    """High-frequency fraction of the dominant component block."""
    n = vector.size // 2
    F, G = vector[:n], vector[n:]
    block = F if np.linalg.norm(F) >= np.linalg.norm(G) else G
    nrm = np.linalg.norm(block)
    if nrm == 0.0:
        return 0.0
    return float(np.linalg.norm(np.diff(block, 2)) / nrm)


def shift_invert_eigs(op: DiracOperator, eps_prime: float, k: int = 1,
                      tol: float = 1e-10, max_iter: int = 20_000,
                      seed: int = 0, deflate_against=None,
                      skip_mirror_images: bool = False) -> list[EigenPair]:
    """The k eigenpairs nearest eps', ordered by |eps - eps'|.

    Residuals satisfy ||H v - eps v|| <= tol * ||v|| in the weighted norm.
    The default tol sits a little above the double-precision floor set by
    the operator norm (~|2 mc^2| * machine eps); anything tighter is not
    reachable for these matrices.  With skip_mirror_images=True, converged
    sawtooth images of the -kappa block are deflated but not returned.
    deflate_against: optional pre-existing vectors to exclude (used when
    laddering through a spectrum).
    """
    if k < 1:
        raise ValueError("need k >= 1 eigenpairs")
    shifted = factorize_shifted(op, eps_prime)
    w2 = op.weighted2()

    def wdot(a, b):
        return float(np.dot(w2, a * b))

    def wnorm(a):
        return np.sqrt(wdot(a, a))

    basis = [np.asarray(v, dtype=float) / wnorm(np.asarray(v, dtype=float))
             for v in (deflate_against or [])]
    rng = np.random.default_rng(seed)
    found: list[EigenPair] = []

    while len([p for p in found
               if not (skip_mirror_images and p.is_mirror_image)]) < k:
        if len(found) >= k + 16:
            raise OracleConvergenceError(
                "too many mirror images near the shift; move eps'")
        fac = shifted
        v = rng.standard_normal(op.size)
        eps = np.nan
        residual = np.inf
        best_residual = np.inf
        stall_count = 0
        reshifts = 0
        converged = False
        for it in range(max_iter):
            for b in basis:
                v -= b * wdot(b, v)
            v = fac.apply(v)
            for b in basis:
                v -= b * wdot(b, v)
            nv = wnorm(v)
            if nv == 0.0:
                raise OracleConvergenceError(
                    "iteration vector vanished under deflation")
            v /= nv
            if it % 5 == 4 or it > 50:
                Hv = op.H @ v
                eps = wdot(v, Hv)   # Rayleigh quotient; unit weighted norm
                residual = wnorm(Hv - eps * v)
                if residual < tol:
                    converged = True
                    break
                # nearly equidistant pair: refine the shift at the current
                # quotient, which separates the pair decisively
                if residual > 0.7 * best_residual:
                    stall_count += 1
                else:
                    stall_count = 0
                best_residual = min(best_residual, residual)
                if stall_count >= 12 and reshifts < 4:
                    jitter = 1e-8 * (1.0 + abs(eps))
                    for attempt in range(5):
                        try:
                            fac = factorize_shifted(op, eps + jitter)
                            break
                        except SingularShiftError:
                            jitter *= 37.0
                    reshifts += 1
                    stall_count = 0
                    best_residual = np.inf
        if not converged:
            raise OracleConvergenceError(
                f"no convergence after {max_iter} iterations "
                f"(residual {residual:.3e})", residual=residual)
        pair = EigenPair(eps=float(eps), vector=v.copy(),
                         residual=float(residual), roughness=roughness_of(v))
        found.append(pair)
        basis.append(pair.vector)

    kept = [p for p in found
            if not (skip_mirror_images and p.is_mirror_image)]
    kept.sort(key=lambda p: abs(p.eps - eps_prime))
    return kept[:k]


def bound_states_below(op: DiracOperator, cutoff: float, floor: float,
                       tol: float = 1e-10, gap_step: float | None = None,
                       max_states: int = 64, seed: int = 0,
                       skip_mirror_images: bool = True) -> list[EigenPair]:
    """Ladder up from `floor`, collecting every eigenvalue below `cutoff`.

    Walks shift-invert targets upward, deflating everything already found,
    so closely spaced levels of one kappa block are picked up one by one.
    Mirror images of the -kappa block are skipped by default: they are
    discretization artifacts, not states of this channel.  gap_step
    defaults to 2% of the (cutoff - floor) window.
    """
    if gap_step is None:
        gap_step = 0.02 * (cutoff - floor)
    states: list[EigenPair] = []
    deflate: list[np.ndarray] = []
    shift = floor
    attempts = 0
    while len(states) < max_states:
        attempts += 1
        if attempts > 4 * max_states:
            raise OracleConvergenceError("spectrum ladder made no progress")
        try:
            nxt = shift_invert_eigs(op, shift, k=1, tol=tol, seed=seed,
                                    deflate_against=deflate)[0]
        except SingularShiftError:
            shift += 0.37 * gap_step
            continue
        if nxt.eps >= cutoff:
            break
        if nxt.eps < floor - 0.5 * abs(floor):
            # shift landed near the sea branch; step inward and retry
            shift += gap_step
            continue
        deflate.append(nxt.vector)
        if not (skip_mirror_images and nxt.is_mirror_image):
            states.append(nxt)
        if nxt.eps >= shift:
            shift = nxt.eps + gap_step
        # otherwise keep the shift: the state below it is deflated now, so
        # the next round advances to the following one
    states.sort(key=lambda p: p.eps)
    return states
