"""Weighted subsampling of tight frames.

Given M vectors v_j in C^N (or R^N) with sum_j v_j v_j* = I, the barrier
method selects at most ceil(d*N) of them with weights w_j >= 0 so that the
condition number of sum_j w_j v_j v_j* is at most
(d + 1 + 2*sqrt(d)) / (d + 1 - 2*sqrt(d)).  Two barrier potentials
Phi^u(A) = tr(uI - A)^{-1} and Phi_l(A) = tr(A - lI)^{-1} are kept bounded
while the barriers advance by fixed increments each step; a vector whose
upper-shift cost does not exceed its lower-shift budget always exists.

A small exhaustive subset search complements this at toy sizes, reporting
the best achievable unweighted constants after the M/N rescaling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import VerificationError
from .grids import PointSet
from .indexset import IndexSet
from .util import rng_stream

__all__ = [
    "FrameSystem",
    "frame_from_grid",
    "real_embedding",
    "random_tight_frame",
    "bss_condition_bound",
    "bss_sparsify",
    "SubsetSearchResult",
    "brute_force_subset",
]

TIGHT_FRAME_TOL = 1e-10
EXHAUSTIVE_CAP = 20
GREEDY_CAP = 200


@dataclass
class FrameSystem:
    """M column vectors in C^N (or R^N) forming a Parseval tight frame.

    `vectors` has shape (N, M).  Construction verifies the tight-frame
    identity sum_j |<w, v_j>|^2 = ||w||^2 both on a seeded random probe
    basis and in the Frobenius norm, and flags equal column norms
    ||v_j||^2 = N/M when they hold.
    """

    vectors: np.ndarray
    source: str = ""
    equal_norm: bool = False

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors))
        N, M = self.vectors.shape
        if N < 1 or M < N:
            raise ValueError(f"need at least N vectors spanning C^N, got shape {(N, M)}")
        S = self.vectors @ self.vectors.conj().T
        resid = float(np.abs(S - np.eye(N)).max())
        g = rng_stream(1789, N, M)
        probes = g.standard_normal((N, N)) + 1j * g.standard_normal((N, N))
        for w in probes.T:
            lhs = float(np.sum(np.abs(self.vectors.conj().T @ w) ** 2))
            rhs = float(np.vdot(w, w).real)
            resid = max(resid, abs(lhs - rhs) / max(rhs, 1.0))
        if resid > TIGHT_FRAME_TOL:
            raise VerificationError(f"tight-frame identity fails with residual {resid:.3e}")
        norms = np.sum(np.abs(self.vectors) ** 2, axis=0)
        self.equal_norm = bool(np.abs(norms - N / M).max() <= TIGHT_FRAME_TOL)

    @property
    def space_dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.vectors)


def frame_from_grid(Q: IndexSet, grid: PointSet) -> FrameSystem:
    """v_j = M^{-1/2} (e^{i<k, x^j>})_{k in Q} for an exact L2 design.

    Exactness of the grid on the difference set of Q is precisely the
    tight-frame identity, so a non-exact grid is rejected with the residual.
    The column norms are automatically N/M (unimodular entries).
    """
    if np.ptp(grid.weights) > 1e-12 or not grid.normalized:
        raise ValueError("frame construction requires equal weights 1/M")
    K = Q.as_array().astype(float)
    V = np.exp(1j * (grid.nodes @ K.T)).T / math.sqrt(len(grid))
    return FrameSystem(V, source=f"grid({grid.meta.get('kind', 'custom')}) x Q(|Q|={len(Q)})")


def real_embedding(frame: FrameSystem) -> FrameSystem:
    """Real 2N x 2M system carrying the same quadratic form.

    Each complex v contributes embed(v) and embed(i*v), where embed
    interleaves real and imaginary parts; |<w, v>|^2 equals the sum of the
    two real inner products squared, so tightness and the N/M norm level
    are preserved.
    """
    V = frame.vectors
    if frame.is_real:
        return frame
    N, M = V.shape
    out = np.empty((2 * N, 2 * M), dtype=float)
    for j in range(M):
        for col, v in enumerate((V[:, j], 1j * V[:, j])):
            out[0::2, 2 * j + col] = v.real
            out[1::2, 2 * j + col] = v.imag
    return FrameSystem(out, source=f"real-embedding({frame.source})")


def random_tight_frame(M: int, N: int, seed: int, real: bool = True) -> FrameSystem:
    """First N rows of a random orthogonal (or unitary) M x M matrix."""
    if M < N:
        raise ValueError(f"need M >= N, got M={M}, N={N}")
    g = rng_stream(seed, 5)
    G = g.standard_normal((M, M))
    if not real:
        G = G + 1j * g.standard_normal((M, M))
    Qm, R = np.linalg.qr(G)
    Qm = Qm * np.sign(np.diag(R))  # fix the QR gauge for determinism
    return FrameSystem(Qm.T[:N, :], source=f"random(seed={seed})")


def bss_condition_bound(oversample: float) -> float:
    """(d + 1 + 2*sqrt(d)) / (d + 1 - 2*sqrt(d)) for d = oversample."""
    sd = math.sqrt(oversample)
    return (oversample + 1 + 2 * sd) / (oversample + 1 - 2 * sd)


def bss_sparsify(frame: FrameSystem, oversample: float) -> tuple[np.ndarray, float]:
    """Deterministic barrier selection of at most ceil(oversample * N) vectors.

    Returns (weights, kappa) with the weights rescaled so that
    lambda_min(sum w_j v_j v_j*) = 1; then for every f in the span,
    ||f||^2 <= sum_j w_j |<f-coords, v_j>|^2 <= kappa * ||f||^2, and kappa
    is certified spectrally to satisfy the condition bound.

    The identical update rules run over R or C: the Hermitian rank-one
    barrier step over C is the paired rank-two step of the real embedding,
    so the guarantee carries over with the complex dimension N.
    """
    if oversample <= 1:
        raise ValueError(f"oversample must exceed 1, got {oversample}")
    V = frame.vectors
    N, M = V.shape
    w = np.zeros(M)
    if M == N:
        # a square tight frame is unitary: every vector is essential and
        # unit weights reproduce the identity exactly
        w[:] = 1.0
        kappa = _condition_number(V, w)
        return w, kappa
    d = float(oversample)
    sd = math.sqrt(d)
    steps = int(math.ceil(d * N))
    delta_l = 1.0
    delta_u = (sd + 1.0) / (sd - 1.0)
    l = -N * sd
    u = N * (d + sd) / (sd - 1.0)
    A = np.zeros((N, N), dtype=V.dtype)
    for step in range(steps):
        lam, S = np.linalg.eigh(A)
        u_next, l_next = u + delta_u, l + delta_l
        X2 = np.abs(S.conj().T @ V) ** 2  # |<eigvec_i, v_j>|^2
        phi_u = float(np.sum(1.0 / (u - lam)))
        phi_u_next = float(np.sum(1.0 / (u_next - lam)))
        phi_l = float(np.sum(1.0 / (lam - l)))
        phi_l_next = float(np.sum(1.0 / (lam - l_next)))
        upper_cost = (1.0 / (u_next - lam) ** 2) @ X2 / (phi_u - phi_u_next) + (
            1.0 / (u_next - lam)
        ) @ X2
        lower_budget = (1.0 / (lam - l_next) ** 2) @ X2 / (phi_l_next - phi_l) - (
            1.0 / (lam - l_next)
        ) @ X2
        margin = lower_budget - upper_cost
        j = int(np.argmax(margin))
        if margin[j] < 0:
            raise VerificationError(
                f"barrier stall at step {step}: no admissible vector (margin {margin[j]:.3e})"
            )
        t = 2.0 / (upper_cost[j] + lower_budget[j])
        A = A + t * np.outer(V[:, j], V[:, j].conj())
        w[j] += t
        u, l = u_next, l_next
    kappa = _condition_number(V, w)
    bound = bss_condition_bound(oversample)
    if kappa > bound + 1e-9:
        raise VerificationError(f"kappa = {kappa:.6f} exceeds the bound {bound:.6f}")
    return w, kappa


def _condition_number(V: np.ndarray, w: np.ndarray) -> float:
    """Rescales w in place so lambda_min = 1 and returns lambda_max after."""
    A = (V * w) @ V.conj().T
    lam = np.linalg.eigvalsh(A)
    if lam[0] <= 0:
        raise VerificationError("weighted frame operator is singular")
    w /= lam[0]
    return float(lam[-1] / lam[0])


@dataclass
class SubsetSearchResult:
    success: bool
    subset: tuple[int, ...]
    c0: float
    C0: float
    exhaustive: bool


def brute_force_subset(frame: FrameSystem, target_fraction: float) -> SubsetSearchResult:
    """Best unweighted restriction J with |J| <= target_fraction * M.

    Maximizes lambda_min of (M/N) sum_{j in J} v_j v_j* (ties broken by
    smaller lambda_max, then by subset order).  Exhaustive for M <= 20;
    for M <= 200 a greedy forward selection is used and flagged.  Failure
    (no spanning subset within the size budget) is a reported result.
    """
    if not (0 < target_fraction <= 1):
        raise ValueError(f"target_fraction must be in (0, 1], got {target_fraction}")
    V = frame.vectors
    N, M = V.shape
    cap = int(math.floor(target_fraction * M))
    if M > GREEDY_CAP:
        raise ValueError(f"M = {M} exceeds the search cap {GREEDY_CAP}")
    scale = M / N
    outers = [scale * np.outer(V[:, j], V[:, j].conj()) for j in range(M)]

    def constants(subset) -> tuple[float, float]:
        A = sum(outers[j] for j in subset)
        lam = np.linalg.eigvalsh(A)
        return float(lam[0]), float(lam[-1])

    best: tuple | None = None
    if M <= EXHAUSTIVE_CAP:
        # fewer than N vectors cannot span, so only sizes N..cap can win;
        # keep one undersized candidate so failures still report constants
        if cap < N:
            subset = tuple(range(cap))
            c0, C0 = constants(subset) if subset else (0.0, 0.0)
            return SubsetSearchResult(False, subset, c0, C0, True)
        for size in range(N, cap + 1):
            for subset in itertools.combinations(range(M), size):
                c0, C0 = constants(subset)
                key = (c0, -C0)
                if best is None or key > best[0]:
                    best = (key, subset, c0, C0)
        exhaustive = True
    else:
        chosen: list[int] = []
        A = np.zeros((N, N), dtype=V.dtype)
        for _ in range(cap):
            gains = []
            for j in range(M):
                if j in chosen:
                    gains.append(-math.inf)
                    continue
                lam = np.linalg.eigvalsh(A + outers[j])
                gains.append(float(lam[0]))
            j = int(np.argmax(gains))
            chosen.append(j)
            A = A + outers[j]
            lam = np.linalg.eigvalsh(A)
            key = (float(lam[0]), -float(lam[-1]))
            if best is None or key > best[0]:
                best = (key, tuple(sorted(chosen)), float(lam[0]), float(lam[-1]))
        exhaustive = False
    _, subset, c0, C0 = best
    if c0 <= 0:
        return SubsetSearchResult(False, tuple(subset), c0, C0, exhaustive)
    return SubsetSearchResult(True, tuple(sorted(subset)), c0, C0, exhaustive)
