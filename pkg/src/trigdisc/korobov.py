"""Number-theoretic exact L2 discretization.

For a frequency set Q, every product t*conj(t) with t in T(Q) has spectrum
in the difference set Lambda(Q).  A rank-1 lattice whose generator a avoids
m_1 + a*m_2 + ... + a^{d-1}*m_d = 0 (mod p) for all nonzero m in Lambda
integrates T(Lambda) exactly, so the p lattice nodes discretize the L2 norm
on T(Q) with equality: ||t||_2^2 = (1/p) sum_nu |t(xi^nu)|^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, VerificationError
from .grids import TWO_PI, PointSet
from .indexset import IndexSet, difference_set
from .polynomial import TrigPolynomial, evaluate_at_nodes
from .util import rng_stream

__all__ = [
    "KorobovParams",
    "is_prime",
    "next_prime",
    "smallest_admissible_prime",
    "find_generator",
    "root_count",
    "korobov_nodes",
    "cubature_exactness",
    "verify_nodes",
    "reproduce",
    "projection_matrix",
    "exact_discretization",
    "save_certificate",
    "load_certificate",
]

#: Above this node count the O(p^3) projection-matrix checks are refused;
#: the coefficient-level reproduce check certifies the same identity.
PROJECTION_CAP = 2000


@dataclass(frozen=True)
class KorobovParams:
    """Prime p, generator a and the dimension they serve.

    `lambda_hash` binds the certificate to the canonical serialization of
    the difference set the generator was verified against.
    """

    p: int
    a: int
    dim: int
    lambda_hash: str = ""

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if not (1 <= self.a < self.p):
            raise ValueError(f"generator a = {self.a} outside [1, {self.p})")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")


def is_prime(n: int) -> bool:
    """Trial division; ample for desk-scale primes."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    p = n + 1
    while not is_prime(p):
        p += 1
    return p


def smallest_admissible_prime(lambda_size: int, d: int) -> int:
    """Smallest prime p with lambda_size < (p-1)/d, i.e. p > d*lambda_size + 1."""
    if lambda_size < 1:
        raise ValueError(f"lambda_size must be >= 1, got {lambda_size}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return next_prime(d * lambda_size + 1)


def _nonzero_rows(L: IndexSet) -> np.ndarray:
    A = L.as_array()
    return A[np.any(A != 0, axis=1)]


def find_generator(L: IndexSet, p: int, chunk: int = 256) -> int:
    """Smallest a in [1, p) with sum_j a^{j-1} m_j != 0 (mod p) for all m in L\\{0}.

    Existence is guaranteed when |L \\ {0}| < (p-1)/d and |m_j| < p for all
    m (each nonzero m then knocks out at most d-1 residues a); exhausting
    [1, p) therefore signals violated preconditions.
    """
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    M = _nonzero_rows(L).astype(np.int64)
    if M.size == 0:
        return 1
    d = L.dim
    if int(np.abs(M).max()) >= p:
        raise PreconditionError(
            f"some |m_j| = {int(np.abs(M).max())} >= p = {p}; the root-count bound needs |m_j| < p"
        )
    if len(M) >= (p - 1) / d:
        raise PreconditionError(f"|Lambda \\ 0| = {len(M)} >= (p-1)/d = {(p - 1) / d}")
    for start in range(1, p, chunk):
        cand = np.arange(start, min(start + chunk, p), dtype=np.int64)
        powers = np.ones((len(cand), d), dtype=np.int64)
        for j in range(1, d):
            powers[:, j] = (powers[:, j - 1] * cand) % p
        residues = (M @ powers.T) % p
        good = ~np.any(residues == 0, axis=0)
        hits = np.nonzero(good)[0]
        if hits.size:
            return int(cand[hits[0]])
    raise PreconditionError("no admissible generator found; inputs violate the counting bound")


def root_count(m, p: int) -> int:
    """|A_p(m)|: number of a in [1, p) solving sum_j a^{j-1} m_j = 0 (mod p).

    For nonzero m with |m_j| < p this is at most d-1 (a nonzero polynomial
    of degree <= d-1 over the field with p elements).
    """
    m = np.asarray(m, dtype=np.int64)
    a = np.arange(1, p, dtype=np.int64)
    powers = np.ones((p - 1, len(m)), dtype=np.int64)
    for j in range(1, len(m)):
        powers[:, j] = (powers[:, j - 1] * a) % p
    return int(np.sum((powers @ m) % p == 0))


def korobov_nodes(params: KorobovParams) -> PointSet:
    """The p lattice nodes xi^nu_j = 2*pi*{nu * a^{j-1} / p}, nu = 1..p."""
    p, a, d = params.p, params.a, params.dim
    powers = np.empty(d, dtype=np.int64)
    powers[0] = 1
    for j in range(1, d):
        powers[j] = (powers[j - 1] * a) % p
    nu = np.arange(1, p + 1, dtype=np.int64)
    nodes = ((nu[:, None] * powers[None, :]) % p) * (TWO_PI / p)
    meta = {"kind": "korobov", "p": p, "a": a, "lambda_hash": params.lambda_hash}
    return PointSet(d, nodes, np.full(p, 1.0 / p), meta=meta)


def cubature_exactness(L: IndexSet, nodes: PointSet) -> float:
    """max over m in Lambda of |(1/p) sum_nu e^{i<m,xi^nu>} - [m = 0]|.

    By linearity this certifies (1/p) sum t(xi) = mean(t) for all t in
    T(Lambda); for an admissible generator the defect is roundoff-level.
    """
    A = L.as_array().astype(float)
    p = len(nodes)
    worst = 0.0
    step = max(1, (1 << 22) // max(1, p))
    for lo in range(0, len(A), step):
        block = A[lo : lo + step]
        sums = np.exp(1j * (nodes.nodes @ block.T)).mean(axis=0)
        expected = np.all(block == 0, axis=1).astype(float)
        worst = max(worst, float(np.abs(sums - expected).max()))
    return worst


def verify_nodes(nodes: PointSet, Q: IndexSet) -> KorobovParams:
    """Check that a point set is a certified lattice design for Q.

    Requires lattice provenance (p, a), the exact node layout, and integer
    admissibility of the generator for Lambda(Q).  Returns the verified
    parameters; raises VerificationError otherwise.
    """
    meta = nodes.meta
    if meta.get("kind") != "korobov" or "p" not in meta or "a" not in meta:
        raise VerificationError("point set carries no lattice certification")
    params = KorobovParams(meta["p"], meta["a"], nodes.dim, meta.get("lambda_hash", ""))
    expected = korobov_nodes(params)
    if len(nodes) != params.p or not np.allclose(nodes.nodes, expected.nodes, atol=1e-12):
        raise VerificationError("nodes do not match the lattice layout for (p, a)")
    L = difference_set(Q)
    M = _nonzero_rows(L).astype(np.int64)
    if M.size:
        powers = np.empty(Q.dim, dtype=np.int64)
        powers[0] = 1
        for j in range(1, Q.dim):
            powers[j] = (powers[j - 1] * params.a) % params.p
        if np.any((M @ powers) % params.p == 0):
            raise VerificationError("generator is not admissible for Lambda(Q)")
    return params


def reproduce(t: TrigPolynomial, nodes: PointSet, Q: IndexSet, probe_points: int = 256) -> float:
    """Max pointwise error of T(t, x) = (1/p) sum_nu t(xi^nu) D_Q(x - xi^nu) vs t.

    The operator's Fourier coefficients are (1/p) sum_nu t(xi^nu)
    e^{-i<k, xi^nu>}, k in Q, so the comparison is done on the coefficient
    map and converted to a sup bound on a probe grid.
    """
    verify_nodes(nodes, Q)
    outside = [k for k in t.spectrum() if k not in Q]
    if outside:
        raise ValueError(f"spectrum of t leaves Q: e.g. {outside[0]}")
    vals = evaluate_at_nodes(t, nodes.nodes)
    K = Q.as_array().astype(float)
    coeffs = (np.exp(-1j * (nodes.nodes @ K.T)).T @ (nodes.weights * vals))
    reproduced = TrigPolynomial(Q.dim, dict(zip(Q.freqs, coeffs.tolist())))
    diff = reproduced - t
    g = rng_stream(2025, len(Q), probe_points)
    probes = g.uniform(0.0, TWO_PI, (probe_points, Q.dim))
    return float(np.abs(evaluate_at_nodes(diff, probes)).max()) if diff.coeffs else 0.0


def projection_matrix(nodes: PointSet, Q: IndexSet) -> np.ndarray:
    """The p x p Hermitian matrix with entries (1/p) D_Q(xi^{nu'} - xi^nu).

    It is the orthogonal projector onto the range of node-evaluation:
    idempotent with trace |Q| (up to roundoff).  Refused above
    PROJECTION_CAP nodes; use :func:`reproduce` there instead.
    """
    params = verify_nodes(nodes, Q)
    if params.p > PROJECTION_CAP:
        raise ValueError(f"p = {params.p} exceeds the projection check cap {PROJECTION_CAP}")
    E = np.exp(1j * (nodes.nodes @ Q.as_array().astype(float).T))
    return (E @ E.conj().T) / params.p


def exact_discretization(Q: IndexSet, safe_bound_factor: int = 4) -> tuple[KorobovParams, PointSet]:
    """Full pipeline Q -> Lambda(Q) -> admissible (p, a) -> certified nodes.

    The prime is the smallest one exceeding both d*|Lambda|+1 and
    max |m_j| (the latter keeps the root-count bound valid); the
    resulting p is recorded and checked against the safe bound
    safe_bound_factor * d * |Q|^2.
    """
    if len(Q) == 0:
        raise ValueError("Q must be nonempty")
    d = Q.dim
    L = difference_set(Q)
    p = smallest_admissible_prime(len(L), d)
    maxcomp = L.max_component()
    while p <= maxcomp:
        p = next_prime(p)
    a = find_generator(L, p)
    params = KorobovParams(p, a, d, L.sha256())
    nodes = korobov_nodes(params)
    safe = safe_bound_factor * d * len(Q) ** 2
    if p > safe:
        # possible only when max |m_j| forced the prime past the search bound
        warnings.warn(f"p = {p} exceeds the safe bound {safe_bound_factor}*d*|Q|^2 = {safe}")
    return params, nodes


def save_certificate(params: KorobovParams, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"p={params.p} a={params.a} dim={params.dim} lambda_hash={params.lambda_hash}\n")


def load_certificate(path) -> KorobovParams:
    with open(path) as fh:
        line = fh.read().strip()
    fields = dict(tok.split("=", 1) for tok in line.split())
    return KorobovParams(
        int(fields["p"]), int(fields["a"]), int(fields["dim"]), fields.get("lambda_hash", "")
    )
