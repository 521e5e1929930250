"""Probabilistic discretization: defects, random node sets, certified and
empirical frame constants, randomized search for good node sets, and
concentration-tail simulations.

For q = 2 the two-sided discretization constants over T(Q) are exactly the
extreme eigenvalues of the Hermitian Gram matrix G = V* W V with
V_{nu,k} = e^{i<k, xi^nu>}, so they can be certified by an eigensolve; for
q != 2 only ensemble evidence is computable and is reported as such.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PreconditionError, VerificationError
from .grids import TWO_PI, PointSet
from .indexset import IndexSet
from .polynomial import (
    NormSpec,
    TrigPolynomial,
    evaluate_at_nodes,
    l2_norm,
    lq_norm,
    random_polynomial,
)
from .util import rng_stream

__all__ = [
    "DefectSample",
    "DiscretizationReport",
    "SearchResult",
    "discretization_defect",
    "random_nodes",
    "certify_l2_constants",
    "empirical_constants",
    "marcinkiewicz_search",
    "VariableFamily",
    "two_point_family",
    "clipped_gaussian_family",
    "polynomial_pair_family",
    "tail_bound",
    "concentration_tail_check",
    "lambda_min_ladder",
]

GRAM_SIZE_CAP = 4096


@dataclass(frozen=True)
class DefectSample:
    """One evaluation of the defect L^q_z(f) for a seeded (f, z) pair."""

    q: float
    m: int
    defect: float
    f_id: int
    z_id: int


@dataclass
class DiscretizationReport:
    """Certified or empirical two-sided constants for one experiment."""

    kind: str  # "certified-l2" | "empirical"
    q: float
    d: int
    Q_size: int
    m: int
    lower: float
    upper: float
    n: int | None = None
    eta: float | None = None
    trials: int = 0
    attempts: int = 0
    seeds: list[int] = field(default_factory=list)
    runtime_ms: float = 0.0
    success: bool | None = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "q": self.q,
            "d": self.d,
            "n": self.n,
            "Q_size": self.Q_size,
            "m": self.m,
            "lower": self.lower,
            "upper": self.upper,
            "eta": self.eta,
            "trials": self.trials,
            "attempts": self.attempts,
            "seeds": self.seeds,
            "runtime_ms": self.runtime_ms,
            "success": self.success,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass
class SearchResult:
    success: bool
    point_set: PointSet | None
    report: DiscretizationReport
    worst_samples: list[DefectSample] = field(default_factory=list)


def discretization_defect(f: TrigPolynomial, q: float, z: PointSet) -> float:
    """L^q_z(f) = (1/m) sum_j |f(x^j)|^q - ||f||_q^q (signed)."""
    if not z.normalized or np.ptp(z.weights) > 1e-12:
        raise ValueError("defect is defined for equal-weight normalized point sets")
    vals = np.abs(evaluate_at_nodes(f, z.nodes))
    norm_q = l2_norm(f) ** 2 if q == 2 else lq_norm(f, q) ** q
    return float(np.mean(vals**q) - norm_q)


def random_nodes(m: int, d: int, seed: int, stream: Sequence[int] = ()) -> PointSet:
    """m i.i.d. uniform nodes on [0, 2pi)^d with weights 1/m, keyed by seed."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    g = rng_stream(seed, 0, *stream)
    nodes = g.uniform(0.0, TWO_PI, (m, d))
    return PointSet(d, nodes, np.full(m, 1.0 / m), meta={"kind": "random", "seed": int(seed)})


def _gram(Q: IndexSet, z: PointSet) -> np.ndarray:
    K = Q.as_array().astype(float)
    V = np.exp(1j * (z.nodes @ K.T))
    return V.conj().T @ (z.weights[:, None] * V)


def certify_l2_constants(
    Q: IndexSet, z: PointSet, size_cap: int = GRAM_SIZE_CAP
) -> tuple[float, float]:
    """Sharp q = 2 constants: extreme eigenvalues of the evaluation Gram matrix.

    The ratio sum_nu w_nu |t(xi^nu)|^2 / ||t||_2^2 over t in T(Q) ranges
    exactly over [lambda_min, lambda_max] of G.  Residuals of the extreme
    eigenpairs are checked to 1e-8.
    """
    if len(Q) > size_cap:
        raise ValueError(f"|Q| = {len(Q)} exceeds the eigensolve cap {size_cap}")
    G = _gram(Q, z)
    lams, vecs = np.linalg.eigh(G)
    for idx in (0, len(lams) - 1):
        v = vecs[:, idx]
        resid = np.linalg.norm(G @ v - lams[idx] * v)
        if resid > 1e-8 * np.linalg.norm(v):
            raise VerificationError(f"eigenpair residual {resid:.3e} exceeds 1e-8")
    return float(lams[0]), float(lams[-1])


def empirical_constants(
    Q: IndexSet,
    q: float,
    z: PointSet,
    trials: int,
    seed: int,
    oversampling: int = 8,
) -> DiscretizationReport:
    """Ensemble min/max of (1/m) sum |f(x^j)|^q over unit-Lq random polynomials.

    Evidence only: a positive lower value certifies nothing, while lower ~ 0
    certifies failure.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    t0 = time.perf_counter()
    lo, hi = math.inf, -math.inf
    for trial in range(trials):
        f = random_polynomial(Q, (seed, 1, trial), "unit-lq", q=q, oversampling=oversampling)
        vals = np.abs(evaluate_at_nodes(f, z.nodes))
        mean_q = float(np.sum(z.weights * vals**q))
        lo, hi = min(lo, mean_q), max(hi, mean_q)
    return DiscretizationReport(
        kind="empirical", q=q, d=Q.dim, Q_size=len(Q), m=len(z),
        lower=lo, upper=hi, trials=trials, seeds=[int(seed)],
        runtime_ms=1e3 * (time.perf_counter() - t0),
    )


def marcinkiewicz_search(
    Q: IndexSet,
    q: float,
    m: int,
    attempts: int,
    eta: float,
    trials: int,
    seed: int,
    oversampling: int = 8,
) -> SearchResult:
    """Randomized search for a node set discretizing T(Q) in Lq.

    Draws attempt-indexed random node sets and accepts the first one that
    passes: for q = 2, certified lambda_min >= 1 - 2*eta and
    lambda_max <= 1 + 2*eta; otherwise, max over a fixed `trials`-member
    ensemble normalized to ||f||_q = 1/2 of |L^q_z(f)| <= eta.  Failure
    after `attempts` draws is a reported result, not an exception.
    """
    if attempts < 1 or trials < 1:
        raise ValueError("attempts and trials must be >= 1")
    t0 = time.perf_counter()
    ensemble: list[TrigPolynomial] = []
    if q != 2:
        for trial in range(trials):
            f = random_polynomial(Q, (seed, 1, trial), "unit-lq", q=q, oversampling=oversampling)
            ensemble.append(f.scaled(0.5))
    half_q = 0.5**q
    best: tuple | None = None
    for attempt in range(attempts):
        z = random_nodes(m, Q.dim, seed, stream=(2, attempt))
        if q == 2:
            lmin, lmax = certify_l2_constants(Q, z)
            ok = lmin >= 1.0 - 2.0 * eta and lmax <= 1.0 + 2.0 * eta
            score = (min(lmin - (1.0 - 2.0 * eta), (1.0 + 2.0 * eta) - lmax), lmin, lmax)
            samples: list[DefectSample] = []
        else:
            means = np.empty(trials)
            for t_idx, f in enumerate(ensemble):
                vals = np.abs(evaluate_at_nodes(f, z.nodes))
                means[t_idx] = float(np.mean(vals**q))
            defects = np.abs(means - half_q)
            worst = int(np.argmax(defects))
            ok = float(defects[worst]) <= eta
            score = (eta - float(defects[worst]), float(means.min() / half_q), float(means.max() / half_q))
            samples = [DefectSample(q, m, float(defects[worst]), worst, attempt)]
        if best is None or score[0] > best[0][0]:
            best = (score, z, samples, attempt)
        if ok:
            report = DiscretizationReport(
                kind="certified-l2" if q == 2 else "empirical",
                q=q, d=Q.dim, Q_size=len(Q), m=m, lower=score[1], upper=score[2],
                eta=eta, trials=trials, attempts=attempt + 1, seeds=[int(seed)],
                runtime_ms=1e3 * (time.perf_counter() - t0), success=True,
            )
            return SearchResult(True, z, report, samples)
    score, z, samples, attempt = best
    report = DiscretizationReport(
        kind="certified-l2" if q == 2 else "empirical",
        q=q, d=Q.dim, Q_size=len(Q), m=m, lower=score[1], upper=score[2],
        eta=eta, trials=trials, attempts=attempts, seeds=[int(seed)],
        runtime_ms=1e3 * (time.perf_counter() - t0), success=False,
    )
    return SearchResult(False, None, report, samples)


# ---------------------------------------------------------------------------
# concentration-tail simulation


@dataclass(frozen=True)
class VariableFamily:
    """A mean-zero i.i.d. sampler with certified L1/L2/sup norm bounds."""

    name: str
    l1_bound: float
    l2_bound: float
    sup_bound: float
    sampler: Callable[[np.random.Generator, tuple], np.ndarray]

    def sample(self, g: np.random.Generator, shape) -> np.ndarray:
        return self.sampler(g, shape)


def two_point_family(v: float) -> VariableFamily:
    """Symmetric two-point variables +-v; all three norms equal v."""
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    return VariableFamily(
        name=f"two-point(+-{v})",
        l1_bound=v, l2_bound=v, sup_bound=v,
        sampler=lambda g, shape: v * (2.0 * g.integers(0, 2, shape) - 1.0),
    )


def clipped_gaussian_family(sigma: float, clip: float) -> VariableFamily:
    """N(0, sigma^2) clipped to [-clip, clip]; mean zero by symmetry.

    Clipping can only shrink moments, so ||g||_1 <= min(sigma*sqrt(2/pi),
    clip) and ||g||_2 <= min(sigma, clip) are certified bounds.
    """
    if sigma <= 0 or clip <= 0:
        raise ValueError("sigma and clip must be positive")
    return VariableFamily(
        name=f"clipped-gaussian(sigma={sigma}, clip={clip})",
        l1_bound=min(sigma * math.sqrt(2.0 / math.pi), clip),
        l2_bound=min(sigma, clip),
        sup_bound=clip,
        sampler=lambda g, shape: np.clip(g.normal(0.0, sigma, shape), -clip, clip),
    )


def polynomial_pair_family(
    f1: TrigPolynomial, f2: TrigPolynomial, delta: float, oversampling: int = 8
) -> VariableFamily:
    """g(x) = |f1(x)| - ||f1||_1 - (|f2(x)| - ||f2||_1) at uniform random x.

    Requires ||f_j||_1 <= 1/2 and a caller-guaranteed bound
    ||f1 - f2||_inf <= delta; then ||g||_1 <= 2 and ||g||_inf <= 2*delta.
    """
    if f1.dim != f2.dim:
        raise ValueError("dimension mismatch")
    n1 = lq_norm(f1, NormSpec(1, oversampling))
    n2 = lq_norm(f2, NormSpec(1, oversampling))
    if n1 > 0.5 + 1e-9 or n2 > 0.5 + 1e-9:
        raise PreconditionError(f"||f_j||_1 must be <= 1/2, got {n1:.4f}, {n2:.4f}")
    grid_sup = lq_norm(f1 - f2, NormSpec(math.inf, oversampling))
    if grid_sup > delta + 1e-9:
        raise PreconditionError(f"grid sup of f1 - f2 is {grid_sup:.4e} > delta = {delta}")
    d = f1.dim

    def sampler(g: np.random.Generator, shape) -> np.ndarray:
        x = g.uniform(0.0, TWO_PI, (int(np.prod(shape)), d))
        vals = np.abs(evaluate_at_nodes(f1, x)) - n1 - np.abs(evaluate_at_nodes(f2, x)) + n2
        return vals.reshape(shape)

    l1 = 2.0 * (n1 + n2)
    return VariableFamily(
        name=f"polynomial-pair(delta={delta})",
        l1_bound=l1,
        l2_bound=math.sqrt(l1 * 2.0 * delta),  # ||g||_2^2 <= ||g||_1 ||g||_inf
        sup_bound=2.0 * delta,
        sampler=sampler,
    )


def tail_bound(variant: str, M: float, m: int, eta: float) -> float:
    """The Bernstein-type upper bound on P(|sum g_j| >= m*eta)."""
    if variant == "L1-style":
        return 2.0 * math.exp(-m * eta**2 / (8.0 * M))
    if variant == "L2-style":
        if eta <= 4.0 / M:
            return 2.0 * math.exp(-m * eta**2 / 8.0)
        return 2.0 * math.exp(-m * eta / (2.0 * M))
    raise ValueError(f"unknown variant {variant!r}")


def concentration_tail_check(
    M: float,
    m: int,
    eta: float,
    trials: int,
    seed: int,
    variant: str = "L1-style",
    family: VariableFamily | None = None,
    chunk: int = 1 << 22,
) -> float:
    """Empirical P(|sum_{j<=m} g_j| >= m*eta) over `trials` independent runs.

    The family must satisfy the norm hypotheses of the requested variant
    (L1-style: ||g||_1 <= 2; L2-style: ||g||_2 <= 2; both: ||g||_inf <= M);
    violations are rejected at construction time here.  Defaults to the
    two-point family at level min(M, 2).
    """
    if family is None:
        family = two_point_family(min(M, 2.0))
    if family.sup_bound > M + 1e-12:
        raise PreconditionError(f"family sup bound {family.sup_bound} exceeds M = {M}")
    if variant == "L1-style":
        if family.l1_bound > 2.0 + 1e-12:
            raise PreconditionError(f"L1-style needs ||g||_1 <= 2, family has {family.l1_bound}")
        if not (0.0 < eta < 1.0):
            raise ValueError(f"L1-style requires eta in (0, 1), got {eta}")
    elif variant == "L2-style":
        if family.l2_bound > 2.0 + 1e-12:
            raise PreconditionError(f"L2-style needs ||g||_2 <= 2, family has {family.l2_bound}")
        if eta <= 0:
            raise ValueError(f"eta must be positive, got {eta}")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    g = rng_stream(seed, 3)
    exceed = 0
    rows_per_chunk = max(1, chunk // max(1, m))
    done = 0
    while done < trials:
        rows = min(rows_per_chunk, trials - done)
        sums = family.sample(g, (rows, m)).sum(axis=1)
        exceed += int(np.count_nonzero(np.abs(sums) >= m * eta))
        done += rows
    return exceed / trials


def lambda_min_ladder(
    Q: IndexSet, ms: Sequence[int], seeds: Sequence[int], n: int | None = None
) -> list[dict]:
    """Median certified lambda_min per node count, for m-sweep charts.

    Returns one row {"n": n, "m": m, "median_lambda_min": value} per m.
    """
    rows = []
    for m in ms:
        lams = []
        for seed in seeds:
            z = random_nodes(int(m), Q.dim, int(seed), stream=(4, int(m)))
            lmin, _ = certify_l2_constants(Q, z)
            lams.append(lmin)
        rows.append({"n": n, "m": int(m), "median_lambda_min": float(np.median(lams))})
    return rows
