"""Classical full-grid discretization for the box case Pi(N).

The full grid of theta(N) = prod(2*N_j + 1) equispaced nodes discretizes the
L2 norm of every t with spectrum in Pi(N) exactly; the oversampled grid (4
points per period instead of 2) is the classical node set for the two-sided
Lq inequalities, 1 <= q <= inf.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .indexset import box_set
from .polynomial import TrigPolynomial, evaluate_at_nodes, l2_norm
from .util import fmt17

__all__ = [
    "PointSet",
    "full_grid",
    "oversampled_grid",
    "exact_l2_check",
    "theta_count",
    "nu_count",
    "save_pointset",
    "parse_pointset",
    "load_pointset",
]

TWO_PI = 2.0 * np.pi


@dataclass
class PointSet:
    """Weighted nodes in [0, 2pi)^d.

    `normalized` means the weights sum to 1 (probability-type set); weighted
    sets from sparsification carry arbitrary nonnegative weights.  `meta`
    records provenance (grid kind, lattice parameters) and is not part of
    equality or the serialized format.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    normalized: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.nodes = np.mod(np.atleast_2d(np.asarray(self.nodes, dtype=float)), TWO_PI)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.nodes.shape != (len(self.weights), self.dim):
            raise ValueError(
                f"nodes shape {self.nodes.shape} does not match "
                f"{len(self.weights)} weights in dimension {self.dim}"
            )
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if self.normalized and len(self.weights) and abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"normalized point set has weight sum {self.weights.sum()}")

    def __len__(self) -> int:
        return len(self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.normalized == other.normalized
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


def theta_count(N) -> int:
    """theta(N) = prod(2*N_j + 1) = dim T(Pi(N))."""
    return int(np.prod([2 * int(c) + 1 for c in N]))


def nu_count(N) -> int:
    """nu(N) = prod max(N_j, 1)."""
    return int(np.prod([max(int(c), 1) for c in N]))


def full_grid(N) -> PointSet:
    """theta(N) equally weighted nodes x^n = (2*pi*n_j/(2*N_j+1)), 0 <= n_j <= 2*N_j."""
    N = [int(c) for c in N]
    if any(c < 0 for c in N):
        raise ValueError(f"box bounds must be >= 0, got {N}")
    d = len(N)
    axes = [np.arange(2 * c + 1) * (TWO_PI / (2 * c + 1)) for c in N]
    nodes = np.array(list(itertools.product(*axes)), dtype=float)
    m = theta_count(N)
    return PointSet(d, nodes, np.full(m, 1.0 / m), meta={"kind": "full_grid", "N": tuple(N)})


def oversampled_grid(N) -> PointSet:
    """nu(4N) equally weighted nodes x(n) = (pi*n_j/(2*N_j)), 1 <= n_j <= 4*N_j.

    Axes with N_j = 0 contribute the single coordinate 0.  Coordinates are
    reduced mod 2pi; coincidences arising from the reduction are kept as
    distinct weighted copies so the node count stays nu(4N).
    """
    N = [int(c) for c in N]
    if any(c < 0 for c in N):
        raise ValueError(f"box bounds must be >= 0, got {N}")
    d = len(N)
    axes = []
    for c in N:
        if c == 0:
            axes.append(np.zeros(1))
        else:
            axes.append(np.arange(1, 4 * c + 1) * (np.pi / (2 * c)))
    nodes = np.array(list(itertools.product(*axes)), dtype=float)
    m = nu_count([4 * c for c in N])
    return PointSet(d, nodes, np.full(m, 1.0 / m), meta={"kind": "oversampled_grid", "N": tuple(N)})


def exact_l2_check(t: TrigPolynomial, grid: PointSet) -> float:
    """|sum_nu w_nu |t(x^nu)|^2 - ||t||_2^2| for a full grid covering t.

    The grid must come from :func:`full_grid` and the spectrum of t must lie
    inside Pi(N); otherwise aliasing breaks the identity and the input is
    rejected.  The defect is pure floating-point accumulation, at most
    ~1e-10 * ||t||_2^2.
    """
    if grid.meta.get("kind") != "full_grid":
        raise ValueError("exact_l2_check requires a grid built by full_grid")
    N = grid.meta["N"]
    if t.dim != grid.dim:
        raise ValueError("polynomial/grid dimension mismatch")
    box = box_set(N)
    outside = [k for k in t.spectrum() if k not in box]
    if outside:
        raise ValueError(f"spectrum exceeds Pi({N}): e.g. {outside[0]} would alias")
    vals = evaluate_at_nodes(t, grid.nodes)
    discrete = float(np.sum(grid.weights * np.abs(vals) ** 2))
    return abs(discrete - l2_norm(t) ** 2)


def save_pointset(ps: PointSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"dim={ps.dim} count={len(ps)} normalized={str(ps.normalized).lower()}\n")
        for w, x in zip(ps.weights, ps.nodes):
            fh.write(fmt17(w) + " " + " ".join(fmt17(c) for c in x) + "\n")


def parse_pointset(text: str) -> PointSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty point set")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    dim, count = int(header["dim"]), int(header["count"])
    normalized = header.get("normalized", "true") == "true"
    rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    if len(rows) != count:
        raise ValueError(f"header promises {count} nodes, file has {len(rows)}")
    arr = np.array(rows, dtype=float) if rows else np.zeros((0, dim + 1))
    return PointSet(dim, arr[:, 1:], arr[:, 0], normalized=normalized)


def load_pointset(path) -> PointSet:
    with open(path) as fh:
        return parse_pointset(fh.read())
