"""Finite frequency sets in Z^d: dyadic blocks, step hyperbolic crosses,
integer boxes, difference sets and related algebra.

All sets are stored as explicit, lexicographically sorted tuples of integer
vectors, which makes serialization and hashing deterministic.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "IndexSet",
    "dyadic_block",
    "hyperbolic_cross",
    "difference_set",
    "box_set",
    "positive_part",
    "save_indexset",
    "load_indexset",
]


@dataclass(frozen=True)
class IndexSet:
    """An immutable finite set of integer frequency vectors in Z^d.

    Vectors are deduplicated and kept in lexicographic order, so equal sets
    compare equal and serialize identically across runs.
    """

    dim: int
    freqs: tuple[tuple[int, ...], ...]
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        canon = sorted({tuple(int(c) for c in v) for v in self.freqs})
        for v in canon:
            if len(v) != self.dim:
                raise ValueError(f"vector {v} has length {len(v)}, expected {self.dim}")
        object.__setattr__(self, "freqs", tuple(canon))
        object.__setattr__(self, "_members", frozenset(canon))

    def __len__(self) -> int:
        return len(self.freqs)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.freqs)

    def __contains__(self, v) -> bool:
        return tuple(int(c) for c in v) in self._members

    def as_array(self) -> np.ndarray:
        """Frequencies as an (len, dim) int64 array in canonical order."""
        if not self.freqs:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(self.freqs, dtype=np.int64)

    def max_component(self) -> int:
        """max over vectors and coordinates of |k_j| (0 for the empty set)."""
        if not self.freqs:
            return 0
        return int(np.abs(self.as_array()).max())

    def serialize(self) -> str:
        lines = [f"dim={self.dim} count={len(self)}"]
        lines += [" ".join(str(c) for c in v) for v in self.freqs]
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        """Hash of the canonical serialization; binds certificates to the set."""
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def _dyadic_range(s: int) -> list[int]:
    # integers k with [2^(s-1)] <= |k| < 2^s; the integer part makes s=0 give {0}
    if s < 0:
        raise ValueError(f"block index must be >= 0, got {s}")
    if s == 0:
        return [0]
    lo, hi = 2 ** (s - 1), 2**s
    return list(range(-hi + 1, -lo + 1)) + list(range(lo, hi))


def dyadic_block(s: Sequence[int]) -> IndexSet:
    """The dyadic frequency block rho(s) = {k : [2^(s_j-1)] <= |k_j| < 2^(s_j)}."""
    s = [int(c) for c in s]
    if not s:
        raise ValueError("block multi-index must be nonempty")
    ranges = [_dyadic_range(c) for c in s]
    return IndexSet(len(s), tuple(itertools.product(*ranges)))


def hyperbolic_cross(n: int, d: int) -> IndexSet:
    """The step hyperbolic cross: union of dyadic_block(s) over ||s||_1 <= n."""
    if n < 0:
        raise ValueError(f"level n must be >= 0, got {n}")
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")
    freqs: set[tuple[int, ...]] = set()
    for s in _compositions_up_to(n, d):
        freqs.update(itertools.product(*[_dyadic_range(c) for c in s]))
    return IndexSet(d, tuple(freqs))


def _compositions_up_to(n: int, d: int) -> Iterator[tuple[int, ...]]:
    """All s in Z_+^d with s_1 + ... + s_d <= n."""
    if d == 1:
        for s in range(n + 1):
            yield (s,)
        return
    for s0 in range(n + 1):
        for rest in _compositions_up_to(n - s0, d - 1):
            yield (s0,) + rest


def difference_set(Q: IndexSet) -> IndexSet:
    """All pairwise differences {m - k : m, k in Q}; contains 0, |.| <= |Q|^2."""
    if len(Q) == 0:
        raise ValueError("difference set of an empty set is undefined")
    A = Q.as_array()
    D = (A[:, None, :] - A[None, :, :]).reshape(-1, Q.dim)
    D = np.unique(D, axis=0)
    return IndexSet(Q.dim, tuple(map(tuple, D.tolist())))


def box_set(N: Sequence[int]) -> IndexSet:
    """The full integer box [-N_1, N_1] x ... x [-N_d, N_d]."""
    N = [int(c) for c in N]
    if not N:
        raise ValueError("box bound vector must be nonempty")
    if any(c < 0 for c in N):
        raise ValueError(f"box bounds must be >= 0, got {N}")
    ranges = [range(-c, c + 1) for c in N]
    return IndexSet(len(N), tuple(itertools.product(*ranges)))


def positive_part(Q: IndexSet) -> IndexSet:
    """Subset of Q with all coordinates >= 0 (may be empty)."""
    kept = tuple(v for v in Q if all(c >= 0 for c in v))
    return IndexSet(Q.dim, kept)


def save_indexset(Q: IndexSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(Q.serialize())


def load_indexset(path_or_text) -> IndexSet:
    """Parse the line-oriented format written by :func:`save_indexset`."""
    if hasattr(path_or_text, "read"):
        text = path_or_text.read()
    elif isinstance(path_or_text, str) and "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty index set file")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    dim, count = int(header["dim"]), int(header["count"])
    freqs = [tuple(int(tok) for tok in ln.split()) for ln in lines[1:]]
    if len(freqs) != count:
        raise ValueError(f"header promises {count} vectors, file has {len(freqs)}")
    return IndexSet(dim, tuple(freqs))
