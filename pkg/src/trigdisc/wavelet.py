"""Frequency-localized orthonormal basis built from a Meyer-type window.

A smooth even profile phat equals 1 on |lam| <= (1-delta)/2, vanishes for
|lam| > (1+delta)/2, and its integer translates square-sum to 1.  The
derived band profile theta(lam) = sqrt(phat(lam/2)^2 - phat(lam)^2) yields
band polynomials Psi_n with 2^(n-1)(1-delta) < |nu| < 2^n(1+delta), and
their dyadic translates T_k (k = 2^n + j) form a complete orthonormal
basis.  Everything here uses the 2*pi-periodic rescaling v_k(x) = T_k(x/2pi)
so the basis lives on the same torus as the rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .indexset import hyperbolic_cross, positive_part
from .polynomial import NormSpec, TrigPolynomial, _dense_norm, _dense_values
from .util import rng_stream

__all__ = [
    "WindowProfile",
    "build_window",
    "theta",
    "psi",
    "basis_element",
    "tensor_basis_element",
    "support_bounds",
    "partition_residual",
    "orthonormality_check",
    "decay_check",
    "block_sup_bound",
    "expand_to_fourier",
    "coefficient_l1_ratio",
    "mterm_approx",
    "random_vcoeffs",
]


@lru_cache(maxsize=32)
def _beta_terms(smoothness: int) -> tuple[tuple[float, int], ...]:
    # beta(u) = int_0^u t^s (1-t)^s dt / B(s+1, s+1), expanded term by term;
    # the symmetry of the integrand gives beta(u) + beta(1-u) = 1 exactly
    s = smoothness
    terms = [((-1) ** i * math.comb(s, i), s + i + 1) for i in range(s + 1)]
    norm = sum(c / e for c, e in terms)
    return tuple((c / e / norm, e) for c, e in terms)


@dataclass(frozen=True)
class WindowProfile:
    """Meyer-type window: delta is the transition half-width (times 2), and
    `smoothness` the order of the polynomial blend, so the profile is C^s.
    """

    delta: float
    smoothness: int

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0 / 3.0):
            raise ValueError(f"delta must lie in (0, 1/3], got {self.delta}")
        if self.smoothness < 1:
            raise ValueError(f"smoothness must be >= 1, got {self.smoothness}")

    def beta(self, u) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        acc = np.zeros_like(u)
        for coef, expo in _beta_terms(self.smoothness):
            acc += coef * u**expo
        return acc

    def value(self, lam) -> np.ndarray:
        """phat(lam): 1 on the core, cosine blend on the transition band."""
        lam = np.abs(np.asarray(lam, dtype=float))
        lo, hi = (1.0 - self.delta) / 2.0, (1.0 + self.delta) / 2.0
        out = np.zeros_like(lam)
        out[lam <= lo] = 1.0
        band = (lam > lo) & (lam <= hi)
        out[band] = np.cos(0.5 * np.pi * self.beta((lam[band] - lo) / self.delta))
        return out


def build_window(delta: float, smoothness: int) -> WindowProfile:
    """Construct a window; the partition identity holds by the blend symmetry."""
    return WindowProfile(float(delta), int(smoothness))


def theta(window: WindowProfile, lam) -> np.ndarray:
    """sqrt(phat(lam/2)^2 - phat(lam)^2), clamped at 0 against roundoff."""
    lam = np.asarray(lam, dtype=float)
    radicand = window.value(lam / 2.0) ** 2 - window.value(lam) ** 2
    return np.sqrt(np.clip(radicand, 0.0, None))


def partition_residual(window: WindowProfile, lams) -> float:
    """max over the sample of |sum_k phat(lam + k)^2 - 1|."""
    lams = np.asarray(lams, dtype=float)
    total = np.zeros_like(lams)
    for k in range(-3, 4):
        total += window.value(lams + k) ** 2
    return float(np.abs(total - 1.0).max())


@lru_cache(maxsize=4096)
def _band_arrays(window: WindowProfile, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(frequencies, coefficients) of Psi_n in the 2pi convention."""
    hi = int(math.ceil(2**n * (1.0 + window.delta)))
    nu = np.arange(-hi, hi + 1)
    c = 2.0 ** (-n / 2.0) * theta(window, nu / 2.0**n)
    keep = c != 0.0
    nu, c = nu[keep], c[keep]
    nu.setflags(write=False)
    c.setflags(write=False)
    return nu, c


def psi(window: WindowProfile, n: int) -> TrigPolynomial:
    """The band polynomial Psi_n = 2^(-n/2) sum_nu theta(nu 2^-n) e^{i nu x}."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    nu, c = _band_arrays(window, n)
    return TrigPolynomial(1, {(int(v),): complex(x) for v, x in zip(nu, c)})


def _decode(k: int) -> tuple[int, int]:
    n = k.bit_length() - 1
    return n, k - (1 << n)


@lru_cache(maxsize=65536)
def _element_arrays(window: WindowProfile, k: int) -> tuple[np.ndarray, np.ndarray]:
    if k == 0:
        return np.array([0]), np.array([1.0 + 0.0j])
    n, j = _decode(k)
    nu, c = _band_arrays(window, n)
    shifted = c * np.exp(-2j * np.pi * nu * (j + 0.5) / 2.0**n)
    shifted.setflags(write=False)
    return nu, shifted


def basis_element(window: WindowProfile, k: int) -> TrigPolynomial:
    """v_k: the constant 1 for k = 0, else Psi_n translated by (j+1/2)2^-n
    (a pure coefficient phase), where k = 2^n + j with 0 <= j < 2^n.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    nu, c = _element_arrays(window, k)
    return TrigPolynomial(1, {(int(v),): complex(x) for v, x in zip(nu, c)})


def support_bounds(window: WindowProfile, k: int) -> tuple[float, float]:
    """(lo, hi) with every coefficient of v_k vanishing unless lo < |nu| < hi."""
    if k == 0:
        return (-1.0, 0.5)
    n, _ = _decode(k)
    return (2.0 ** (n - 1) * (1.0 - window.delta), 2.0**n * (1.0 + window.delta))


def tensor_basis_element(window: WindowProfile, kvec) -> TrigPolynomial:
    """v_k(x) = prod_i v_{k_i}(x_i) as a d-variate polynomial."""
    kvec = tuple(int(k) for k in kvec)
    coeffs: dict[tuple[int, ...], complex] = {(): 1.0 + 0.0j}
    for k in kvec:
        nu, c = _element_arrays(window, k)
        coeffs = {
            key + (int(v),): val * x for key, val in coeffs.items() for v, x in zip(nu, c)
        }
    return TrigPolynomial(len(kvec), coeffs)


def orthonormality_check(window: WindowProfile, kmax: int) -> float:
    """max |<v_a, v_b> - delta_ab| over 0 <= a, b <= kmax (coefficient sums)."""
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    elems = [dict(zip(*(arr.tolist() for arr in _element_arrays(window, k))))
             for k in range(kmax + 1)]
    worst = 0.0
    for a in range(kmax + 1):
        for b in range(a, kmax + 1):
            inner = sum(ca * np.conj(elems[b].get(nu, 0.0)) for nu, ca in elems[a].items())
            worst = max(worst, abs(inner - (1.0 if a == b else 0.0)))
    return float(worst)


def decay_check(window: WindowProfile, n: int, kappa: float, grid_factor: int = 128) -> float:
    """max over a fine grid of |Psi_n(x)| 2^(-n/2) (2^n |sin pi x| + 1)^kappa.

    Bounded uniformly in n exactly when the window is smooth enough to
    support the decay exponent kappa (roughly kappa <= smoothness + 1).
    """
    nu, c = _band_arrays(window, n)
    L = max(4096, grid_factor * 2**n)
    A = np.zeros(L, dtype=complex)
    A[nu % L] = c
    vals = np.abs(np.fft.ifft(A) * L)
    x = np.arange(L) / L
    weight = (2.0**n * np.abs(np.sin(np.pi * x)) + 1.0) ** kappa
    return float(np.max(vals * weight) * 2.0 ** (-n / 2.0))


def _positive_block_indices(s) -> list[tuple[int, ...]]:
    import itertools

    ranges = []
    for si in s:
        if si == 0:
            ranges.append([0])
        else:
            ranges.append(list(range(2 ** (si - 1), 2**si)))
    return sorted(itertools.product(*ranges))


def block_sup_bound(window: WindowProfile, s, coeffs, oversampling: int = 8) -> float:
    """sup |sum_{k in rho+(s)} a_k v_k| / (2^(||s||_1 / 2) max |a_k|).

    `coeffs` maps each k in the positive dyadic block rho+(s) to a_k (a
    dict, or a sequence aligned with the lexicographic block order).
    """
    s = tuple(int(x) for x in s)
    if any(x < 0 for x in s):
        raise ValueError(f"block index must be componentwise >= 0, got {s}")
    block = _positive_block_indices(s)
    if isinstance(coeffs, dict):
        amap = {tuple(int(x) for x in k): complex(v) for k, v in coeffs.items()}
    else:
        if len(coeffs) != len(block):
            raise ValueError(f"expected {len(block)} coefficients for block {s}")
        amap = dict(zip(block, map(complex, coeffs)))
    amax = max((abs(v) for v in amap.values()), default=0.0)
    if amax == 0.0:
        return 0.0
    C, Kj = _accumulate_dense(window, amap, len(s))
    L = np.maximum(oversampling * (2 * Kj + 1), 2 * Kj + 1)
    sup = float(np.abs(_dense_values(C, Kj, L)).max())
    return sup / (2.0 ** (sum(s) / 2.0) * amax)


def _accumulate_dense(window: WindowProfile, coeffs: dict, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense Fourier tensor of sum_k f_k v_k (tensor-product elements)."""
    Kj = np.zeros(d, dtype=np.int64)
    for kvec in coeffs:
        for i, k in enumerate(kvec):
            nu, _ = _element_arrays(window, int(k))
            Kj[i] = max(Kj[i], int(np.abs(nu).max()))
    C = np.zeros(tuple(2 * Kj + 1), dtype=complex)
    for kvec, fk in coeffs.items():
        if fk == 0:
            continue
        axes = [_element_arrays(window, int(k)) for k in kvec]
        sub = np.asarray(complex(fk))
        for _, c in axes:
            sub = np.multiply.outer(sub, c)
        # band supports are two disjoint integer ranges, so index arrays
        # (not slices) are required
        C[np.ix_(*[nu + Kj[i] for i, (nu, _) in enumerate(axes)])] += sub
    return C, Kj


def expand_to_fourier(window: WindowProfile, coeffs: dict, d: int) -> TrigPolynomial:
    """The d-variate polynomial sum_k f_k v_k in the e^{i<nu,x>} basis."""
    C, Kj = _accumulate_dense(window, coeffs, d)
    out: dict[tuple[int, ...], complex] = {}
    for idx in np.argwhere(C != 0):
        key = tuple(int(idx[i]) - int(Kj[i]) for i in range(d))
        out[key] = complex(C[tuple(idx)])
    return TrigPolynomial(d, out)


def _validate_vcoeffs(coeffs: dict, n: int, d: int) -> dict:
    Qp = positive_part(hyperbolic_cross(n, d))
    out = {}
    for k, v in coeffs.items():
        key = tuple(int(x) for x in k)
        if key not in Qp:
            raise ValueError(f"coefficient index {key} outside the positive cross at level {n}")
        out[key] = complex(v)
    return out


def coefficient_l1_ratio(
    coeffs: dict, window: WindowProfile, n: int, d: int, oversampling: int = 2
) -> float:
    """sum |f_k| / (n^((d-1)/2) |Q_n|^(1/2) ||f||_1) for f = sum f_k v_k.

    The denominator uses the size of the full (signed) cross at level n;
    ||f||_1 is a Riemann estimate on the expanded Fourier form.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    amap = _validate_vcoeffs(coeffs, n, d)
    sum_abs = sum(abs(v) for v in amap.values())
    if sum_abs == 0.0:
        raise ValueError("ratio is undefined for the zero polynomial")
    C, Kj = _accumulate_dense(window, amap, d)
    f_l1, _, _ = _dense_norm(C, Kj, NormSpec(1.0, oversampling))
    qn = len(hyperbolic_cross(n, d))
    return sum_abs / (n ** ((d - 1) / 2.0) * math.sqrt(qn) * f_l1)


def mterm_approx(
    coeffs: dict, m: int, p: float, window: WindowProfile, d: int, oversampling: int = 2
) -> float:
    """Lp error of hard thresholding to the m largest |f_k| (upper-bounds
    the best m-term error; 0 once m covers every nonzero coefficient).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not (2.0 <= p < math.inf):
        raise ValueError(f"p must lie in [2, inf), got {p}")
    items = [(tuple(int(x) for x in k), complex(v)) for k, v in coeffs.items() if v != 0]
    items.sort(key=lambda kv: (-abs(kv[1]), kv[0]))
    dropped = dict(items[m:])
    if not dropped:
        return 0.0
    C, Kj = _accumulate_dense(window, dropped, d)
    err, _, _ = _dense_norm(C, Kj, NormSpec(float(p), oversampling))
    return err


def random_vcoeffs(
    n: int, d: int, seed, magnitude: str = "gaussian"
) -> dict[tuple[int, ...], complex]:
    """Random coefficient map on the positive cross at level n.

    "gaussian": standard complex normal entries.  "rank-decay": magnitudes
    proportional to 1/rank under a random assignment with random phases,
    normalized to sum |f_k| = 1 (a near-extremal profile for thresholding).
    """
    Qp = positive_part(hyperbolic_cross(n, d))
    if len(Qp) == 0:
        raise ValueError("empty positive cross")
    key = (seed,) if np.isscalar(seed) else tuple(seed)
    g = rng_stream(*key, 6)
    mlen = len(Qp)
    if magnitude == "gaussian":
        z = (g.standard_normal(mlen) + 1j * g.standard_normal(mlen)) / math.sqrt(2)
    elif magnitude == "rank-decay":
        mags = 1.0 / np.arange(1, mlen + 1)
        mags = g.permutation(mags)
        phases = np.exp(2j * np.pi * g.uniform(size=mlen))
        z = mags * phases / mags.sum()
    else:
        raise ValueError(f"unknown magnitude profile {magnitude!r}")
    return dict(zip(Qp.freqs, z.tolist()))
