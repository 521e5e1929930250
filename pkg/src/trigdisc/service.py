"""HTTP service exposing the discretization pipelines.

Each endpoint wraps one library pipeline with pydantic request/response
models; all payloads are JSON and all mathematical objects travel in the
same line-oriented text formats the library writes to disk.  Input errors
map to 400, failed numerical certifications to 409, and experiment results
that are legitimate failures (e.g. an unsuccessful node search) come back
as 200 with success=False.
"""

from __future__ import annotations

import time
from typing import Literal

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import VerificationError
from . import indexset as iset
from . import grids
from . import korobov
from . import montecarlo as mc
from . import sparsify as sp
from . import wavelet as wav
from .util import fmt17, rng_stream

app = FastAPI(title="trigdisc", version=__version__)


@app.exception_handler(ValueError)
async def _value_error(_, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(VerificationError)
async def _verification_error(_, exc: VerificationError):
    return JSONResponse(status_code=409, content={"detail": str(exc)})


# ---------------------------------------------------------------------------
# shared models


class IndexSetSpec(BaseModel):
    """A frequency set, inline or by named construction."""

    kind: Literal["hyperbolic", "box", "dyadic", "explicit"] = "explicit"
    n: int | None = None
    d: int | None = None
    bounds: list[int] | None = None
    s: list[int] | None = None
    freqs: list[list[int]] | None = None


def resolve_indexset(spec: IndexSetSpec) -> iset.IndexSet:
    if spec.kind == "hyperbolic":
        if spec.n is None or spec.d is None:
            raise ValueError("hyperbolic index set needs n and d")
        return iset.hyperbolic_cross(spec.n, spec.d)
    if spec.kind == "box":
        if spec.bounds is None:
            raise ValueError("box index set needs bounds")
        return iset.box_set(spec.bounds)
    if spec.kind == "dyadic":
        if spec.s is None:
            raise ValueError("dyadic block needs s")
        return iset.dyadic_block(spec.s)
    if spec.freqs is None:
        raise ValueError("explicit index set needs freqs")
    if not spec.freqs:
        raise ValueError("explicit index set must be nonempty")
    return iset.IndexSet(len(spec.freqs[0]), tuple(map(tuple, spec.freqs)))


class HealthResponse(BaseModel):
    status: str
    version: str


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


# ---------------------------------------------------------------------------
# index sets


class IndexSetRequest(BaseModel):
    spec: IndexSetSpec
    transform: Literal["none", "difference", "positive"] = "none"
    include_lambda_size: bool = True


class IndexSetResponse(BaseModel):
    dim: int
    count: int
    lambda_size: int | None = None
    serialized: str


@app.post("/indexset", response_model=IndexSetResponse)
def build_indexset(req: IndexSetRequest) -> IndexSetResponse:
    Q = resolve_indexset(req.spec)
    if req.transform == "difference":
        Q = iset.difference_set(Q)
    elif req.transform == "positive":
        Q = iset.positive_part(Q)
    lam = None
    if req.include_lambda_size and len(Q):
        lam = len(iset.difference_set(Q))
    return IndexSetResponse(dim=Q.dim, count=len(Q), lambda_size=lam, serialized=Q.serialize())


# ---------------------------------------------------------------------------
# lattice certification


class KorobovRequest(BaseModel):
    spec: IndexSetSpec
    include_nodes: bool = True


class KorobovResponse(BaseModel):
    ok: bool
    p: int
    a: int
    dim: int
    q_size: int
    lambda_size: int
    lambda_hash: str
    max_cubature_defect: float
    lambda_min: float
    lambda_max: float
    within_safe_bound: bool
    certificate: str
    nodes: str | None = None


@app.post("/korobov", response_model=KorobovResponse)
def certify_korobov(req: KorobovRequest) -> KorobovResponse:
    Q = resolve_indexset(req.spec)
    L = iset.difference_set(Q)
    params, nodes = korobov.exact_discretization(Q)
    defect = korobov.cubature_exactness(L, nodes)
    lmin, lmax = mc.certify_l2_constants(Q, nodes)
    ok = defect <= 1e-10 and abs(lmin - 1.0) <= 1e-9 and abs(lmax - 1.0) <= 1e-9
    cert = f"p={params.p} a={params.a} dim={params.dim} lambda_hash={params.lambda_hash}\n"
    return KorobovResponse(
        ok=ok,
        p=params.p,
        a=params.a,
        dim=params.dim,
        q_size=len(Q),
        lambda_size=len(L),
        lambda_hash=params.lambda_hash,
        max_cubature_defect=defect,
        lambda_min=lmin,
        lambda_max=lmax,
        within_safe_bound=params.p <= 4 * Q.dim * len(Q) ** 2,
        certificate=cert,
        nodes=_pointset_text(nodes) if req.include_nodes else None,
    )


def _pointset_text(ps: grids.PointSet) -> str:
    lines = [f"dim={ps.dim} count={len(ps)} normalized={str(ps.normalized).lower()}"]
    for w, x in zip(ps.weights, ps.nodes):
        lines.append(fmt17(w) + " " + " ".join(fmt17(c) for c in x))
    return "\n".join(lines) + "\n"


class KorobovVerifyRequest(BaseModel):
    spec: IndexSetSpec
    certificate: str
    nodes: str


class KorobovVerifyResponse(BaseModel):
    ok: bool
    failures: list[str]
    max_cubature_defect: float | None = None
    lambda_min: float | None = None
    lambda_max: float | None = None


@app.post("/korobov/verify", response_model=KorobovVerifyResponse)
def verify_korobov(req: KorobovVerifyRequest) -> KorobovVerifyResponse:
    """Re-verify an existing certificate + node file against its index set."""
    Q = resolve_indexset(req.spec)
    fields = dict(tok.split("=", 1) for tok in req.certificate.split())
    params = korobov.KorobovParams(
        int(fields["p"]), int(fields["a"]), int(fields["dim"]), fields.get("lambda_hash", "")
    )
    failures: list[str] = []
    L = iset.difference_set(Q)
    if params.lambda_hash and params.lambda_hash != L.sha256():
        failures.append("lambda_hash does not match the difference set of Q")
    ps = grids.parse_pointset(req.nodes)
    ps.meta.update(kind="korobov", p=params.p, a=params.a)
    defect = lmin = lmax = None
    try:
        korobov.verify_nodes(ps, Q)
    except VerificationError as exc:
        failures.append(str(exc))
    else:
        defect = korobov.cubature_exactness(L, ps)
        if defect > 1e-10:
            failures.append(f"cubature defect {defect:.3e} exceeds 1e-10")
        lmin, lmax = mc.certify_l2_constants(Q, ps)
        if abs(lmin - 1.0) > 1e-9 or abs(lmax - 1.0) > 1e-9:
            failures.append(f"frame constants [{lmin}, {lmax}] differ from 1")
    return KorobovVerifyResponse(
        ok=not failures, failures=failures,
        max_cubature_defect=defect, lambda_min=lmin, lambda_max=lmax,
    )


# ---------------------------------------------------------------------------
# Monte-Carlo search and ladders


class McSearchRequest(BaseModel):
    spec: IndexSetSpec
    q: float = 2.0
    m: int = Field(gt=0)
    eta: float = Field(0.25, gt=0)
    attempts: int = Field(10, gt=0)
    trials: int = Field(50, gt=0)
    seed: int = Field(0, ge=0)
    level: int | None = None
    include_nodes: bool = False


class McSearchResponse(BaseModel):
    success: bool
    report: dict
    nodes: str | None = None


@app.post("/mc/search", response_model=McSearchResponse)
def mc_search(req: McSearchRequest) -> McSearchResponse:
    Q = resolve_indexset(req.spec)
    result = mc.marcinkiewicz_search(
        Q, req.q, req.m, req.attempts, req.eta, req.trials, req.seed
    )
    result.report.n = req.level
    nodes = None
    if req.include_nodes and result.point_set is not None:
        nodes = _pointset_text(result.point_set)
    return McSearchResponse(success=result.success, report=result.report.to_dict(), nodes=nodes)


class LadderRequest(BaseModel):
    spec: IndexSetSpec
    ms: list[int]
    seeds: int = Field(20, gt=0)
    level: int | None = None


class LadderResponse(BaseModel):
    rows: list[dict]


@app.post("/mc/ladder", response_model=LadderResponse)
def mc_ladder(req: LadderRequest) -> LadderResponse:
    Q = resolve_indexset(req.spec)
    rows = mc.lambda_min_ladder(Q, req.ms, range(req.seeds), n=req.level)
    return LadderResponse(rows=rows)


# ---------------------------------------------------------------------------
# sparsification


class SparsifyRequest(BaseModel):
    spec: IndexSetSpec
    grid: Literal["korobov", "full"] = "korobov"
    oversample: float = Field(4.0, gt=1.0)


class SparsifyResponse(BaseModel):
    m: int
    n_space: int
    nonzeros: int
    kappa: float
    kappa_bound: float
    weighted_nodes: str
    report: dict


@app.post("/sparsify", response_model=SparsifyResponse)
def sparsify_run(req: SparsifyRequest) -> SparsifyResponse:
    t0 = time.perf_counter()
    Q = resolve_indexset(req.spec)
    if req.grid == "korobov":
        _, nodes = korobov.exact_discretization(Q)
    else:
        N = tuple(int(np.abs(Q.as_array()[:, j]).max()) for j in range(Q.dim))
        nodes = grids.full_grid(N)
    frame = sp.frame_from_grid(Q, nodes)
    weights, kappa = sp.bss_sparsify(frame, req.oversample)
    weighted = grids.PointSet(
        nodes.dim, nodes.nodes, weights, normalized=False,
        meta={"kind": "bss-weighted", **nodes.meta},
    )
    nonzeros = int(np.count_nonzero(weights))
    # weighted two-sided constants after rescaling are exactly [1, kappa]
    report = mc.DiscretizationReport(
        kind="weighted", q=2.0, d=Q.dim, Q_size=len(Q), m=nonzeros,
        lower=1.0, upper=kappa, success=True,
        runtime_ms=1e3 * (time.perf_counter() - t0),
    )
    return SparsifyResponse(
        m=len(nodes),
        n_space=frame.space_dim,
        nonzeros=nonzeros,
        kappa=kappa,
        kappa_bound=sp.bss_condition_bound(req.oversample),
        weighted_nodes=_pointset_text(weighted),
        report=report.to_dict(),
    )


# ---------------------------------------------------------------------------
# wavelet checks


class WaveletRequest(BaseModel):
    delta: float = Field(1.0 / 6.0, gt=0, le=1.0 / 3.0)
    smoothness: int = Field(3, ge=1)
    checks: list[Literal["partition", "support", "orthonormality", "decay"]] = Field(
        default_factory=lambda: ["partition", "support", "orthonormality", "decay"]
    )
    kmax: int = 63
    gram_kmax: int = 15
    decay_kappa: float = 2.0
    # the default window profile settles into the 5% decay budget from n = 5;
    # wide low-order windows (delta ~ 1/3, smoothness 1) meet it from n = 4
    decay_levels: list[int] = Field(default_factory=lambda: list(range(5, 11)))
    partition_points: int = 1000
    seed: int = 0


class WaveletResponse(BaseModel):
    passed: bool
    results: dict


@app.post("/wavelet", response_model=WaveletResponse)
def wavelet_checks(req: WaveletRequest) -> WaveletResponse:
    window = wav.build_window(req.delta, req.smoothness)
    results: dict = {}
    passed = True
    if "partition" in req.checks:
        lams = rng_stream(req.seed, 8).uniform(-3.0, 3.0, req.partition_points)
        resid = wav.partition_residual(window, lams)
        ok = resid <= 1e-12
        results["partition"] = {"residual": resid, "pass": ok}
        passed &= ok
    if "support" in req.checks:
        violations = 0
        for k in range(req.kmax + 1):
            lo, hi = wav.support_bounds(window, k)
            elem = wav.basis_element(window, k)
            for (nu,), c in elem.coeffs.items():
                if c != 0 and not (lo < abs(nu) < hi):
                    violations += 1
        ok = violations == 0
        results["support"] = {"kmax": req.kmax, "violations": violations, "pass": ok}
        passed &= ok
    if "orthonormality" in req.checks:
        off = wav.orthonormality_check(window, req.gram_kmax)
        ok = off <= 1e-8
        results["orthonormality"] = {"kmax": req.gram_kmax, "max_offdiagonal": off, "pass": ok}
        passed &= ok
    if "decay" in req.checks:
        consts = [wav.decay_check(window, n, req.decay_kappa) for n in req.decay_levels]
        ratios = [b / a for a, b in zip(consts, consts[1:])]
        ok = all(r <= 1.05 for r in ratios)
        results["decay"] = {
            "kappa": req.decay_kappa,
            "levels": list(req.decay_levels),
            "constants": consts,
            "max_step_ratio": max(ratios) if ratios else 1.0,
            "pass": ok,
        }
        passed &= ok
    return WaveletResponse(passed=bool(passed), results=results)
