"""Command-line front end: a thin client of the HTTP service.

Every subcommand builds a request, posts it to the service (an in-process
instance by default, or a remote one via --server / TRIGDISC_SERVER) and
writes the returned artifacts to disk.  Exit codes: 0 success, 1 usage or
input error, 2 mathematical verification failure.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import httpx

from . import __version__

USAGE_ERROR, VERIFY_ERROR = 1, 2


class VerificationFailure(click.ClickException):
    """A numerical verification failed; maps to exit code 2."""

    exit_code = VERIFY_ERROR


class ServiceClient:
    """HTTP client; without a server URL the app is mounted in process."""

    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DeprecationWarning)
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        try:
            resp = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise click.ClickException(f"cannot reach service: {exc}") from exc
        if resp.status_code in (400, 422):
            raise click.UsageError(_detail(resp))
        if resp.status_code == 409:
            raise VerificationFailure(_detail(resp))
        if resp.status_code != 200:
            raise click.ClickException(f"service error {resp.status_code}: {_detail(resp)}")
        return resp.json()


def _detail(resp) -> str:
    try:
        return json.dumps(resp.json().get("detail"))
    except Exception:
        return resp.text


@dataclass
class ExperimentConfig:
    """Resolved run parameters, embedded into every report for provenance."""

    command: str
    params: dict = field(default_factory=dict)
    version: str = __version__

    def as_dict(self) -> dict:
        return asdict(self)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _resolve(flag_value, config: dict, key: str, default):
    """Flags override config-file values, which override defaults."""
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


def _outdir(out: str | None) -> Path:
    path = Path(out or os.environ.get("TRIGDISC_OUTDIR", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_thread_cap(threads: int | None) -> int:
    threads = threads if threads is not None else int(os.environ.get("TRIGDISC_THREADS", "1"))
    if threads < 1:
        raise click.UsageError("--threads must be >= 1")
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(threads)
    except ImportError:
        # computations are sequential numpy calls either way; the cap only
        # constrains BLAS pools when the optional controller is installed
        pass
    return threads


def _write_report(path: Path, payload: dict, config: ExperimentConfig) -> None:
    payload = dict(payload)
    payload["config"] = config.as_dict()
    payload["version"] = __version__
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _spec_from_file(qfile: str) -> dict:
    from .indexset import load_indexset

    Q = load_indexset(qfile)
    return {"kind": "explicit", "freqs": [list(v) for v in Q.freqs]}


@click.group()
@click.option("--server", envvar="TRIGDISC_SERVER", default=None,
              help="Base URL of a running service; default runs in process.")
@click.option("--out", default=None, help="Output directory (env TRIGDISC_OUTDIR).")
@click.option("--threads", type=int, default=None,
              help="Thread cap for BLAS pools (env TRIGDISC_THREADS, default 1).")
@click.option("--config", "config_path", default=None,
              help="JSON file with default parameter values; flags win.")
@click.version_option(version=__version__)
@click.pass_context
def cli(ctx, server, out, threads, config_path):
    """Sampling discretization toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["client"] = ServiceClient(server)
    ctx.obj["outdir"] = _outdir(out)
    ctx.obj["threads"] = _apply_thread_cap(threads)
    ctx.obj["config"] = _load_config(config_path)


@cli.command()
@click.option("--kind", type=click.Choice(["hyperbolic", "box", "dyadic", "diff", "positive"]),
              required=True)
@click.option("--n", type=int, default=None, help="Hyperbolic cross level.")
@click.option("--d", type=int, default=None, help="Dimension.")
@click.option("--N", "bounds", default=None, help="Box bounds, comma-separated.")
@click.option("--s", default=None, help="Dyadic block index, comma-separated.")
@click.option("--of", "source", default=None, help="Input index-set file for diff/positive.")
@click.option("--name", default="indexset.txt", help="Output file name.")
@click.pass_context
def indexset(ctx, kind, n, d, bounds, s, source, name):
    """Build an index set, report |Q| and |Lambda(Q)|, write the file."""
    cfg = ctx.obj["config"]
    n = _resolve(n, cfg, "n", None)
    d = _resolve(d, cfg, "d", None)
    if kind in ("diff", "positive"):
        if not source:
            raise click.UsageError(f"--kind {kind} requires --of FILE")
        spec = _spec_from_file(source)
        transform = "difference" if kind == "diff" else "positive"
    else:
        transform = "none"
        if kind == "hyperbolic":
            spec = {"kind": "hyperbolic", "n": n, "d": d}
        elif kind == "box":
            if bounds is None:
                raise click.UsageError("--kind box requires --N")
            spec = {"kind": "box", "bounds": [int(tok) for tok in bounds.split(",")]}
        else:
            if s is None:
                raise click.UsageError("--kind dyadic requires --s")
            spec = {"kind": "dyadic", "s": [int(tok) for tok in s.split(",")]}
    resp = ctx.obj["client"].post("/indexset", {"spec": spec, "transform": transform})
    path = ctx.obj["outdir"] / name
    path.write_text(resp["serialized"])
    click.echo(f"|Q| = {resp['count']}  |Lambda(Q)| = {resp['lambda_size']}  -> {path}")


@cli.command()
@click.argument("qfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--prefix", default=None, help="Output file prefix (default: QFILE stem).")
@click.option("--verify-nodes", "nodes_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Re-verify an existing node file instead of building.")
@click.option("--cert", "cert_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Certificate for --verify-nodes.")
@click.pass_context
def korobov(ctx, qfile, prefix, nodes_file, cert_file):
    """Certified exact-L2 lattice for the index set in QFILE."""
    if nodes_file or cert_file:
        if not (nodes_file and cert_file):
            raise click.UsageError("--verify-nodes and --cert must be given together")
        payload = {
            "spec": _spec_from_file(qfile),
            "certificate": Path(cert_file).read_text(),
            "nodes": Path(nodes_file).read_text(),
        }
        resp = ctx.obj["client"].post("/korobov/verify", payload)
        for failure in resp["failures"]:
            click.echo(f"FAIL: {failure}")
        if not resp["ok"]:
            raise VerificationFailure("node certification failed")
        click.echo(
            f"verified: defect = {resp['max_cubature_defect']:.3e}  "
            f"lambda = [{resp['lambda_min']:.12f}, {resp['lambda_max']:.12f}]"
        )
        return
    resp = ctx.obj["client"].post("/korobov", {"spec": _spec_from_file(qfile)})
    outdir = ctx.obj["outdir"]
    stem = prefix or Path(qfile).stem
    (outdir / f"{stem}.cert").write_text(resp["certificate"])
    (outdir / f"{stem}.nodes.txt").write_text(resp["nodes"])
    click.echo(
        f"p = {resp['p']}  a = {resp['a']}  |Q| = {resp['q_size']}  "
        f"|Lambda| = {resp['lambda_size']}"
    )
    click.echo(
        f"max cubature defect = {resp['max_cubature_defect']:.3e}  "
        f"lambda = [{resp['lambda_min']:.12f}, {resp['lambda_max']:.12f}]"
    )
    if not resp["ok"]:
        raise VerificationFailure("lattice certification failed")
    click.echo(f"certified -> {outdir / (stem + '.cert')}")


@cli.command()
@click.argument("qfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--q", type=float, default=None)
@click.option("--m", type=int, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--attempts", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--level", type=int, default=None, help="Cross level n for the report.")
@click.option("--report", "report_name", default="mc_report.json")
@click.pass_context
def mc(ctx, qfile, q, m, eta, attempts, trials, seed, level, report_name):
    """Randomized Marcinkiewicz-type node search; writes a JSON report."""
    cfg = ctx.obj["config"]
    payload = {
        "spec": _spec_from_file(qfile),
        "q": _resolve(q, cfg, "q", 2.0),
        "m": _resolve(m, cfg, "m", None),
        "eta": _resolve(eta, cfg, "eta", 0.25),
        "attempts": _resolve(attempts, cfg, "attempts", 10),
        "trials": _resolve(trials, cfg, "trials", 50),
        "seed": _resolve(seed, cfg, "seed", 0),
        "level": level,
    }
    if payload["m"] is None:
        raise click.UsageError("--m is required (flag or config)")
    resp = ctx.obj["client"].post("/mc/search", payload)
    config = ExperimentConfig(command="mc", params=payload)
    _write_report(ctx.obj["outdir"] / report_name, resp["report"], config)
    click.echo(
        f"success = {resp['success']}  bounds = "
        f"[{resp['report']['lower']:.4f}, {resp['report']['upper']:.4f}]  "
        f"attempts = {resp['report']['attempts']}  -> {ctx.obj['outdir'] / report_name}"
    )
    if not resp["success"]:
        raise VerificationFailure("no admissible node set found")


@cli.command()
@click.argument("qfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--ms", required=True, help="Comma-separated node counts.")
@click.option("--seeds", type=int, default=20)
@click.option("--level", type=int, default=None)
@click.option("--name", default="ladder.csv")
@click.pass_context
def ladder(ctx, qfile, ms, seeds, level, name):
    """Median certified lambda_min over an m-sweep; writes a CSV."""
    payload = {
        "spec": _spec_from_file(qfile),
        "ms": [int(tok) for tok in ms.split(",")],
        "seeds": seeds,
        "level": level,
    }
    resp = ctx.obj["client"].post("/mc/ladder", payload)
    path = ctx.obj["outdir"] / name
    lines = ["n,m,median_lambda_min"]
    for row in resp["rows"]:
        lines.append(f"{'' if row['n'] is None else row['n']},{row['m']},{row['median_lambda_min']:.12g}")
    path.write_text("\n".join(lines) + "\n")
    click.echo(f"{len(resp['rows'])} rows -> {path}")


@cli.command()
@click.argument("qfile", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", type=click.Choice(["korobov", "full"]), default="korobov")
@click.option("--oversample", type=float, default=None)
@click.option("--name", default="weighted_nodes.txt")
@click.option("--report", "report_name", default="sparsify_report.json")
@click.pass_context
def sparsify(ctx, qfile, grid, oversample, name, report_name):
    """BSS-subsample an exact design for QFILE; writes the weighted nodes."""
    cfg = ctx.obj["config"]
    payload = {
        "spec": _spec_from_file(qfile),
        "grid": grid,
        "oversample": _resolve(oversample, cfg, "oversample", 4.0),
    }
    resp = ctx.obj["client"].post("/sparsify", payload)
    path = ctx.obj["outdir"] / name
    path.write_text(resp["weighted_nodes"])
    config = ExperimentConfig(command="sparsify", params=payload)
    _write_report(ctx.obj["outdir"] / report_name, resp["report"], config)
    click.echo(
        f"kept {resp['nonzeros']}/{resp['m']} nodes  kappa = {resp['kappa']:.6f} "
        f"(bound {resp['kappa_bound']:.6f})  -> {path}"
    )


@cli.command()
@click.option("--delta", type=float, default=None)
@click.option("--smoothness", type=int, default=None)
@click.option("--checks", default="partition,support,orthonormality,decay")
@click.option("--kmax", type=int, default=None)
@click.option("--gram-kmax", type=int, default=None)
@click.option("--decay-kappa", type=float, default=None)
@click.option("--decay-levels", default=None, help="Comma-separated levels n.")
@click.option("--seed", type=int, default=None)
@click.option("--report", "report_name", default="wavelet_report.json")
@click.pass_context
def wavelet(ctx, delta, smoothness, checks, kmax, gram_kmax, decay_kappa, decay_levels,
            seed, report_name):
    """Run wavelet-system checks and aggregate pass/fail into a report."""
    cfg = ctx.obj["config"]
    payload = {
        "delta": _resolve(delta, cfg, "delta", 1.0 / 6.0),
        "smoothness": _resolve(smoothness, cfg, "smoothness", 3),
        "checks": [tok.strip() for tok in checks.split(",") if tok.strip()],
        "kmax": _resolve(kmax, cfg, "kmax", 63),
        "gram_kmax": _resolve(gram_kmax, cfg, "gram_kmax", 15),
        "decay_kappa": _resolve(decay_kappa, cfg, "decay_kappa", 2.0),
        "seed": _resolve(seed, cfg, "seed", 0),
    }
    if decay_levels:
        payload["decay_levels"] = [int(tok) for tok in decay_levels.split(",")]
    resp = ctx.obj["client"].post("/wavelet", payload)
    config = ExperimentConfig(command="wavelet", params=payload)
    _write_report(
        ctx.obj["outdir"] / report_name,
        {"wavelet": resp["results"], "passed": resp["passed"]},
        config,
    )
    for check, result in resp["results"].items():
        click.echo(f"{check}: {'pass' if result['pass'] else 'FAIL'}")
    click.echo(f"-> {ctx.obj['outdir'] / report_name}")
    if not resp["passed"]:
        raise VerificationFailure("one or more wavelet checks failed")


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("trigdisc.service:app", host=host, port=port)


def run(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli(args=argv, standalone_mode=False, obj={})
        return 0
    except VerificationFailure as exc:
        click.echo(f"verification failed: {exc.message}", err=True)
        return VERIFY_ERROR
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.message}", err=True)
        return USAGE_ERROR
    except click.ClickException as exc:
        exc.show()
        return USAGE_ERROR
    except click.exceptions.Exit as exc:  # --help / --version
        return int(exc.exit_code)
    except click.exceptions.Abort:
        return USAGE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
