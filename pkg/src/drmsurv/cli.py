"""Command-line client for the estimation service.

By default every command dispatches to the service handlers in-process;
``--server URL`` sends the same request to a remote instance instead.  Each
command writes its result file plus a ``<out>.manifest.json`` sidecar with the
request hash, seed, package version and wall time, so runs can be reproduced
exactly.

Exit codes: 0 success, 1 input or configuration error, 2 the fit was written
but flagged as not converged.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import httpx
from fastapi import HTTPException
from pydantic import ValidationError

from . import __version__, service
from .errors import DrmsurvError
from .io import read_sample_csv
from .schemas import (
    BootstrapRequest,
    BootstrapResponse,
    EmOptionsPayload,
    FitRequest,
    FitResponse,
    SamplePayload,
    SimulateRequest,
    SimulateResponse,
    StudyConfigPayload,
)


class _CliError(Exception):
    """Carries a message destined for stderr and exit code 1."""


def _fail(message: str) -> "_CliError":
    return _CliError(message)


def _dispatch(server: str | None, path: str, request, response_model):
    body = request.model_dump(mode="json")
    if server:
        reply = httpx.post(server.rstrip("/") + path, json=body, timeout=None)
        if reply.status_code != 200:
            try:
                detail = reply.json().get("detail", reply.text)
            except ValueError:
                detail = reply.text
            raise _fail(f"{path} failed ({reply.status_code}): {detail}")
        return response_model.model_validate(reply.json())
    handler = {"/fit": service.fit_endpoint,
               "/simulate": service.simulate_endpoint,
               "/bootstrap": service.bootstrap_endpoint}[path]
    try:
        return handler(request)
    except HTTPException as exc:
        raise _fail(f"{path} failed ({exc.status_code}): {exc.detail}") from exc


def _write_manifest(out_path: Path, command: str, argv: list[str], request,
                    seed, wall_time: float) -> None:
    body = request.model_dump(mode="json")
    digest = hashlib.sha256(
        json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    manifest = {
        "command": command,
        "argv": argv,
        "config_sha256": digest,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(wall_time, 3),
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": [str(out_path)],
    }
    Path(str(out_path) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _load_sample(path: str | None, scheme: str) -> SamplePayload | None:
    if path is None:
        return None
    return SamplePayload.from_sample(read_sample_csv(path, scheme))


def _options_payload(args) -> EmOptionsPayload | None:
    fields = {}
    if getattr(args, "tol", None) is not None:
        fields["tol"] = args.tol
    if getattr(args, "max_iters", None) is not None:
        fields["max_iters"] = args.max_iters
    return EmOptionsPayload(**fields) if fields else None


def _cmd_fit(args, argv) -> int:
    started = time.perf_counter()
    lbrc_paths = args.lbrc or []
    estimator = args.estimator
    rc = _load_sample(args.rc, "IID" if estimator == "ecdf" else "RC")
    lbrc = _load_sample(lbrc_paths[0], "LBRC") if lbrc_paths else None
    extra = [_load_sample(p, "LBRC") for p in lbrc_paths[1:]]
    if len(lbrc_paths) > 1 and estimator != "drm-multi":
        raise _fail(f"estimator {estimator} accepts a single --lbrc file")
    request = FitRequest(estimator=estimator, rc=rc, lbrc=lbrc,
                         tilted=extra or None, basis=args.basis or ["log"],
                         options=_options_payload(args))
    response = _dispatch(args.server, "/fit", request, FitResponse)
    out = Path(args.out)
    out.write_text(json.dumps(response.model_dump(mode="json"), indent=2) + "\n",
                   encoding="utf-8")
    _write_manifest(out, "fit", argv, request, seed=None,
                    wall_time=time.perf_counter() - started)
    if not response.converged:
        print(f"warning: fit did not converge; results written to {out}",
              file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def _format_cell(mean: float | None, sd: float | None) -> str:
    if mean is None:
        return "NA"
    return f"{mean:.3f} ({'NA' if sd is None else format(sd, '.4f')})"


def _cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(f"cannot read config {args.config}: {exc}") from exc
    try:
        config = StudyConfigPayload.model_validate(raw)
    except ValidationError as exc:
        bad = sorted({".".join(str(p) for p in err["loc"]) for err in exc.errors()})
        raise _fail("invalid config keys: " + ", ".join(bad)) from exc
    request = SimulateRequest(config=config, workers=args.threads)
    response = _dispatch(args.server, "/simulate", request, SimulateResponse)

    lines = ["rc_cens_pct,lbrc_cens_pct,rc_n,lbrc_n,"
             + ",".join(response.estimators)]
    for row in response.rows:
        cells = [f"{row.rc_cens * 100:g}", f"{row.lbrc_cens * 100:g}",
                 str(row.n_rc), str(row.n_lbrc)]
        for name in response.estimators:
            est = row.estimates[name]
            cells.append(f"\"{_format_cell(est.mean_ks, est.sd_ks)}\"")
        lines.append(",".join(cells))
    out = Path(args.out)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(out, "simulate", argv, request, seed=config.seed,
                    wall_time=time.perf_counter() - started)
    print(f"wrote {out}")
    return 0


def _cmd_bootstrap(args, argv) -> int:
    started = time.perf_counter()
    if args.B < 2:
        raise _fail("B must be at least 2")
    rc = _load_sample(args.rc, "RC")
    lbrc = _load_sample(args.lbrc, "LBRC")
    if rc is None or lbrc is None:
        raise _fail("bootstrap requires both --rc and --lbrc")
    request = BootstrapRequest(rc=rc, lbrc=lbrc, basis=args.basis or ["log"],
                               B=args.B, level=args.level, seed=args.seed,
                               workers=args.threads,
                               options=_options_payload(args))
    response = _dispatch(args.server, "/bootstrap", request, BootstrapResponse)
    out = Path(args.out)
    out.write_text(json.dumps(response.model_dump(mode="json"), indent=2) + "\n",
                   encoding="utf-8")
    _write_manifest(out, "bootstrap", argv, request, seed=args.seed,
                    wall_time=time.perf_counter() - started)
    if response.zero_outside_ci:
        print(f"0 outside every tilt-component CI at level {response.level:g}")
    else:
        print(f"0 inside at least one tilt-component CI at level {response.level:g}")
    print(f"wrote {out}")
    return 0 if response.base_converged else 2


def _cmd_serve(args, argv) -> int:
    import uvicorn

    uvicorn.run(service.app, host=args.host, port=args.port)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drmsurv",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one estimator to CSV samples")
    fit.add_argument("--rc", help="CSV file for the right-censored (or IID) arm")
    fit.add_argument("--lbrc", action="append",
                     help="CSV file for a length-biased right-censored arm "
                          "(repeatable for drm-multi)")
    fit.add_argument("--estimator", required=True,
                     choices=["ecdf", "km", "km-ltrc", "npmle-lbrc",
                              "npmle-pooled", "drm", "drm-multi"])
    fit.add_argument("--basis", action="append",
                     choices=["log", "sqrt", "x", "x2"],
                     help="tilt basis component (repeatable; default log)")
    fit.add_argument("--tol", type=float, default=None)
    fit.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit)

    sim = sub.add_parser("simulate", help="run a Monte Carlo comparison study")
    sim.add_argument("--config", required=True, help="JSON study configuration")
    sim.add_argument("--out", required=True, help="CSV output path")
    sim.add_argument("--threads", type=int, default=None,
                     help="worker cap; results do not depend on it")
    sim.set_defaults(func=_cmd_simulate)

    boot = sub.add_parser("bootstrap", help="bootstrap confidence intervals")
    boot.add_argument("--rc", required=True)
    boot.add_argument("--lbrc", required=True)
    boot.add_argument("--basis", action="append",
                      choices=["log", "sqrt", "x", "x2"])
    boot.add_argument("-B", dest="B", type=int, default=150)
    boot.add_argument("--level", type=float, default=0.95)
    boot.add_argument("--seed", type=int, default=0)
    boot.add_argument("--threads", type=int, default=None)
    boot.add_argument("--tol", type=float, default=None)
    boot.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    boot.add_argument("--out", required=True)
    boot.set_defaults(func=_cmd_bootstrap)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DrmsurvError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
