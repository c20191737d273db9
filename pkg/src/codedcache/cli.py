"""Command-line client for the service endpoints.

By default requests run against the in-process app, so no server needs to
be up; --server points the same commands at a remote instance.  Exit codes:
0 success, 1 verification failure, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_json(path: str, what: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(2, f"cannot read {what} file {path}: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(
            2,
            f"malformed JSON in {what} file {path}: "
            f"line {e.lineno} column {e.colno}: {e.msg}",
        )


def _post(server: str | None, path: str, payload: dict) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.post(path, json=payload)
    else:
        from .service import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://codedcache", timeout=None
            ) as client:
                return await client.post(path, json=payload)

        response = asyncio.run(go())
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise CliError(2, f"request rejected ({response.status_code}): {detail}")
    return response.json()


def _cmd_verify(args) -> int:
    config = _load_json(args.config, "config")
    payload = {
        "config": config,
        "seed": args.seed,
        "trials": args.trials,
        "enumerate": args.enumerate,
        "bound": args.bound,
        "corrupt_generator": args.corrupt_generator,
    }
    report = _post(args.server, "/verify", payload)
    print(json.dumps(report, indent=2))
    return 0 if report["passed"] else 1


def _cmd_sweep(args) -> int:
    spec = _load_json(args.config, "sweep spec")
    if not isinstance(spec, dict):
        raise CliError(2, f"sweep spec file {args.config} must hold a JSON object")
    if args.seed is not None:
        spec["seed"] = args.seed
    if args.trials is not None:
        spec["trials"] = args.trials
    if args.mode is not None:
        spec["mode"] = args.mode
    if args.method is not None:
        spec["method"] = args.method
    if args.enumerate:
        spec["enumerate"] = True
    if args.bound is not None:
        spec["bound"] = args.bound
    result = _post(args.server, "/sweep", spec)
    try:
        Path(args.out).write_text(result["csv"])
    except OSError as e:
        raise CliError(2, f"cannot write {args.out}: {e}")
    print(f"wrote {result['rows']} rows to {args.out}")
    return 0


def _cmd_replay(args) -> int:
    topology = _load_json(args.topology, "topology")
    config = _load_json(args.config, "config")
    report = _post(args.server, "/replay", {"topology": topology, "config": config})
    print(json.dumps(report, indent=2))
    return 0


def _cmd_extremes(args) -> int:
    config = _load_json(args.config, "config")
    report = _post(args.server, "/extremes", {"config": config, "mode": args.mode})
    print(json.dumps(report, indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codedcache",
        description="Coded-cache delivery simulator and analysis tool.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server(p):
        p.add_argument(
            "--server",
            default=None,
            help="base URL of a running service (default: run in-process)",
        )

    p = sub.add_parser("verify", help="end-to-end placement/delivery/decode check")
    p.add_argument("--config", required=True, help="system config JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--enumerate", action="store_true",
                   help="check every topology instead of sampling")
    p.add_argument("--bound", type=int, default=10_000_000)
    p.add_argument("--corrupt-generator", action="store_true",
                   dest="corrupt_generator",
                   help="fault injection: tamper with the decode-side code matrix")
    add_server(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="run a parameter sweep and write a CSV")
    p.add_argument("--config", required=True, help="sweep spec JSON file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--mode", choices=["successive", "parallel", "both"], default=None)
    p.add_argument("--method", choices=["formula", "simulate", "both"], default=None)
    p.add_argument("--enumerate", action="store_true",
                   help="enumerate all topologies per cell instead of sampling")
    p.add_argument("--bound", type=int, default=None)
    add_server(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("replay", help="latency report for one fixed topology")
    p.add_argument("--topology", required=True, help='JSON file {"Z": [[...], ...]}')
    p.add_argument("--config", required=True, help="system config JSON file")
    add_server(p)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("extremes", help="best and worst case topologies")
    p.add_argument("--config", required=True, help="system config JSON file")
    p.add_argument("--mode", choices=["successive", "parallel", "both"], default="both")
    add_server(p)
    p.set_defaults(func=_cmd_extremes)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except httpx.HTTPError as e:
        print(f"error: cannot reach server: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
