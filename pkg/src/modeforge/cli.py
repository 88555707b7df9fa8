"""Command-line front end.

The CLI is a thin client: it translates flags into the service request
models, runs the matching handler in-process (or against a remote service
with --server), and writes the returned report as JSON or CSV.  Two runs
with identical inputs produce byte-identical files.

Exit codes: 0 success, 1 reproduce-all tolerance failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx
from pydantic import ValidationError

from . import __version__
from .errors import ModeforgeError
from . import service


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _csv_lines(columns: list[str], rows: list[dict]) -> list[str]:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in columns))
    return lines


def render_report(report: dict, out_format: str) -> str:
    if out_format == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    command = report.get("command")
    if command == "metrology":
        cols = ["N", "family", "params", "F_numeric", "F_closed_form", "verdict"]
        return "\n".join(_csv_lines(cols, report["rows"])) + "\n"
    if command == "entangle":
        cols = ["measure", "value", "detail"]
        return "\n".join(_csv_lines(cols, report["rows"])) + "\n"
    if command == "reproduce-all":
        cols = ["table", "quantity", "closed_form", "numeric", "abs_error", "pass"]
        rows = []
        for name in sorted(report["tables"]):
            for row in report["tables"][name]["rows"]:
                rows.append({"table": name, **row})
        return "\n".join(_csv_lines(cols, rows)) + "\n"
    raise ModeforgeError(f"{command} reports have no CSV rendering; use --out json")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _call(command: str, payload: dict, server: str | None) -> dict:
    if server is None:
        return service.dispatch(command, payload)
    with httpx.Client(base_url=server, timeout=600.0) as client:
        response = client.post(f"/{command}", json=payload)
    if response.status_code == 422:
        detail = response.json().get("detail", "invalid request")
        raise ModeforgeError(f"server rejected the request: {detail}")
    response.raise_for_status()
    return response.json()


def _common_flags(parser: argparse.ArgumentParser, csv_ok: bool) -> None:
    formats = ["json", "csv"] if csv_ok else ["json"]
    parser.add_argument("--out", choices=formats, default="json",
                        help="output format")
    parser.add_argument("--output", default=None, metavar="PATH",
                        help="write the report to this file instead of stdout")
    parser.add_argument("--server", default=None, metavar="URL",
                        help="send the request to a running service instead of computing locally")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modeforge",
        description="Bosonic Fock-space protocols: phase estimation, mode teleportation, "
                    "entanglement diagnostics.")
    parser.add_argument("--version", action="version", version=f"modeforge {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("metrology", help="Fisher-information sweep for a state family")
    p.add_argument("--state", required=True,
                   help="state spec, e.g. noon:N=4 or coh:N=6,xi=0.5,phi=0")
    p.add_argument("--generator", choices=["nlr", "tlr"], default="nlr")
    p.add_argument("--sweep", default=None, help="e.g. N=1..20")
    _common_flags(p, csv_ok=True)

    p = sub.add_parser("entangle", help="mode-entanglement measures of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--bipartition", choices=["LR", "updown"], default="LR")
    p.add_argument("--measures", default="entropy,negativity,witness",
                   help="comma-separated subset of entropy,negativity,witness")
    _common_flags(p, csv_ok=True)

    p = sub.add_parser("teleport", help="teleportation fidelity for a resource state")
    p.add_argument("--resource", required=True)
    p.add_argument("--M", dest="m", type=int, required=True,
                   help="particle number of the teleported input")
    p.add_argument("--variant", choices=["complete", "restricted"], default="complete")
    p.add_argument("--simulate", choices=["exact", "mc"], default="exact")
    p.add_argument("--seed", type=int, default=None, help="required with --simulate mc")
    p.add_argument("--samples", type=int, default=100_000)
    _common_flags(p, csv_ok=False)

    p = sub.add_parser("paradox", help="post-selected entanglement swapping")
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--n", type=int, default=2)
    _common_flags(p, csv_ok=False)

    p = sub.add_parser("reproduce-all", help="re-derive every closed-form result")
    p.add_argument("--Nmax", dest="n_max", type=int, default=8)
    _common_flags(p, csv_ok=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _payload(args: argparse.Namespace) -> dict:
    if args.command == "metrology":
        return {"state": args.state, "generator": args.generator, "sweep": args.sweep}
    if args.command == "entangle":
        measures = [m for m in args.measures.split(",") if m]
        return {"state": args.state, "bipartition": args.bipartition, "measures": measures}
    if args.command == "teleport":
        payload = {"resource": args.resource, "M": args.m, "variant": args.variant,
                   "simulate": args.simulate, "samples": args.samples}
        if args.seed is not None:
            payload["seed"] = args.seed
        return payload
    if args.command == "paradox":
        return {"zeta": args.zeta, "xi": args.xi, "eta": args.eta,
                "theta": args.theta, "phi": args.phi, "omega": args.omega, "n": args.n}
    if args.command == "reproduce-all":
        return {"Nmax": args.n_max}
    raise ModeforgeError(f"unknown command {args.command!r}")


def _expand_config(path: str) -> list[str]:
    """Turn a flat JSON config {"command": ..., "<flag>": ...} into an argv."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ModeforgeError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModeforgeError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "command" not in data:
        raise ModeforgeError("config file must be a JSON object with a 'command' key")
    argv = [str(data.pop("command"))]
    for key in sorted(data):
        value = data[key]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        argv.extend([f"--{key}", str(value)])
    return argv


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "request"
        parts.append(f"invalid --{loc}: {err['msg']}")
    return "; ".join(parts)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["--config"]:
        if len(argv) != 2:
            print("--config expects exactly one file argument", file=sys.stderr)
            return 2
        try:
            argv = _expand_config(argv[1])
        except ModeforgeError as exc:
            print(str(exc), file=sys.stderr)
            return 2

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if args.command == "serve":
        import uvicorn

        uvicorn.run("modeforge.service:app", host=args.host, port=args.port)
        return 0

    try:
        report = _call(args.command, _payload(args), args.server)
        text = render_report(report, args.out)
    except ValidationError as exc:
        print(_validation_message(exc), file=sys.stderr)
        return 2
    except ModeforgeError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"service request failed: {exc}", file=sys.stderr)
        return 2

    _emit(text, args.output)
    if args.command == "reproduce-all" and not report.get("all_pass", False):
        print("reproduce-all: at least one row exceeded tolerance", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
