"""Command-line front end; every operation goes through the HTTP service layer.

Without --server the service runs in-process, so the commands work
offline; with --server URL they hit a remote instance instead.
"""

import argparse
import json
import sys

from .service import ServiceClient, ServiceError
from .sim import ConfigParseError, parse_file

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def cmd_run(client: ServiceClient, args: argparse.Namespace) -> int:
    try:
        config = parse_file(args.config)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = client.run(config, seed=args.seed)
    except ServiceError as exc:
        if exc.config_key is not None:
            print(f"config error in {exc.config_key!r}: {exc.detail['message']}",
                  file=sys.stderr)
            return EXIT_CONFIG
        print(f"run failed: {exc.detail}", file=sys.stderr)
        return EXIT_ERROR
    text = result["machine_text"] if args.machine else result["human_text"]
    _write_output(text, args.out)
    return EXIT_OK


def cmd_vectors(client: ServiceClient, args: argparse.Namespace) -> int:
    vectors = client.vectors()
    text = json.dumps(vectors, sort_keys=True, indent=2) + "\n"
    _write_output(text, args.out)
    return EXIT_OK


def cmd_epoch(client: ServiceClient, args: argparse.Namespace) -> int:
    print(client.epoch(args.unix_time, args.T))
    return EXIT_OK


def cmd_thr(client: ServiceClient, args: argparse.Namespace) -> int:
    print(client.thr(args.network_delay, args.clock_asynchrony, args.T))
    return EXIT_OK


def cmd_report_diff(client: ServiceClient, args: argparse.Namespace) -> int:
    reports = []
    for path in (args.first, args.second):
        try:
            with open(path, "r", encoding="utf-8") as handle:
                reports.append(json.load(handle))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read report {path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    result = client.report_diff(reports[0], reports[1])
    if result["equal"]:
        print("reports are equivalent")
        return EXIT_OK
    for line in result["differences"]:
        print(line)
    return EXIT_ERROR


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlnsim",
        description="Economic spam protection on a simulated gossip network.",
    )
    parser.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="use a running service instead of the in-process one",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config", help="path to a JSON config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="write the report here instead of stdout")
    p_run.add_argument(
        "--machine", action="store_true", help="stable JSON report instead of text"
    )

    p_vectors = sub.add_parser("vectors", help="emit frozen derivation vectors")
    p_vectors.add_argument("--out", default=None, help="write vectors here instead of stdout")

    p_epoch = sub.add_parser("epoch", help="epoch index for a unix time")
    p_epoch.add_argument("unix_time", type=float)
    p_epoch.add_argument("T", type=int)

    p_thr = sub.add_parser("thr", help="maximum tolerated epoch gap")
    p_thr.add_argument("network_delay", type=float)
    p_thr.add_argument("clock_asynchrony", type=float)
    p_thr.add_argument("T", type=int)

    p_diff = sub.add_parser("report-diff", help="compare two machine reports")
    p_diff.add_argument("first")
    p_diff.add_argument("second")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    handlers = {
        "run": cmd_run,
        "vectors": cmd_vectors,
        "epoch": cmd_epoch,
        "thr": cmd_thr,
        "report-diff": cmd_report_diff,
    }
    try:
        with ServiceClient(base_url=args.server) as client:
            return handlers[args.command](client, args)
    except ServiceError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
