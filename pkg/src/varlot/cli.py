"""Command-line client for the scenario service.

``varlot run`` posts the scenario to the service API: in-process by default
(no server needed), or over HTTP with ``--server``.  Exit codes: 0 all tasks
succeeded, 1 a task failed or the golden check mismatched, 2 parse or usage
errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

from .service import app, bundled_golden_report, bundled_scenario_names, bundled_scenario_text


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    from fastapi.testclient import TestClient

    return TestClient(app)


def _load_scenario(target: str) -> tuple[str, str]:
    path = Path(target)
    if path.is_file():
        return path.stem, path.read_text(encoding="utf-8")
    try:
        return target, bundled_scenario_text(target)
    except FileNotFoundError:
        raise SystemExit(f"error: {target} is neither a file nor a bundled scenario (exit 2)")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        name, text = _load_scenario(args.scenario)
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return 2
    payload = {
        "scenario": text,
        "name": name,
        "epsilon": args.epsilon,
        "include_csv": args.out is not None,
    }
    with _client(args.server) as client:
        response = client.post("/run", json=payload)
    if response.status_code != 200:
        print(f"service error: {response.status_code} {response.text}", file=sys.stderr)
        return 2
    body = response.json()
    report = body["report"]
    sys.stdout.write(report)
    print(f"elapsed: {body['elapsed_ms']:.1f} ms", file=sys.stderr)
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.txt").write_text(report, encoding="utf-8")
        for fname, content in sorted(body["csv"].items()):
            (out_dir / fname).write_text(content, encoding="utf-8")
        print(f"wrote report and {len(body['csv'])} csv files to {out_dir}", file=sys.stderr)
    code = int(body["exit_code"])
    if args.golden_check and code == 0:
        golden = bundled_golden_report(name)
        if golden is None:
            print(f"golden check: no golden report for {name}", file=sys.stderr)
            return 1
        if golden != report:
            print("golden check: MISMATCH", file=sys.stderr)
            _print_diff(golden, report)
            return 1
        print("golden check: byte-identical", file=sys.stderr)
    return code


def _print_diff(expected: str, actual: str) -> None:
    import difflib

    for line in difflib.unified_diff(
        expected.splitlines(), actual.splitlines(), "golden", "actual", lineterm="", n=1
    ):
        print(line, file=sys.stderr)


def cmd_scenarios(args: argparse.Namespace) -> int:
    if args.server:
        with _client(args.server) as client:
            for item in client.get("/scenarios").json():
                print(f"{item['name']}: {item['first_line']}")
        return 0
    for name in bundled_scenario_names():
        text = bundled_scenario_text(name)
        first = next((ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")), "")
        print(f"{name}: {first}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="varlot",
        description="Run variable-lottery scenarios: truth values, axiom checks, "
        "expected-utility representations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file or bundled scenario")
    run_p.add_argument("scenario", help="path to a .scn file or a bundled scenario name")
    run_p.add_argument("--out", help="directory for report.txt and CSV plot data")
    run_p.add_argument("--epsilon", help="calibration resolution, written p/q")
    run_p.add_argument(
        "--golden-check",
        action="store_true",
        help="compare the report byte-for-byte against the bundled golden report",
    )
    run_p.add_argument("--server", help="use a running service instead of in-process")
    run_p.set_defaults(func=cmd_run)

    ls_p = sub.add_parser("scenarios", help="list bundled scenarios")
    ls_p.add_argument("--server", help="query a running service")
    ls_p.set_defaults(func=cmd_scenarios)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(func=cmd_serve)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
