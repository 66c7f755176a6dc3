"""Command-line client for the grasp stability service.

Every subcommand talks to the HTTP API: either a remote server given with
``--server`` or an in-process instance of the app (the default, no server
required). Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx
import yaml


class _CliError(SystemExit):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad arguments are configuration errors: exit 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code == 422:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        raise SystemExit(1)
    if resp.status_code != 200:
        print(f"error: HTTP {resp.status_code}: {resp.text}", file=sys.stderr)
        raise SystemExit(2)
    return resp.json()


def _load_yaml(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)
    if not isinstance(data, dict):
        print(f"error: {path} must contain a mapping", file=sys.stderr)
        raise SystemExit(1)
    return data


def _cmd_metric(args) -> int:
    grasp = _load_yaml(args.grasp)
    payload = {
        "contacts": grasp.get("contacts", []),
        "com": grasp.get("com", [0.0, 0.0, 0.0]),
        "mu": grasp.get("friction", {}).get("mu", args.mu),
        "edges": grasp.get("friction", {}).get("edges", args.edges),
        "tasks": grasp.get("tasks"),
    }
    with _client(args.server) as client:
        out = _post(client, "/metrics", payload)
    print(json.dumps(out, indent=2))
    return 0


def _cmd_episode(args) -> int:
    payload = {
        "reward": args.reward,
        "sensing": args.sensing,
        "policy": args.policy,
        "seed": args.seed,
        "case_index": args.case_index,
        "dataset_seed": args.dataset_seed,
        "include_trace": True,
    }
    with _client(args.server) as client:
        out = _post(client, "/episode", payload)
    trace = out.pop("trace") or []
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path = out_dir / "episode_trace.jsonl"
        with trace_path.open("w") as fh:
            header = {
                "type": "header",
                "case": out["case"],
                "policy": args.policy,
                "seed": args.seed,
                "reward": args.reward,
                "sensing": args.sensing,
            }
            fh.write(json.dumps(header) + "\n")
            for rec in trace:
                fh.write(json.dumps(rec) + "\n")
        print(f"trace written to {trace_path}")
    print(json.dumps(out, indent=2))
    return 0


def _cmd_dataset(args) -> int:
    with _client(args.server) as client:
        out = _post(client, "/dataset", {"seed": args.seed})
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "test_dataset.yaml"
        with path.open("w") as fh:
            yaml.safe_dump({"cases": out["cases"]}, fh, sort_keys=False)
        print(f"dataset written to {path}")
    else:
        print(json.dumps(out, indent=2))
    return 0


def _cmd_eval(args) -> int:
    payload = _load_yaml(args.config) if args.config else {}
    if args.seed is not None:
        payload["master_seed"] = args.seed
    if args.reward:
        payload["rewards"] = args.reward
    if args.sensing:
        payload["sensings"] = args.sensing
    if args.policy:
        payload["policy"] = args.policy
    if args.workers is not None:
        payload["workers"] = args.workers
    with _client(args.server) as client:
        out = _post(client, "/experiments", payload)

    from .harness import ResultRow, ResultsTable, export_results

    table = ResultsTable(rows=[ResultRow(**row) for row in out["rows"]])
    if args.out:
        paths = export_results(table, args.out)
        print("results written to " + ", ".join(str(p) for p in paths))
    for fw in table.frameworks():
        print(f"{fw}: hold={table.aggregate_hold(fw):.3f}")
    return 0


def _cmd_compare(args) -> int:
    from .harness import load_results

    try:
        table_a = load_results(args.a)
        table_b = load_results(args.b)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(1)
    rates_a = table_a.per_seed_hold(args.framework_a)
    rates_b = table_b.per_seed_hold(args.framework_b)
    seeds = sorted(set(rates_a) & set(rates_b))
    if len(seeds) < 2:
        print("error: need at least two shared model seeds", file=sys.stderr)
        raise SystemExit(1)
    payload = {"a": [rates_a[s] for s in seeds], "b": [rates_b[s] for s in seeds]}
    with _client(args.server) as client:
        out = _post(client, "/compare", payload)
    out["mean_a"] = sum(payload["a"]) / len(seeds)
    out["mean_b"] = sum(payload["b"]) / len(seeds)
    print(json.dumps(out, indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graspstab", description=__doc__)
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="evaluate the four stability metrics on a grasp file")
    p.add_argument("--grasp", required=True, help="YAML grasp description")
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--edges", type=int, default=8)
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("episode", help="run one episode and emit its trace")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reward", default="epsilon_and_delta")
    p.add_argument("--sensing", default="full")
    p.add_argument("--policy", default="zero", choices=["zero", "random", "greedy"])
    p.add_argument("--case-index", type=int, default=None,
                   help="pick a case from the test dataset instead of sampling")
    p.add_argument("--dataset-seed", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for the episode trace")
    p.set_defaults(func=_cmd_episode)

    p = sub.add_parser("dataset", help="emit the 240-case test dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("eval", help="run a batch experiment")
    p.add_argument("--config", default=None, help="YAML experiment configuration")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--reward", action="append", default=None)
    p.add_argument("--sensing", action="append", default=None)
    p.add_argument("--policy", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for results.csv / results.json")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("compare", help="paired one-sided t-test between two result files")
    p.add_argument("--a", required=True, help="results file (mean expected greater)")
    p.add_argument("--b", required=True)
    p.add_argument("--framework-a", default=None, help="restrict file A to one framework label")
    p.add_argument("--framework-b", default=None)
    p.set_defaults(func=_cmd_compare)

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
    except SystemExit:
        raise
    except httpx.HTTPError as exc:
        print(f"error: request failed: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
