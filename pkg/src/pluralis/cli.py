"""Command-line entry points: build coverage sets, select policies, run
steering sessions, and serve the HTTP API.

Exit codes: 0 success, 1 config/parse/IO error, 2 enumeration or grid guard,
3 utility domain error, 4 coverage/environment fingerprint mismatch.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .coverage import convex_coverage_set, pareto_set_bruteforce, save_coverage, load_coverage
from .envs import load_momdp_file
from .errors import ConfigError, DomainError, FingerprintMismatchError, GuardError
from .steering import records_to_csv, steering_session
from .welfare import select_policy, utility_from_json

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GUARD = 2
EXIT_DOMAIN = 3
EXIT_FINGERPRINT = 4


def _load_json_file(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {what}: {exc}", path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {what}: {exc}", path) from exc


def cmd_build(env_path: str, resolution: int, kind: str, out_path: str) -> int:
    start = time.perf_counter()
    momdp = load_momdp_file(env_path)
    if kind == "ccs":
        cs = convex_coverage_set(momdp, resolution)
    else:
        cs = pareto_set_bruteforce(momdp)
    try:
        save_coverage(cs, out_path)
    except OSError as exc:
        raise ConfigError(f"cannot write coverage file: {exc}", out_path) from exc
    print(f"entries: {len(cs)}")
    print(f"wall_time_s: {time.perf_counter() - start:.3f}")
    return EXIT_OK


def cmd_select(cs_path: str, utility_path: str) -> int:
    cs = load_coverage(cs_path)
    spec = utility_from_json(_load_json_file(utility_path, "utility spec"))
    result = select_policy(cs, spec)
    print(
        json.dumps(
            {
                "policy_id": result.policy_id,
                "utility": result.utility,
                "ranking": [[pid, utility] for pid, utility in result.ranking],
            },
            indent=2,
        )
    )
    return EXIT_OK


def cmd_steer(
    cs_path: str,
    env_path: str,
    true_weights: str,
    steps: int,
    seed: int,
    log_path: str,
) -> int:
    momdp = load_momdp_file(env_path)
    cs = load_coverage(cs_path)
    try:
        weights = [float(part) for part in true_weights.split(",")]
    except ValueError as exc:
        raise ConfigError(
            f"--true-weights must be comma-separated floats, got {true_weights!r}",
            "--true-weights",
        ) from exc
    log = steering_session(momdp, cs, weights, steps=steps, seed=seed)
    log_file = Path(log_path)
    try:
        log_file.write_text(log.to_jsonl())
        log_file.with_suffix(".csv").write_text(log.to_csv())
    except OSError as exc:
        raise ConfigError(f"cannot write log: {exc}", log_path) from exc
    print(f"switches: {log.switches}")
    return EXIT_OK


def cmd_serve(port: int, cs_path: str, env_path: str, ui_dir: str | None) -> int:
    from .service import serve

    serve(port, cs_path, env_path, ui_dir=ui_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pluralis",
        description="Multi-objective coverage sets, welfare-based policy selection, and steering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="compute a coverage set from an environment config")
    p_build.add_argument("--env", required=True, help="environment JSON path")
    p_build.add_argument("--resolution", type=int, default=10, help="simplex grid subdivisions")
    p_build.add_argument("--kind", choices=("ccs", "pareto"), default="ccs")
    p_build.add_argument("--out", required=True, help="output coverage JSON path")

    p_select = sub.add_parser("select", help="pick the best policy under a utility spec")
    p_select.add_argument("--coverage", required=True, help="coverage JSON path")
    p_select.add_argument("--utility", required=True, help="utility spec JSON path")

    p_steer = sub.add_parser("steer", help="run a simulated steering session")
    p_steer.add_argument("--coverage", required=True)
    p_steer.add_argument("--env", required=True)
    p_steer.add_argument("--true-weights", required=True, help="e.g. 0.8,0.2")
    p_steer.add_argument("--steps", type=int, default=100)
    p_steer.add_argument("--seed", type=int, default=0)
    p_steer.add_argument("--log", required=True, help="JSON-lines log path (CSV written alongside)")

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--coverage", required=True)
    p_serve.add_argument("--env", required=True)
    p_serve.add_argument("--ui-dir", default=None, help="static frontend build to mount at /")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "build":
            return cmd_build(args.env, args.resolution, args.kind, args.out)
        if args.command == "select":
            return cmd_select(args.coverage, args.utility)
        if args.command == "steer":
            return cmd_steer(
                args.coverage, args.env, args.true_weights, args.steps, args.seed, args.log
            )
        if args.command == "serve":
            port = int(os.environ.get("PLURALIS_PORT", args.port))
            return cmd_serve(port, args.coverage, args.env, args.ui_dir)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FingerprintMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINGERPRINT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())
