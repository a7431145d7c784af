"""Command-line interface: validation, enumeration, completion, scenarios,
and the live control-plane server."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from adaptstore.scenarios import (
    BUILTIN_NAMES,
    ScenarioScript,
    UnknownScenarioError,
    builtin_scenario,
    run_scenario,
)
from adaptstore.variability import (
    Configuration,
    UnknownLevelError,
    UnsatisfiableRequestError,
    canonical_level,
    complete_request,
    enumerate_valid,
    validate,
)
from adaptstore.world import InvalidConfigurationError


def _load_config(spec: str) -> Configuration:
    """A canonical level name (L0, L2_full, ...) or a JSON file path."""
    try:
        return canonical_level(spec)
    except UnknownLevelError:
        pass
    path = Path(spec)
    if not path.is_file():
        raise SystemExit(f"error: {spec!r} is neither a level name nor a config file")
    return Configuration.from_json(json.loads(path.read_text()))


def _cmd_validate(args) -> int:
    config = Configuration.from_json(json.loads(Path(args.config).read_text()))
    result = validate(config)
    if result.valid:
        print("valid")
        return 0
    for violation in result.violations:
        print(f"{violation.constraint}: {violation.message}")
    return 1


def _cmd_enumerate(args) -> int:
    for config in sorted(enumerate_valid()):
        print(json.dumps(config.to_json(), sort_keys=True))
    return 0


def _cmd_complete(args) -> int:
    request = json.loads(Path(args.request).read_text())
    current = Configuration.from_json(json.loads(Path(args.current).read_text()))
    try:
        target = complete_request(request, current)
    except UnsatisfiableRequestError as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(target.to_json(), sort_keys=True))
    return 0


def _cmd_scenario_list(args) -> int:
    for name in BUILTIN_NAMES:
        print(name)
    return 0


def _cmd_scenario_run(args) -> int:
    try:
        script = builtin_scenario(args.name)
    except UnknownScenarioError:
        path = Path(args.name)
        if not path.is_file():
            print(f"error: unknown scenario {args.name!r}", file=sys.stderr)
            return 2
        try:
            script = ScenarioScript.from_json(json.loads(path.read_text()))
        except (ValueError, KeyError) as exc:
            print(f"error: bad scenario file {args.name}: {exc}", file=sys.stderr)
            return 2
    report = run_scenario(script, seed=args.seed)
    for result in report.assertions:
        status = "PASS" if result.passed else "FAIL"
        if not result.evaluated:
            status += " (not evaluated)"
        print(f"[{status}] {result.predicate} {json.dumps(result.params, sort_keys=True)}")
    print(
        f"{report.name}: {'PASS' if report.passed else 'FAIL'} "
        f"(seed={report.seed}, events={report.counts['events']}, hash={report.log_hash[:16]})"
    )
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_json(), indent=2))
        print(f"report written to {args.report}")
    return 0 if report.passed else 1


def _cmd_serve(args) -> int:
    from adaptstore.controlplane.server import ControlPlaneServer

    scenario = None
    if args.scenario:
        try:
            scenario = builtin_scenario(args.scenario)
        except UnknownScenarioError:
            path = Path(args.scenario)
            if not path.is_file():
                print(f"error: unknown scenario {args.scenario!r}", file=sys.stderr)
                return 2
            scenario = ScenarioScript.from_json(json.loads(path.read_text()))
    try:
        config = _load_config(args.config)
        server = ControlPlaneServer(
            config,
            seed=args.seed,
            host=args.host,
            port=args.port,
            console_dir=Path(args.console_dir) if args.console_dir else None,
            scenario=scenario,
        )
    except InvalidConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    host, port = server.address
    staged = f", scenario={scenario.name}" if scenario else ""
    print(f"control plane on http://{host}:{port} (config={args.config}, seed={args.seed}{staged})")
    print("simulation starts paused; POST /api/sim/pace to run it")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptstore",
        description="Deterministic self-adaptive store simulation testbed",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a configuration JSON file")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("enumerate", help="print every valid configuration")
    p.set_defaults(fn=_cmd_enumerate)

    p = sub.add_parser("complete", help="complete a partial reconfiguration request")
    p.add_argument("request", help="JSON file with the partial assignment")
    p.add_argument("current", help="JSON file with the current configuration")
    p.set_defaults(fn=_cmd_complete)

    scenario = sub.add_parser("scenario", help="scenario harness")
    scenario_sub = scenario.add_subparsers(dest="scenario_command", required=True)
    p = scenario_sub.add_parser("list", help="list builtin scenarios")
    p.set_defaults(fn=_cmd_scenario_list)
    p = scenario_sub.add_parser("run", help="run a builtin scenario or a script file")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(fn=_cmd_scenario_run)

    p = sub.add_parser("serve", help="start the live control plane")
    p.add_argument("--config", default="L0", help="level name or config JSON path")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--console-dir", default=None, help="static console build to serve at /")
    p.add_argument(
        "--scenario",
        default=None,
        help="stage a builtin scenario (or script file) on the live clock",
    )
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
