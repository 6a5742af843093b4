"""Command-line entry point: ``msgtailor {serve,nightly,simulate,seed-catalog,report}``.

Every path/seed flag can also come from an environment variable named
``MSGTAILOR_<FLAG>`` (e.g. ``MSGTAILOR_LOG``); an explicit flag wins.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import signal
import sys
from collections import Counter, defaultdict
from datetime import date
from importlib import resources
from pathlib import Path

from .catalog import Catalog, CatalogError, generate_catalog
from .config import ConfigError, EngineConfig, load_config
from .domain import DomainError
from .eventlog import EventLog
from .pipeline import NightlyPlan, PlanExists, commit_plan, run_nightly

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DOMAIN = 4

ENV_PREFIX = "MSGTAILOR_"

log = logging.getLogger("msgtailor")


def _env(name: str, default: str | None = None) -> str | None:
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _date(value: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a YYYY-MM-DD date: {value!r}") from None


def _listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {value!r}")
    return host, int(port)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=_env("config"), help="INI config file ([timing], [plan], ...)")
    common.add_argument("--seed", type=int, default=_env("seed"), help="master seed (overrides plan.master_seed)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="msgtailor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", parents=[common], help="run the HTTP ingestion service")
    serve.add_argument("--log", default=_env("log", "events.jsonl"))
    serve.add_argument("--catalog", default=_env("catalog", "catalog.jsonl"))
    serve.add_argument("--plans", default=_env("plans", "plans"))
    serve.add_argument("--listen", type=_listen, default=_env("listen", "127.0.0.1:8080"))

    nightly = sub.add_parser("nightly", parents=[common], help="plan one day's messages")
    nightly.add_argument("--log", default=_env("log", "events.jsonl"))
    nightly.add_argument("--catalog", default=_env("catalog", "catalog.jsonl"))
    nightly.add_argument("--plans", default=_env("plans", "plans"))
    nightly.add_argument("--date", type=_date, required=_env("date") is None, default=_env("date"))
    nightly.add_argument("--out", default=_env("out"), help="plan file (default: PLANS/plan-DATE.jsonl)")
    nightly.add_argument("--force", action="store_true", help="recompute an already planned date")

    simulate = sub.add_parser("simulate", parents=[common], help="run a synthetic cohort")
    simulate.add_argument("--scenario", default=_env("scenario", "demo"), help="scenario JSON, or 'demo'")
    simulate.add_argument("--out", default=_env("out", "simulation.csv"))
    simulate.add_argument("--days", type=int, default=None)

    seed_catalog = sub.add_parser("seed-catalog", parents=[common], help="write a synthetic message catalog")
    seed_catalog.add_argument("--out", default=_env("catalog", "catalog.jsonl"))
    seed_catalog.add_argument("--pool-size", type=int, default=None)

    report = sub.add_parser("report", parents=[common], help="summarise a plan (.jsonl) or simulation (.csv)")
    report.add_argument("path")
    return parser


def _config(args) -> EngineConfig:
    seed = int(args.seed) if args.seed is not None else None
    return load_config(args.config, master_seed=seed)


def _catalog(path: str) -> Catalog:
    catalog = Catalog.load(path)
    catalog.require_complete()
    return catalog


def cmd_serve(args) -> int:
    import uvicorn

    from .service import PlanStore, create_app

    _config(args)
    catalog = _catalog(args.catalog)
    event_log = EventLog(args.log)
    app = create_app(event_log, catalog, PlanStore(args.plans))
    host, port = args.listen
    log.info("serving on %s:%d (log=%s, %d events)", host, port, args.log, len(event_log))
    config = uvicorn.Config(app, host=host, port=port, log_level="warning" if args.verbose == 0 else "info")
    server = uvicorn.Server(config)
    # uvicorn re-raises the captured signal after a graceful shutdown; swallow
    # it so SIGTERM/SIGINT end the process with our own exit code
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: None)
    server.run()
    if not server.started:
        print(f"error: could not bind {host}:{port}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_nightly(args) -> int:
    from .service import PlanStore

    config = _config(args)
    catalog = _catalog(args.catalog)
    event_log = EventLog(args.log)
    store = PlanStore(args.plans)
    out = Path(args.out) if args.out else store.path_for(args.date)
    if out.exists() and not args.force:
        raise PlanExists(f"{out} exists; rerun with --force to recompute")
    plan = run_nightly(event_log.records(), args.date, catalog, config, force=args.force)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(plan.to_jsonl(), encoding="utf-8")
    appended = commit_plan(plan, event_log)
    for entry in plan.entries:
        print(f"{entry.user_id}\t{entry.topic.slug}\t{entry.message_id}\t{entry.send_at:%H:%M}\tslot {entry.slot_index}")
    print(f"planned {len(plan.entries)} messages for {len(plan.details)} users -> {out} "
          f"({len(appended)} deliveries logged)")
    return EXIT_OK


def _load_scenario(name: str):
    from .sim import load_scenario

    if name == "demo":
        with resources.as_file(resources.files("msgtailor") / "scenarios" / "demo.json") as path:
            return load_scenario(path)
    return load_scenario(name)


def cmd_simulate(args) -> int:
    from .sim import report_to_csv, simulate

    _config(args)
    scenario = _load_scenario(args.scenario)
    report = simulate(scenario, days=args.days, seed=args.seed)
    report_to_csv(report, args.out)
    _print_sim_summary(report.daily)
    converged = [d for d in report.convergence_day.values() if d is not None]
    print(f"personas converged: {len(converged)}/{len(report.convergence_day)}; seed {report.seed} -> {args.out}")
    return EXIT_OK


def _print_sim_summary(daily: list[dict[str, float]]) -> None:
    if not daily:
        print("empty report")
        return
    head, tail = daily[:10], daily[-10:]
    print(f"{'metric':<26}{'first 10 days':>14}{'last 10 days':>14}")
    for metric in daily[0]:
        first = sum(r[metric] for r in head) / len(head)
        last = sum(r[metric] for r in tail) / len(tail)
        print(f"{metric:<26}{first:>14.3f}{last:>14.3f}")


def cmd_seed_catalog(args) -> int:
    config = _config(args)
    pool_size = args.pool_size or config.pool_size
    catalog = generate_catalog(pool_size, seed=config.master_seed)
    catalog.dump(args.out)
    print(f"wrote {len(catalog)} messages ({pool_size} per topic) to {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.path)
    if path.suffix == ".csv":
        daily: dict[str, dict[str, float]] = defaultdict(dict)
        with path.open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                daily[row["day"]][row["metric"]] = float(row["value"])
        _print_sim_summary([daily[k] for k in sorted(daily, key=int)])
        return EXIT_OK
    text = path.read_text(encoding="utf-8")
    plan = NightlyPlan.from_jsonl(text, date.min)
    topics = Counter(e.topic.slug for e in plan.entries)
    slots = Counter(e.slot_index for e in plan.entries)
    users = {e.user_id for e in plan.entries}
    print(f"{len(plan.entries)} messages for {len(users)} users")
    for name, count in sorted(topics.items()):
        print(f"  topic {name:<22}{count:>6}")
    for slot, count in sorted(slots.items()):
        print(f"  slot {slot:<23}{count:>6}")
    return EXIT_OK


COMMANDS = {
    "serve": cmd_serve,
    "nightly": cmd_nightly,
    "simulate": cmd_simulate,
    "seed-catalog": cmd_seed_catalog,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    from .sim import ScenarioError

    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CatalogError, ScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
