"""Operator entry points: serve, replay, report, and synthetic sessions."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import EngineError
from .layout import LayoutParams, DEFAULT_PARAMS
from .metrics import compute_report
from .organizer import MockProvider, OpenAiChatProvider
from .service import ServiceConfig, run_service
from .sessionlog import read_session, replay, scene_to_dict
from .synth import SynthSpec, generate_session
from .topics import PRESET_NAMES, load_topic


def _params_from(args) -> LayoutParams:
    if args.params:
        return LayoutParams.from_file(args.params)
    return DEFAULT_PARAMS


def cmd_serve(args) -> int:
    host, _, port = args.listen.rpartition(":")
    provider_factory = None
    if args.provider == "live":
        endpoint = args.live_endpoint
        if not endpoint:
            raise EngineError("--live-endpoint is required with --provider live")
        provider_factory = lambda: OpenAiChatProvider(  # noqa: E731
            endpoint=endpoint, model=args.live_model, api_key=args.live_api_key
        )
    elif args.mock_table:
        table = {
            k: (v[0], v[1] if len(v) > 1 else None)
            for k, v in json.loads(Path(args.mock_table).read_text("utf-8")).items()
        }
        provider_factory = lambda: MockProvider(table)  # noqa: E731
    config = ServiceConfig(
        topic=args.topic,
        provider_factory=provider_factory,
        params=_params_from(args),
        transition_mode=args.transition,
        log_dir=args.log_dir,
        static_dir=args.static,
    )
    run_service(config, host or "127.0.0.1", int(port))
    return 0


def cmd_replay(args) -> int:
    state = replay(args.log)
    trees = state.tree_count
    overflow = sum(len(i.overflow_trees) for i in state.islands)
    print(f"events={state.last_seq} islands={len(state.islands)} "
          f"trees={trees} overflow={overflow} mode={state.mode.kind}")
    for island in state.islands:
        print(f"  [{island.category.display}] trees={len(island.trees)}")
    out = Path(args.out) if args.out else Path(str(args.log) + ".snapshot.json")
    out.write_text(json.dumps(scene_to_dict(state), sort_keys=True, indent=2) + "\n",
                   encoding="utf-8")
    print(f"snapshot written to {out}")
    return 0


def cmd_report(args) -> int:
    _, events = read_session(args.log)
    originality = None
    if args.originality:
        originality = {
            k: float(v)
            for k, v in json.loads(Path(args.originality).read_text("utf-8")).items()
        }
    report = compute_report(events, duration_s=args.duration, originality=originality)
    sys.stdout.write(report.to_text())
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        ideas=args.ideas,
        in_island=args.in_island,
        matched=args.matched,
        duration_s=args.duration,
        overview_s=args.overview_seconds,
        categories=args.categories,
        seed=args.seed,
    )
    path = generate_session(spec, args.out, topic_name=args.topic,
                            params=_params_from(args))
    print(f"synthetic session written to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ideascape",
        description="Idea landscape engine: serve live sessions, replay logs, "
                    "compute metrics, and build synthetic fixtures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the websocket service")
    serve.add_argument("--listen", default="127.0.0.1:8765", metavar="HOST:PORT")
    serve.add_argument("--topic", default="study2-sustainability",
                       help=f"preset ({', '.join(PRESET_NAMES)}) or a config file path")
    serve.add_argument("--provider", choices=("mock", "live"), default="mock")
    serve.add_argument("--mock-table", default=None,
                       help="JSON file: keyword -> [category, summary]")
    serve.add_argument("--live-endpoint", default=None)
    serve.add_argument("--live-model", default="gpt-4o")
    serve.add_argument("--live-api-key", default="")
    serve.add_argument("--transition", choices=("walk", "dive"), default="dive")
    serve.add_argument("--log-dir", default=None)
    serve.add_argument("--params", default=None, help="layout params file")
    serve.add_argument("--static", default=None, help="directory of UI files to serve")
    serve.set_defaults(func=cmd_serve)

    rep = sub.add_parser("replay", help="fold a session log and write a snapshot")
    rep.add_argument("--log", required=True)
    rep.add_argument("--out", default=None, help="snapshot path (default <log>.snapshot.json)")
    rep.set_defaults(func=cmd_replay)

    report = sub.add_parser("report", help="compute metrics over a session log")
    report.add_argument("--log", required=True)
    report.add_argument("--out", default=None, help="write the JSON report here")
    report.add_argument("--duration", type=float, default=None,
                        help="session duration in seconds (default: last event time)")
    report.add_argument("--originality", default=None,
                        help="JSON file: utterance id -> external score")
    report.set_defaults(func=cmd_report)

    synth = sub.add_parser("synth", help="generate a synthetic session log")
    synth.add_argument("--out", required=True)
    synth.add_argument("--ideas", type=int, required=True)
    synth.add_argument("--in-island", type=int, default=0, dest="in_island")
    synth.add_argument("--matched", type=int, default=0)
    synth.add_argument("--duration", type=float, default=600.0)
    synth.add_argument("--overview-seconds", type=float, default=None)
    synth.add_argument("--categories", type=int, default=5)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--topic", default="study2-sustainability")
    synth.add_argument("--params", default=None)
    synth.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
