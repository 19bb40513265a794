"""Command-line entry points: simulate, train, eval, serve, replay."""

from __future__ import annotations

import argparse
import sys

from .config import EngineConfig, load_config, with_seed
from .engine import Engine
from .errors import ConfigError, DivergenceError, LogFormatError, ModelMismatchError
from .sessionio import (
    ModelFile,
    SessionLogWriter,
    evaluate,
    read_log,
    train_offline,
    write_eval_report,
)


def _base_config(args) -> EngineConfig:
    config = load_config(args.config) if args.config else EngineConfig()
    if getattr(args, "seed", None) is not None:
        config = with_seed(config, args.seed)
    return config


def cmd_simulate(args) -> int:
    config = _base_config(args)
    if args.steps is not None:
        n_ticks = args.steps
    else:
        n_ticks = round(args.duration * config.tick_rate_hz)
    writer = SessionLogWriter(args.out, config)
    engine = Engine(config, learning=args.learning, log_writer=writer)
    try:
        summary = engine.run(n_ticks, pace=args.pace)
    finally:
        writer.close()
    if args.model_out:
        ModelFile.from_horde(engine.horde, engine.fingerprint).save(args.model_out)
    print(
        f"simulated {summary.ticks} ticks -> {args.out} "
        f"(core mean {summary.mean_core_ms:.3f} ms, overruns {summary.overruns})"
    )
    return 0


def cmd_train(args) -> int:
    result = train_offline(args.log, args.passes, out_model=args.out)
    curve = result.rmse_per_pass.get("switch_event", [])
    shown = ", ".join("n/a" if v is None else f"{v:.4f}" for v in curve)
    print(f"trained {args.passes} passes -> {args.out} (switch_event RMSE per pass: {shown})")
    return 0


def cmd_eval(args) -> int:
    report = evaluate(
        args.model,
        args.log,
        online_learning=args.online,
        allow_mismatch=args.allow_mismatch,
    )
    log = read_log(args.log)
    if args.report:
        write_eval_report(report, args.report, log.header.tick_rate_hz)
    print(report.to_text(log.header.tick_rate_hz), end="")
    return 0


def cmd_serve(args) -> int:
    from .service import CockpitServer

    config = _base_config(args)
    if config.mode != args.mode:
        config = EngineConfig(**{**_as_kwargs(config), "mode": args.mode})
    writer = SessionLogWriter(args.out, config) if args.out else None
    engine = Engine(config, learning=args.learning, log_writer=writer)
    if args.model:
        model = ModelFile.load(args.model)
        if model.fingerprint != engine.fingerprint and not args.allow_mismatch:
            raise ModelMismatchError(
                f"model fingerprint {model.fingerprint} does not match engine "
                f"fingerprint {engine.fingerprint}"
            )
        engine.horde.set_weights(model.weights_by_id())
        engine.learning = False   # frozen until toggled back on
    server = CockpitServer(engine, host=args.host, port=args.port,
                           max_ticks=args.max_ticks)
    server.start()
    print(f"serving {args.mode} session on ws://{args.host}:{server.bound_port}")
    try:
        server.wait()
    except KeyboardInterrupt:
        server.stop()
    finally:
        if writer is not None:
            writer.close()
    return 0


def cmd_replay(args) -> int:
    from .service import ReplayStreamer

    log = read_log(args.log)
    streamer = ReplayStreamer(log, host=args.host, port=args.port)
    streamer.start()
    print(
        f"replaying {len(log.records)} ticks on ws://{args.host}:{streamer.bound_port}"
    )
    try:
        streamer.wait()
    except KeyboardInterrupt:
        streamer.stop()
    return 0


def _as_kwargs(config: EngineConfig) -> dict:
    return {
        "tick_rate_hz": config.tick_rate_hz,
        "seed": config.seed,
        "mode": config.mode,
        "pipeline": config.pipeline,
        "tiles": config.tiles,
        "horde": config.horde,
        "advisor": config.advisor,
        "sim": config.sim,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gvfswitch",
        description="Predictive mode-switching engine for a simulated myoelectric arm",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scripted headless session to a log")
    p.add_argument("--duration", type=float, default=600.0, help="seconds of session time")
    p.add_argument("--steps", type=int, default=None, help="exact tick count (overrides duration)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="session log path")
    p.add_argument("--model-out", default=None, help="also save the learned weights")
    p.add_argument("--learning", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--pace", action="store_true", help="run at wall-clock rate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="multi-pass offline training over a log")
    p.add_argument("--in", dest="log", required=True)
    p.add_argument("--passes", type=int, default=5)
    p.add_argument("--out", required=True, help="model file path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="frozen-weights evaluation of a model on a log")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="log", required=True)
    p.add_argument("--report", default=None, help="write JSON + text report here")
    p.add_argument("--online", action="store_true", help="keep learning during evaluation")
    p.add_argument("--allow-mismatch", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="live session with cockpit telemetry")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--mode", choices=("scripted", "piloted"), default="piloted")
    p.add_argument("--model", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="optional session log path")
    p.add_argument("--learning", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--max-ticks", type=int, default=None)
    p.add_argument("--allow-mismatch", action="store_true")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="stream a recorded log over the wire protocol")
    p.add_argument("--in", dest="log", required=True)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LogFormatError, ModelMismatchError, DivergenceError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
