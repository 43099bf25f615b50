"""Command line entry points.

Exit codes: 0 success, 1 configuration or input error, 2 bind failure.
"""

from __future__ import annotations

import argparse
import asyncio
import dataclasses
import logging
import sys
from pathlib import Path

from wayfinder.errors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BIND = 2


def _parse_addr(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"listen address must be host:port, got {value!r}")
    try:
        return host, int(port)
    except ValueError:
        raise ConfigError(f"bad port in {value!r}") from None


def _load_base_config(args):
    from wayfinder.gateway.config import GatewayConfig, load_config

    config = load_config(args.config) if args.config else GatewayConfig()
    overrides = {}
    if getattr(args, "listen_tcp", None):
        overrides["listen_tcp"] = args.listen_tcp
    if getattr(args, "listen_ws", None):
        overrides["listen_ws"] = args.listen_ws
    if getattr(args, "backend", None):
        overrides["backend"] = args.backend
    if getattr(args, "static_dir", None):
        overrides["static_dir"] = args.static_dir
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


async def _serve(config, recorder=None) -> int:
    from wayfinder.gateway.service import Gateway
    from wayfinder.gateway.transports import GatewayServer

    if not config.listen_tcp and not config.listen_ws:
        raise ConfigError("serve needs listen_tcp and/or listen_ws (flag or config)")
    tcp = _parse_addr(config.listen_tcp) if config.listen_tcp else None
    ws = _parse_addr(config.listen_ws) if config.listen_ws else None
    if tcp and ws and tcp[0] != ws[0]:
        raise ConfigError("TCP and WS listeners must share a host")

    gateway = Gateway(config)
    gateway.recorder = recorder
    server = GatewayServer(gateway, host=(tcp or ws)[0])
    try:
        await server.start(tcp[1] if tcp else None, ws[1] if ws else None)
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        await gateway.aclose()
        return EXIT_BIND
    if server.tcp_port is not None:
        print(f"tcp://{server.host}:{server.tcp_port}")
    if server.ws_port is not None:
        print(f"ws://{server.host}:{server.ws_port}")
        if config.static_dir:
            print(f"browser app: http://{server.host}:{server.ws_port}/app")
    try:
        await asyncio.Future()
    except asyncio.CancelledError:
        pass
    finally:
        await server.stop()
    return EXIT_OK


def cmd_serve(args) -> int:
    config = _load_base_config(args)
    try:
        return asyncio.run(_serve(config))
    except KeyboardInterrupt:
        return EXIT_OK


def cmd_record(args) -> int:
    from wayfinder.harness.recording import Recorder

    config = _load_base_config(args)
    recorder = Recorder(args.out)
    try:
        return asyncio.run(_serve(config, recorder=recorder))
    except KeyboardInterrupt:
        return EXIT_OK
    finally:
        recorder.finalize()
        if recorder.failed:
            print(f"recording stopped early: {recorder.failed}", file=sys.stderr)
        print(f"recorded {len(recorder.entries)} frames to {args.out}")


def cmd_replay(args) -> int:
    from wayfinder.gateway.config import make_backend
    from wayfinder.harness.corpus import STUB_SCRIPT_NAME
    from wayfinder.harness.recording import load_recording
    from wayfinder.harness.replay import config_for_recording, run_evaluation
    from wayfinder.harness.report import emit_report, render_table

    recording = load_recording(args.recording)
    if args.config:
        from wayfinder.gateway.config import load_config

        config = load_config(args.config)
        if args.backend:
            config = dataclasses.replace(config, backend=args.backend)
    else:
        overrides: dict = {"backend": args.backend or "stub"}
        bundled_script = recording.root / STUB_SCRIPT_NAME
        if overrides["backend"] == "stub" and bundled_script.is_file():
            overrides["stub_script"] = str(bundled_script)
        config = config_for_recording(recording, **overrides)

    report = run_evaluation(
        recording,
        lambda: make_backend(config),
        config,
        fast=args.fast,
        drill=not args.no_drill,
        write_instructions=True,
    )
    try:
        json_path, table_path = emit_report(report, args.report)
    except OSError as exc:
        raise ConfigError(f"cannot write report {args.report}: {exc}") from exc
    print(render_table(report), end="")
    print(f"wrote {json_path} and {table_path}")
    return EXIT_OK


def cmd_corpus(args) -> int:
    from wayfinder.harness.corpus import build_demo_corpus

    recording = build_demo_corpus(args.out)
    print(f"built {len(recording)}-frame corpus in {recording.root}")
    return EXIT_OK


def cmd_protocol_dump(args) -> int:
    from wayfinder.protocol import HEADER_SIZE, MsgType, ProtocolError, decode_message

    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.file}: {exc}") from exc

    offset = 0
    index = 0
    buffer = memoryview(data)
    while offset < len(data):
        try:
            decoded = decode_message(bytes(buffer[offset:]))
        except ProtocolError as exc:
            print(f"@ {offset:#08x}  protocol error in field '{exc.field}': {exc}")
            return EXIT_CONFIG
        if decoded is None:
            print(f"@ {offset:#08x}  {len(data) - offset} trailing bytes (incomplete message)")
            break
        message, consumed = decoded
        index += 1
        print(
            f"@ {offset:#08x}  [{index}] {MsgType(message.msg_type).name}"
            f"  session={message.session_id.hex()}"
            f"  seq={message.sequence}  ts={message.timestamp_ms}"
            f"  payload={len(message.payload)}B"
        )
        head = data[offset : offset + HEADER_SIZE]
        print(f"           header  {head.hex(' ')}")
        preview = message.payload[:48]
        if preview:
            printable = "".join(chr(b) if 32 <= b < 127 else "." for b in preview)
            suffix = " ..." if len(message.payload) > len(preview) else ""
            print(f"           payload {preview.hex(' ')}{suffix}")
            print(f"                   {printable}{suffix}")
        offset += consumed
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wayfinder",
        description="Edge navigation gateway: stream frames in, spoken guidance out.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the gateway")
    serve.add_argument("--config", help="TOML config file")
    serve.add_argument("--listen-tcp", metavar="HOST:PORT")
    serve.add_argument("--listen-ws", metavar="HOST:PORT")
    serve.add_argument("--backend", choices=["stub", "east", "vqa", "remote"])
    serve.add_argument("--static-dir", help="directory served at /app")
    serve.set_defaults(func=cmd_serve)

    record = sub.add_parser("record", help="serve while capturing a recording")
    record.add_argument("--config", help="TOML config file")
    record.add_argument("--listen-tcp", metavar="HOST:PORT")
    record.add_argument("--listen-ws", metavar="HOST:PORT")
    record.add_argument("--backend", choices=["stub", "east", "vqa", "remote"])
    record.add_argument("--static-dir", help="directory served at /app")
    record.add_argument("--out", required=True, help="recording output directory")
    record.set_defaults(func=cmd_record)

    replay = sub.add_parser("replay", help="replay a recording and score it")
    replay.add_argument("--recording", required=True, help="recording directory")
    replay.add_argument("--backend", choices=["stub", "east", "vqa", "remote"])
    replay.add_argument("--config", help="TOML config file (overrides recording metadata)")
    replay.add_argument("--report", required=True, help="report JSON path")
    replay.add_argument("--fast", action="store_true", help="skip recorded inter-frame delays")
    replay.add_argument("--no-drill", action="store_true", help="skip the reconnect drill")
    replay.set_defaults(func=cmd_replay)

    corpus = sub.add_parser("corpus", help="build the bundled demo corpus")
    corpus.add_argument("--out", required=True, help="output directory")
    corpus.set_defaults(func=cmd_corpus)

    dump = sub.add_parser("protocol-dump", help="hex-annotate a captured message stream")
    dump.add_argument("file", help="file of concatenated wire messages")
    dump.set_defaults(func=cmd_protocol_dump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
