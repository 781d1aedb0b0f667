"""Command-line entry points for the probing roles and the simulator.

Subcommands: send, receive, reflect, simulate, report. Results are
emitted as OutputRecords (one per train) or report tables, in CSV or
JSON with identical values either way.

Rates accept plain integers, scientific notation, and decimal k/M/G
suffixes ("100M", "2.5G", "10e9"); internally rates are integer bits/s.
The default UDP port is 8620, overridable via the TRAINCAP_PORT
environment variable or an explicit host:port.

Exit codes: 0 ok, 2 usage error, 3 transport error, 4 no valid trains.

With ``--backend loopback`` the send and receive commands run both roles
in one process over an in-memory pair (two processes cannot share a
loopback), emitting their own side's records.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import replace
from typing import Sequence

from .pacing import HYBRID, PURE_SPIN, PacerConfig
from .session import (
    EXPERIMENT_KINDS,
    SessionParams,
    aggregate_stats,
    run_experiment,
    run_loopback_session,
    run_receiver,
    run_reflector,
    run_sender,
    safe_receive_rate,
    safe_send_rate,
)
from .simnet import PRESET_NAMES, preset, simulate_train
from .train import TrainRecord, TrainSpec, build_schedule
from .transport import (
    DEFAULT_PORT,
    OS_DATAGRAM,
    BackendDescriptor,
    TransportError,
    open_endpoint,
)
from .wire import FrameGeometry

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRANSPORT = 3
EXIT_NO_VALID_TRAINS = 4

_SUFFIXES = {"k": 1e3, "M": 1e6, "G": 1e9}


def parse_rate(text: str) -> int:
    """Parse a rate like '100M', '2.5G', or '10e9' into integer bits/s."""
    text = text.strip()
    mult = 1.0
    if text and text[-1] in _SUFFIXES:
        mult = _SUFFIXES[text[-1]]
        text = text[:-1]
    try:
        value = float(text) * mult
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid rate: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("rate must be positive")
    return int(round(value))


def default_port() -> int:
    return int(os.environ.get("TRAINCAP_PORT", DEFAULT_PORT))


def parse_endpoint(text: str) -> tuple[str, int]:
    """Parse 'host:port', ':port', or 'host' (default port applies)."""
    host, sep, port = text.rpartition(":")
    if not sep:
        return text, default_port()
    return host, int(port) if port else default_port()


# ---------------------------------------------------------------------------
# Output records


def record_row(rec: TrainRecord, timestamps: bool = False) -> dict:
    row = {
        "train_id": rec.train_id,
        "n_packets": rec.spec.n_packets,
        "desired_rate_bps": int(rec.spec.desired_rate),
        "est_send_rate_bps": safe_send_rate(rec) if rec.send_ts else None,
        "est_recv_rate_bps": safe_receive_rate(rec) if rec.recv_ts else None,
        "status": rec.status.value,
    }
    if timestamps:
        row["send_ts"] = rec.send_ts
        row["recv_ts"] = rec.recv_ts
    return row


def _csv_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ";".join(repr(v) for v in value)
    return str(value)


def write_rows(rows: list[dict], fmt: str, out_file: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.writer(buf)
            writer.writerow(rows[0].keys())
            for row in rows:
                writer.writerow(_csv_cell(v) for v in row.values())
        text = buf.getvalue()
    if out_file:
        with open(out_file, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def read_rows(path: str) -> list[dict]:
    """Load OutputRecords back from a CSV or JSON file."""
    with open(path) as f:
        text = f.read()
    if text.lstrip().startswith("["):
        return json.loads(text)
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row: dict = {}
        for key, value in raw.items():
            if value == "" or value is None:
                row[key] = None
            else:
                try:
                    row[key] = float(value) if "." in value or "e" in value else int(value)
                except ValueError:
                    row[key] = value
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Commands


def _session_params(args: argparse.Namespace) -> SessionParams:
    return SessionParams(
        n_trains=args.trains,
        n_packets=args.packets,
        desired_rate=args.rate,
        geometry=FrameGeometry(args.frame_size),
        inter_train_gap_ns=int(args.gap_ms * 1e6),
        pacer=PacerConfig(mode=args.pacer, hybrid_spin_window=args.spin_window_us * 1000),
    )


def cmd_send(args: argparse.Namespace) -> int:
    params = _session_params(args)
    if args.backend == "loopback":
        records, _, _ = run_loopback_session(params)
    else:
        if not args.remote:
            print("usage: traincap send --backend udp requires --remote", file=sys.stderr)
            return EXIT_USAGE
        descriptor = BackendDescriptor(
            kind=OS_DATAGRAM,
            payload_size=params.geometry.payload_size,
            remote=parse_endpoint(args.remote),
        )
        endpoint = open_endpoint(descriptor)
        try:
            records = run_sender(params, endpoint)
        finally:
            endpoint.close()
    write_rows([record_row(r, args.timestamps) for r in records], args.out, args.out_file)
    return EXIT_OK


def cmd_receive(args: argparse.Namespace) -> int:
    params = _session_params(args)
    if args.backend == "loopback":
        _, records, report = run_loopback_session(params)
    else:
        descriptor = BackendDescriptor(
            kind=OS_DATAGRAM,
            payload_size=params.geometry.payload_size,
            local=parse_endpoint(args.local),
        )
        endpoint = open_endpoint(descriptor)
        try:
            records, report = run_receiver(
                params, endpoint, overall_timeout_ns=int(args.timeout * 1e9)
            )
        finally:
            endpoint.close()
    write_rows([record_row(r, args.timestamps) for r in records], args.out, args.out_file)
    if report.status == "no-valid-trains":
        return EXIT_NO_VALID_TRAINS
    print(f"# apc_estimate_bps={report.apc_estimate!r} valid_trains={report.valid_count}",
          file=sys.stderr)
    return EXIT_OK


def cmd_reflect(args: argparse.Namespace) -> int:
    params = _session_params(args)
    descriptor = BackendDescriptor(
        kind=OS_DATAGRAM,
        payload_size=params.geometry.payload_size,
        local=parse_endpoint(args.local),
    )
    endpoint = open_endpoint(descriptor)
    try:
        log = run_reflector(params, endpoint, overall_timeout_ns=int(args.timeout * 1e9))
    finally:
        endpoint.close()
    rows = [
        {
            "train_id": entry.train_id,
            "n_packets": entry.n_expected,
            "n_reflected": len(entry.egress_ts),
            "status": "partial" if entry.partial else "reflected",
        }
        for entry in log
    ]
    write_rows(rows, args.out, args.out_file)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = preset(args.preset, args.frame_size)
    if args.jitter:
        if args.seed is None:
            print("usage: --jitter requires --seed for reproducibility", file=sys.stderr)
            return EXIT_USAGE
        cfg = replace(cfg, jitter=args.jitter)
    if args.link_capacity:
        cfg = replace(cfg, link_capacity=args.link_capacity)
    rng = random.Random(args.seed) if args.jitter else None
    rows = []
    for train_id in range(args.trains):
        spec = TrainSpec(args.packets, cfg.geometry, args.rate, train_id=train_id)
        _, rec = simulate_train(build_schedule(spec, 0), cfg, rng=rng)
        rows.append(record_row(rec, args.timestamps))
    write_rows(rows, args.out, args.out_file)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.experiment:
        report = run_experiment(
            args.experiment,
            n_packets=args.packets,
            n_trains=args.trains,
            repeats=args.repeats,
            frame_size=args.frame_size,
            jitter=args.jitter,
            seed=args.seed,
        )
        write_rows(report.rows, args.out, args.out_file)
        return EXIT_OK
    rows = read_rows(args.in_file)
    summary = []
    for column in ("est_send_rate_bps", "est_recv_rate_bps"):
        values = [r[column] for r in rows if r.get(column) is not None]
        if not values:
            continue
        stats = aggregate_stats(values)
        summary.append(
            {
                "metric": column,
                "count": len(values),
                "min_bps": stats.min,
                "max_bps": stats.max,
                "mean_bps": stats.mean,
                "std_bps": stats.std,
                "rel_std_pct": stats.rel_std_pct,
            }
        )
    write_rows(summary, args.out, args.out_file)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(p: argparse.ArgumentParser, rate_required: bool = True) -> None:
    p.add_argument("--trains", type=int, default=10, help="number of trains (default 10)")
    p.add_argument("--packets", type=int, default=50, help="packets per train (default 50)")
    p.add_argument("--rate", type=parse_rate, required=rate_required, default=None if rate_required else 100_000_000,
                   help="desired Ethernet-layer rate in bits/s (accepts k/M/G suffixes)")
    p.add_argument("--frame-size", type=int, default=1514,
                   help="Ethernet frame size excluding FCS (default 1514)")
    p.add_argument("--out", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--out-file", default=None, help="write output here instead of stdout")
    p.add_argument("--timestamps", action="store_true", help="include per-packet timestamps")
    p.add_argument("--gap-ms", type=float, default=10.0, help="inter-train gap in ms (default 10)")
    p.add_argument("--pacer", choices=(PURE_SPIN, HYBRID), default=HYBRID)
    p.add_argument("--spin-window-us", type=int, default=200,
                   help="hybrid pacer final busy-wait window in us (default 200)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traincap",
        description="Packet-train path capacity probing: send, receive, reflect, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("send", help="pace probe trains at a target rate")
    _add_common(p)
    p.add_argument("--backend", choices=("udp", "loopback"), default="udp")
    p.add_argument("--remote", help="receiver/reflector host:port (udp backend)")
    p.set_defaults(func=cmd_send)

    p = sub.add_parser("receive", help="collect trains and report receive rates and APC")
    _add_common(p, rate_required=False)
    p.add_argument("--backend", choices=("udp", "loopback"), default="udp")
    p.add_argument("--local", default=":", help="bind address host:port (default port 8620)")
    p.add_argument("--timeout", type=float, default=30.0, help="overall timeout in s")
    p.set_defaults(func=cmd_receive)

    p = sub.add_parser("reflect", help="buffer each train, then burst it back")
    _add_common(p, rate_required=False)
    p.add_argument("--local", default=":", help="bind address host:port (default port 8620)")
    p.add_argument("--timeout", type=float, default=30.0, help="overall timeout in s")
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("simulate", help="run trains through the deterministic path model")
    _add_common(p)
    p.add_argument("--preset", choices=PRESET_NAMES, required=True)
    p.add_argument("--seed", type=int, default=None, help="RNG seed (required with --jitter)")
    p.add_argument("--jitter", type=float, default=0.0, help="uniform +/- fraction on model delays")
    p.add_argument("--link-capacity", type=parse_rate, default=None,
                   help="override the preset's link capacity")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="run an experiment set or summarize a records file")
    _add_common(p, rate_required=False)
    p.add_argument("--experiment", choices=EXPERIMENT_KINDS, default=None)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--in", dest="in_file", default=None, help="records file to summarize")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report" and not args.experiment and not args.in_file:
        parser.error("report needs --experiment or --in")
    try:
        return args.func(args)
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
