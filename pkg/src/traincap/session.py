"""Sender, receiver, and reflector roles; statistics; experiment harness.

The sender paces pre-built probe trains through a transport endpoint,
writing each packet's timestamp immediately before its send. The
receiver stores every packet of a train before computing the train's
receive rate. The reflector buffers a whole train and only then bursts
it back, so reflection cannot disturb the inbound timestamping.

On an otherwise empty path the per-train receive rates directly estimate
the available path capacity; the reported APC is their median, which
shrugs off the occasional coalescing-inflated outlier.
"""

from __future__ import annotations

import math
import random
import statistics
import sys
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import wire
from .pacing import PacerConfig, no_sleep_horizon, pace_send, wait_until
from .simnet import (
    PRESET_NAMES,
    SimConfig,
    combine,
    ethernet_max_rate,
    preset,
    simulate_train,
    sweep,
    sweep_study_config,
)
from .train import (
    DegenerateDurationError,
    InvalidTrainError,
    TrainRecord,
    TrainSpec,
    TrainStatus,
    build_schedule,
    estimate_receive_rate,
    estimate_send_rate,
    validate_train,
)
from .transport import Endpoint, TransportError, loopback_pair
from .wire import FrameGeometry, NtpTimestamp, ProbePacket

_NS_PER_S = 1_000_000_000

DEFAULT_IDLE_TIMEOUT_NS = 10_000_000  # flush a stalled train after 10 ms
DEFAULT_INTER_TRAIN_GAP_NS = 10_000_000


@dataclass(frozen=True)
class SessionParams:
    """Shared knobs of the sender/receiver/reflector roles."""

    n_trains: int = 10
    n_packets: int = 50
    desired_rate: float = 100_000_000
    geometry: FrameGeometry = field(default_factory=FrameGeometry)
    inter_train_gap_ns: int = DEFAULT_INTER_TRAIN_GAP_NS
    idle_timeout_ns: int = DEFAULT_IDLE_TIMEOUT_NS
    repeat_count: int = 1
    pacer: PacerConfig = field(default_factory=PacerConfig)
    start_lead_ns: int = 4_000_000  # headroom between scheduling and first send

    def __post_init__(self) -> None:
        if self.n_trains < 1:
            raise ValueError("n_trains must be at least 1")
        if self.inter_train_gap_ns <= 0:
            raise ValueError("inter_train_gap_ns must be positive")

    def train_spec(self, train_id: int) -> TrainSpec:
        return TrainSpec(
            n_packets=self.n_packets,
            geometry=self.geometry,
            desired_rate=self.desired_rate,
            train_id=train_id,
        )

    def expected_duration_ns(self) -> int:
        gap = build_schedule(self.train_spec(0), 0).gap
        per_train = (self.n_packets - 1) * gap + self.inter_train_gap_ns
        return self.n_trains * per_train


@dataclass(frozen=True)
class RateStats:
    """Min/max/mean/sample-std aggregation over repeated rates."""

    min: float
    max: float
    mean: float
    std: float
    rel_std_pct: float | None  # None when the mean is not positive


@dataclass(frozen=True)
class ApcReport:
    """Available-path-capacity estimate from valid trains' receive rates."""

    rates: list[float]
    valid_count: int
    apc_estimate: float | None
    status: str  # "ok" or "no-valid-trains"


@dataclass(frozen=True)
class ReflectionRecord:
    """Bookkeeping for one buffered-and-reflected train."""

    train_id: int
    n_expected: int
    ingress_ts: list[int]
    egress_ts: list[int]
    partial: bool


def aggregate_stats(rates: Sequence[float]) -> RateStats:
    """Sample statistics (n-1 denominator) over per-repetition rates."""
    if not rates:
        raise ValueError("empty rate list")
    n = len(rates)
    mean = sum(rates) / n
    if n > 1:
        std = math.sqrt(sum((x - mean) ** 2 for x in rates) / (n - 1))
    else:
        std = 0.0
    rel = 100.0 * std / mean if mean > 0 else None
    return RateStats(min=min(rates), max=max(rates), mean=mean, std=std, rel_std_pct=rel)


def safe_send_rate(rec: TrainRecord) -> float | None:
    """Send-rate estimate, or None; marks degenerate trains zero-duration."""
    try:
        return estimate_send_rate(rec)
    except DegenerateDurationError:
        rec.status = TrainStatus.ZERO_DURATION
        return None
    except InvalidTrainError:
        return None


def safe_receive_rate(rec: TrainRecord) -> float | None:
    """Receive-rate estimate, or None; marks degenerate trains zero-duration."""
    try:
        return estimate_receive_rate(rec)
    except DegenerateDurationError:
        rec.status = TrainStatus.ZERO_DURATION
        return None
    except InvalidTrainError:
        return None


def apc_report(records: Sequence[TrainRecord]) -> ApcReport:
    """Median of the valid trains' receive rates on an empty path."""
    rates = [r for r in (safe_receive_rate(rec) for rec in records) if r is not None]
    if not rates:
        return ApcReport(rates=[], valid_count=0, apc_estimate=None, status="no-valid-trains")
    return ApcReport(
        rates=rates,
        valid_count=len(rates),
        apc_estimate=statistics.median(rates),
        status="ok",
    )


# ---------------------------------------------------------------------------
# Roles


def run_sender(params: SessionParams, endpoint: Endpoint) -> list[TrainRecord]:
    """Pace and send the configured trains; return sender-side records.

    Packets are fully pre-built per train except the timestamp field,
    which is patched immediately before each send. A transport failure
    marks the current and all remaining trains failed.
    """
    payload_size = params.geometry.payload_size
    records: list[TrainRecord] = []
    failed = False
    for train_id in range(params.n_trains):
        spec = params.train_spec(train_id)
        if failed:
            records.append(TrainRecord(train_id, spec, status=TrainStatus.FAILED))
            continue
        bufs = [
            bytearray(
                wire.encode_probe(
                    ProbePacket(
                        seq=i,
                        send_ts=NtpTimestamp(0, 0),
                        train_id=train_id,
                        train_len=params.n_packets,
                    ),
                    payload_size,
                )
            )
            for i in range(params.n_packets)
        ]

        def emit(i: int) -> int:
            buf = bufs[i]
            wire.patch_send_ts(buf, wire.ns_to_ntp(time.monotonic_ns()))
            return endpoint.send(buf)

        schedule = build_schedule(spec, time.monotonic_ns() + params.start_lead_ns)
        # Two-stage approach to the first deadline: a coarse sleep that
        # stops well short of the start (a cold thread's first sleep can
        # run milliseconds long), then a guarded wait whose final stretch
        # never sleeps. Keeps the first packets from inheriting overshoot.
        horizon = no_sleep_horizon(params.pacer)
        coarse_stop = schedule.start - horizon - 2_500_000
        now = time.monotonic_ns()
        if coarse_stop > now:
            time.sleep((coarse_stop - now) / 1e9)
        wait_until(schedule.start - horizon, params.pacer)
        try:
            send_ts = pace_send(schedule.send_instants, emit, params.pacer)
        except (TransportError, OSError):
            records.append(TrainRecord(train_id, spec, status=TrainStatus.FAILED))
            failed = True
            continue
        records.append(
            TrainRecord(
                train_id,
                spec,
                send_ts=[float(t) for t in send_ts],
                status=TrainStatus.COMPLETE,
            )
        )
        # Linger one gap past the last packet so a co-resident receiver
        # thread sees the train's tail under the same scheduling pressure
        # as its body (keeps first/last receive lag symmetric).
        wait_until(schedule.send_instants[-1] + min(schedule.gap, 2_000_000), params.pacer)
        if train_id + 1 < params.n_trains:
            time.sleep(params.inter_train_gap_ns / 1e9)
    return records


class _TrainAssembler:
    """Groups arriving probes into trains by in-band train_id."""

    def __init__(self) -> None:
        self.train_id: int | None = None
        self.train_len = 0
        self.arrivals: list[tuple[int, int]] = []
        self.last_arrival_ns: int | None = None

    def start(self, train_id: int, train_len: int) -> None:
        self.train_id = train_id
        self.train_len = train_len
        self.arrivals = []

    def add(self, seq: int, ts: int) -> None:
        self.arrivals.append((seq, ts))
        self.last_arrival_ns = ts

    @property
    def complete(self) -> bool:
        return len(self.arrivals) >= self.train_len

    def open(self) -> bool:
        return self.train_id is not None


def run_receiver(
    params: SessionParams,
    endpoint: Endpoint,
    overall_timeout_ns: int | None = None,
) -> tuple[list[TrainRecord], ApcReport]:
    """Collect trains, validate them, and report receive rates and APC.

    Each train is stored in full (all ``train_len`` sequence numbers, or
    an idle timeout, or the next train's first packet) before any rate is
    computed. Non-probe datagrams are ignored.
    """
    if overall_timeout_ns is None:
        overall_timeout_ns = 3 * params.expected_duration_ns() + _NS_PER_S
    overall_deadline = time.monotonic_ns() + overall_timeout_ns

    records: list[TrainRecord] = []
    asm = _TrainAssembler()

    def flush() -> None:
        if not asm.open() or asm.train_len < 2:
            asm.train_id = None
            return
        spec = TrainSpec(
            n_packets=asm.train_len,
            geometry=params.geometry,
            desired_rate=params.desired_rate,
            train_id=asm.train_id,
        )
        records.append(validate_train(asm.arrivals, spec))
        asm.train_id = None

    while len(records) < params.n_trains:
        now = time.monotonic_ns()
        if now >= overall_deadline:
            break
        deadline = overall_deadline
        if asm.open():
            deadline = min(deadline, asm.last_arrival_ns + params.idle_timeout_ns)
        dg = endpoint.recv(deadline)
        if dg is None:
            if asm.open():
                flush()
                continue
            if time.monotonic_ns() >= overall_deadline:
                break
            continue
        try:
            seq, train_id, train_len = wire.peek_train_fields(dg.payload)
        except ValueError:
            continue
        if asm.open() and train_id != asm.train_id:
            flush()
        if not asm.open():
            asm.start(train_id, train_len)
        asm.add(seq, dg.ts)
        if asm.complete:
            flush()
    flush()
    return records, apc_report(records)


def run_reflector(
    params: SessionParams,
    endpoint: Endpoint,
    overall_timeout_ns: int | None = None,
) -> list[ReflectionRecord]:
    """Buffer each train fully, then burst it back; return the reflection log.

    The first reflected packet of a train leaves strictly after its last
    buffered packet arrived, so reflection work never perturbs inbound
    timestamps. A train stalled for ``idle_timeout_ns`` (or interrupted
    by a new train_id) is reflected as-is and flagged partial.
    """
    if overall_timeout_ns is None:
        overall_timeout_ns = 3 * params.expected_duration_ns() + _NS_PER_S
    overall_deadline = time.monotonic_ns() + overall_timeout_ns

    log: list[ReflectionRecord] = []
    asm = _TrainAssembler()
    payloads: list[bytes] = []
    sources: list[tuple[str, int] | None] = []
    recv_from = getattr(endpoint, "recv_from", None)

    def reflect() -> None:
        if not asm.open():
            return
        egress: list[int] = []
        for payload, source in zip(payloads, sources):
            buf = bytearray(payload)
            wire.patch_send_ts(buf, wire.ns_to_ntp(time.monotonic_ns()))
            if source is not None:
                ts = endpoint.send(buf, remote=source)
            else:
                ts = endpoint.send(buf)
            egress.append(ts)
        log.append(
            ReflectionRecord(
                train_id=asm.train_id,
                n_expected=asm.train_len,
                ingress_ts=[ts for _, ts in asm.arrivals],
                egress_ts=egress,
                partial=len(asm.arrivals) < asm.train_len,
            )
        )
        asm.train_id = None
        payloads.clear()
        sources.clear()

    while len(log) < params.n_trains:
        now = time.monotonic_ns()
        if now >= overall_deadline:
            break
        deadline = overall_deadline
        if asm.open():
            deadline = min(deadline, asm.last_arrival_ns + params.idle_timeout_ns)
        if recv_from is not None:
            got = recv_from(deadline)
            dg, source = got if got is not None else (None, None)
        else:
            dg, source = endpoint.recv(deadline), None
        if dg is None:
            if asm.open():
                reflect()
                continue
            if time.monotonic_ns() >= overall_deadline:
                break
            continue
        try:
            seq, train_id, train_len = wire.peek_train_fields(dg.payload)
        except ValueError:
            continue
        if asm.open() and train_id != asm.train_id:
            reflect()
        if not asm.open():
            asm.start(train_id, train_len)
        asm.add(seq, dg.ts)
        payloads.append(dg.payload)
        sources.append(source)
        if asm.complete:
            reflect()
    reflect()
    return log


def run_paired(
    params: SessionParams,
    sender_endpoint: Endpoint,
    receiver_endpoint: Endpoint,
) -> tuple[list[TrainRecord], list[TrainRecord], ApcReport]:
    """Run sender and receiver threads over two endpoints of one path.

    The interpreter's thread switch interval is temporarily lowered so
    the receiver keeps draining while the sender busy-waits between
    packets; both are restored before returning.
    """
    result: dict[str, object] = {}

    def receive() -> None:
        result["recv"] = run_receiver(params, receiver_endpoint)

    old_interval = sys.getswitchinterval()
    sys.setswitchinterval(0.0001)
    try:
        rx = threading.Thread(target=receive, name="traincap-receiver")
        rx.start()
        try:
            time.sleep(0.01)  # let the receiver block on its socket first
            sender_records = run_sender(params, sender_endpoint)
        finally:
            rx.join()  # receiver bounds itself with its overall timeout
    finally:
        sys.setswitchinterval(old_interval)
    receiver_records, report = result["recv"]
    return sender_records, receiver_records, report


def run_loopback_session(
    params: SessionParams, delay_ns: int = 0
) -> tuple[list[TrainRecord], list[TrainRecord], ApcReport]:
    """Sender and receiver threads over an in-memory loopback pair."""
    a, b = loopback_pair(params.geometry.payload_size, delay_ns)
    try:
        return run_paired(params, a, b)
    finally:
        a.close()
        b.close()


# ---------------------------------------------------------------------------
# Simulation experiment sets


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    rows: list[dict]


EXPERIMENT_KINDS = ("same-method", "sweep", "sender-vs-reference", "receiver-vs-reference")


def _stats_row(stats: RateStats) -> dict:
    return {
        "min_bps": stats.min,
        "max_bps": stats.max,
        "mean_bps": stats.mean,
        "std_bps": stats.std,
        "rel_std_pct": stats.rel_std_pct,
    }


def _simulated_rep_means(
    cfg: SimConfig,
    desired_rate: float,
    n_packets: int,
    n_trains: int,
    repeats: int,
    rng: random.Random | None,
) -> tuple[list[float], list[float]]:
    """Per-repetition mean estimated send/receive rates."""
    send_means, recv_means = [], []
    for _ in range(repeats):
        send_rates, recv_rates = [], []
        for train_id in range(n_trains):
            spec = TrainSpec(n_packets, cfg.geometry, desired_rate, train_id=train_id)
            _, rec = simulate_train(build_schedule(spec, 0), cfg, rng=rng)
            send_rates.append(estimate_send_rate(rec))
            recv_rates.append(estimate_receive_rate(rec))
        send_means.append(sum(send_rates) / len(send_rates))
        recv_means.append(sum(recv_rates) / len(recv_rates))
    return send_means, recv_means


def run_experiment(
    kind: str,
    presets: Sequence[str] = PRESET_NAMES,
    n_packets: int = 50,
    n_trains: int = 10,
    repeats: int = 10,
    desired_rate: float = 10_000_000_000,
    frame_size: int = 1514,
    train_lengths: Sequence[int] = (10, 20, 50, 100),
    rates: Sequence[float] = (1e9, 2.5e9, 5e9, 10e9),
    jitter: float = 0.0,
    seed: int | None = None,
) -> ExperimentReport:
    """Run one of the four simulated experiment sets.

    same-method:           each preset at both ends, sending flat out.
    sweep:                 train-length x desired-rate grid on the
                           timestamp-latency study config.
    sender-vs-reference:   each preset sending to the bypass receiver;
                           the reference receiver's estimate stands in
                           for the actual send rate.
    receiver-vs-reference: bypass sender into each preset's receiver.

    Identical arguments (including the seed) reproduce identical tables.
    """
    if kind not in EXPERIMENT_KINDS:
        raise ValueError(f"unknown experiment kind: {kind!r}")
    rng = random.Random(seed) if jitter > 0 else None
    rows: list[dict] = []

    if kind == "sweep":
        cfg = replace(sweep_study_config(frame_size), jitter=jitter)
        for cell in sweep(train_lengths, rates, cfg, rng=rng):
            rows.append(
                {
                    "n_packets": cell.n_packets,
                    "desired_rate_bps": cell.desired_rate,
                    "est_send_rate_bps": cell.est_send,
                    "est_recv_rate_bps": cell.est_recv,
                }
            )
        return ExperimentReport(kind, rows)

    bypass = preset("bypass", frame_size)
    for name in presets:
        base = preset(name, frame_size)
        if kind == "same-method":
            cfg = replace(base, jitter=jitter)
            rate = ethernet_max_rate(cfg)
            label_est, label_act = "est_send", "est_recv"
        elif kind == "sender-vs-reference":
            cfg = replace(combine(base, bypass), jitter=jitter)
            rate = desired_rate
            label_est, label_act = "est_send", "actual_send"
        else:  # receiver-vs-reference
            cfg = replace(combine(bypass, base), jitter=jitter)
            rate = desired_rate
            label_est, label_act = "est_recv", "actual_recv"
        send_means, recv_means = _simulated_rep_means(
            cfg, rate, n_packets, n_trains, repeats, rng
        )
        if kind == "receiver-vs-reference":
            ref_cfg = replace(combine(bypass, bypass), jitter=jitter)
            _, actual_means = _simulated_rep_means(
                ref_cfg, rate, n_packets, n_trains, repeats, rng
            )
            est_means = recv_means
        else:
            est_means, actual_means = send_means, recv_means
        rows.append({"preset": name, "metric": label_est, **_stats_row(aggregate_stats(est_means))})
        rows.append({"preset": name, "metric": label_act, **_stats_row(aggregate_stats(actual_means))})
    return ExperimentReport(kind, rows)
