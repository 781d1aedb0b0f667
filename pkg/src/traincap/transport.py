"""Send/receive backends with monotonic timestamping hooks.

Two real backends share one endpoint contract:

* ``loopback`` — an in-memory pair of endpoints joined by FIFO queues
  with a configurable, deterministic delivery delay. Order and content
  are preserved exactly, and receive timestamps are the deterministic
  delivery instants, free of receiver-side scheduling noise.
* ``os-datagram`` — a UDP socket. The portable OS stack is the one real
  transport; kernel-bypass style paths are modeled in :mod:`.simnet`.

Timestamps: ``send`` reads the monotonic clock immediately before handing
the payload to the backend; ``recv`` stamps the instant the backend
delivered the datagram (for UDP, the clock just after ``recvfrom``
returns). Send timestamps on one endpoint are strictly increasing; a
same-ns collision is bumped by 1 ns.

Ownership: an endpoint may be used by one sending thread and one
receiving thread concurrently, and not shared further.
"""

from __future__ import annotations

import collections
import select
import socket
import threading
import time
from dataclasses import dataclass
from typing import Optional

from . import wire

DEFAULT_PORT = 8620

OS_DATAGRAM = "os-datagram"
LOOPBACK = "loopback"
SIMULATED = "simulated"

_RECV_BUFFER_TRAINS = 4  # kernel buffer sized for a few full trains


class TransportError(OSError):
    """Backend could not be opened or refused a datagram."""


@dataclass(frozen=True)
class BackendDescriptor:
    """What to open: backend kind, endpoints, and payload size."""

    kind: str
    payload_size: int
    local: tuple[str, int] | None = None
    remote: tuple[str, int] | None = None
    loopback_delay_ns: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (OS_DATAGRAM, LOOPBACK, SIMULATED):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        wire.require_payload_size(self.payload_size)


@dataclass(frozen=True)
class TimestampedDatagram:
    payload: bytes
    ts: int  # monotonic ns, read just after delivery


class _SendStamper:
    """Strictly increasing monotonic send stamps for one endpoint."""

    def __init__(self) -> None:
        self._last = 0

    def stamp(self) -> int:
        now = time.monotonic_ns()
        if now <= self._last:
            now = self._last + 1
        self._last = now
        return now


class LoopbackEndpoint:
    """One side of an in-memory datagram pair."""

    def __init__(self, delay_ns: int = 0) -> None:
        self._delay_ns = delay_ns
        self._queue: collections.deque[tuple[int, bytes]] = collections.deque()
        self._cond = threading.Condition()
        self._peer: Optional[LoopbackEndpoint] = None
        self._stamper = _SendStamper()

    def send(self, payload: bytes | bytearray) -> int:
        if self._peer is None:
            raise TransportError("loopback endpoint has no peer")
        ts = self._stamper.stamp()
        ready = ts + self._peer._delay_ns
        with self._peer._cond:
            self._peer._queue.append((ready, bytes(payload)))
            self._peer._cond.notify()
        return ts

    def recv(self, deadline: int) -> TimestampedDatagram | None:
        # The receive timestamp is the deterministic delivery instant
        # (send stamp + configured delay), not the dequeue time: the
        # in-memory medium exists to give tests a noise-free path, so
        # scheduler lag on the draining thread must not distort it.
        with self._cond:
            while True:
                now = time.monotonic_ns()
                if self._queue and self._queue[0][0] <= now:
                    ready, payload = self._queue.popleft()
                    return TimestampedDatagram(payload, ready)
                if now >= deadline:
                    return None
                wake = deadline if not self._queue else min(deadline, self._queue[0][0])
                self._cond.wait(max(wake - now, 1) / 1e9)

    def close(self) -> None:
        with self._cond:
            self._queue.clear()
            self._cond.notify_all()


class UdpEndpoint:
    """UDP socket endpoint with a reusable receive buffer."""

    def __init__(self, descriptor: BackendDescriptor) -> None:
        self._remote = descriptor.remote
        self._payload_size = descriptor.payload_size
        self._stamper = _SendStamper()
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            sock.setsockopt(
                socket.SOL_SOCKET,
                socket.SO_RCVBUF,
                max(1 << 20, descriptor.payload_size * 256 * _RECV_BUFFER_TRAINS),
            )
            if descriptor.local is not None:
                sock.bind(descriptor.local)
        except OSError as exc:
            sock.close()
            raise TransportError(f"bind failed: {exc}") from exc
        sock.setblocking(False)
        self._sock = sock
        # One persistent buffer instead of a per-packet allocation.
        self._recv_buf = bytearray(max(descriptor.payload_size, 2048))

    @property
    def local_address(self) -> tuple[str, int]:
        return self._sock.getsockname()

    def send(self, payload: bytes | bytearray, remote: tuple[str, int] | None = None) -> int:
        dest = remote or self._remote
        if dest is None:
            raise TransportError("no remote endpoint configured")
        ts = self._stamper.stamp()
        try:
            self._sock.sendto(payload, dest)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc
        return ts

    def recv(self, deadline: int) -> TimestampedDatagram | None:
        dg = self.recv_from(deadline)
        return dg[0] if dg is not None else None

    def recv_from(self, deadline: int) -> tuple[TimestampedDatagram, tuple[str, int]] | None:
        """recv variant that also reports the source address (reflector)."""
        while True:
            try:
                n, addr = self._sock.recvfrom_into(self._recv_buf)
            except BlockingIOError:
                remaining = deadline - time.monotonic_ns()
                if remaining <= 0:
                    return None
                select.select([self._sock], [], [], remaining / 1e9)
                continue
            ts = time.monotonic_ns()
            return TimestampedDatagram(bytes(self._recv_buf[:n]), ts), addr

    def close(self) -> None:
        self._sock.close()


Endpoint = LoopbackEndpoint | UdpEndpoint


def loopback_pair(
    payload_size: int, delay_ns: int = 0
) -> tuple[LoopbackEndpoint, LoopbackEndpoint]:
    """Two connected in-memory endpoints; each receives what the other sends."""
    wire.require_payload_size(payload_size)
    a = LoopbackEndpoint(delay_ns)
    b = LoopbackEndpoint(delay_ns)
    a._peer = b
    b._peer = a
    return a, b


def open_endpoint(descriptor: BackendDescriptor) -> Endpoint:
    """Open the endpoint a descriptor names.

    Loopback descriptors yield one endpoint of a fresh pair; use
    :func:`loopback_pair` directly when both ends are needed. The
    ``simulated`` kind has no transport endpoint (drive :mod:`.simnet`
    with schedules instead).
    """
    if descriptor.kind == OS_DATAGRAM:
        return UdpEndpoint(descriptor)
    if descriptor.kind == LOOPBACK:
        a, _ = loopback_pair(descriptor.payload_size, descriptor.loopback_delay_ns)
        return a
    raise ValueError("simulated backend has no transport endpoint; use simnet")
