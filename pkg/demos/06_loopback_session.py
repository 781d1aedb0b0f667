#!/usr/bin/env python3
"""A complete sender/receiver session over the in-memory loopback.

The sender paces pre-built probe trains; the receiver stores each train
in full before computing its receive rate; the per-train receive rates
on an empty path estimate the available path capacity, reported as
their median.
"""

import statistics

from traincap import SessionParams, run_loopback_session
from traincap.pacing import PURE_SPIN, PacerConfig
from traincap.session import safe_send_rate
from traincap.wire import FrameGeometry

params = SessionParams(
    n_trains=5,
    n_packets=50,
    desired_rate=100_000_000,  # 100 Mbps
    geometry=FrameGeometry(1514),
    pacer=PacerConfig(mode=PURE_SPIN),
)

sender_records, receiver_records, apc = run_loopback_session(params)

print("per-train results at 100 Mbps over loopback:")
print(f"  {'train':>5} {'status':>10} {'est send (Mbps)':>16} {'est recv (Mbps)':>16}")
for s_rec, r_rec in zip(sender_records, receiver_records):
    send_rate = safe_send_rate(s_rec)
    recv_rate = apc.rates[r_rec.train_id] if r_rec.train_id < len(apc.rates) else None
    fmt = lambda r: f"{r/1e6:16.2f}" if r else f"{'-':>16}"
    print(f"  {s_rec.train_id:>5} {r_rec.status.value:>10} {fmt(send_rate)} {fmt(recv_rate)}")

print()
send_median = statistics.median(r for r in map(safe_send_rate, sender_records) if r)
print(f"median estimated send rate: {send_median/1e6:.2f} Mbps")
print(f"valid trains: {apc.valid_count}/{params.n_trains}")
print(f"available path capacity estimate: {apc.apc_estimate/1e6:.2f} Mbps "
      "(median receive rate on an empty path)")
