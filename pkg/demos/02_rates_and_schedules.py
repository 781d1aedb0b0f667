#!/usr/bin/env python3
"""From desired rate to schedule gap to first/last-timestamp estimates.

A train's send rate is defined as the Ethernet-layer bits of its first
N-1 packets divided by the time between the first and last send
timestamps; the receive rate is the same arithmetic on receive
timestamps. This demo walks the arithmetic, including the classic
ceiling: a 10 Gbps link carries at most 9.87 Gbps of *counted* bits with
1514-byte frames, because preamble and inter-frame gap occupy the wire
without being counted.
"""

from traincap import (
    FrameGeometry,
    TrainRecord,
    TrainSpec,
    build_schedule,
    estimate_receive_rate,
    estimate_send_rate,
)

geometry = FrameGeometry(1514)

print("schedule gaps for a few desired rates (uniform spacing, ns):")
for rate in (1e8, 1e9, 2.5e9, 5e9, 10e9):
    sched = build_schedule(TrainSpec(50, geometry, rate), start=0)
    print(f"  {rate/1e9:6.2f} Gbps -> gap {sched.gap:>7} ns "
          f"({1e9/sched.gap*1e-3:7.1f} kpps)")
print()

link = 10e9
ser = geometry.wire_bits * 1e9 / link
print(f"one frame occupies the 10 Gbps wire for {ser:.1f} ns")
print(f"back-to-back counted-bits ceiling: {geometry.counted_bits / ser:.4f} Gbps")
print()

# A perfectly paced 2 Gbps train, observed without distortion:
spec = TrainSpec(50, geometry, 2e9)
sched = build_schedule(spec, start=0)
rec = TrainRecord(
    train_id=0,
    spec=spec,
    send_ts=[float(t) for t in sched.send_instants],
    recv_ts=[float(t) + ser + 5000 for t in sched.send_instants],
    received_seqs=list(range(50)),
)
print("undistorted 2 Gbps train:")
print(f"  estimated send rate    {estimate_send_rate(rec)/1e9:.6f} Gbps")
print(f"  estimated receive rate {estimate_receive_rate(rec)/1e9:.6f} Gbps")
print()

# The same train, but the receiver stamps it in two 25-packet batches:
batched = list(rec.recv_ts)
batched[0:25] = [rec.recv_ts[24]] * 25
batched[25:50] = [rec.recv_ts[49]] * 25
rec.recv_ts = batched
print("same arrivals, stamped in 2 batches of 25 (coalescing):")
print(f"  estimated receive rate {estimate_receive_rate(rec)/1e9:.6f} Gbps"
      "  <- inflated ~2x by the shortened span")
