#!/usr/bin/env python3
"""The four modeled probing architectures and their distortions.

Each preset is a calibrated path model: a per-packet sender stack delay,
a receive batch size, and small latencies on the last send stamp and the
first receive stamp. Trains simulated flat out (back-to-back frames for
whatever the sender can push) reproduce the characteristic behavior of
each architecture: the plain stack tops out near 2.5 Gbps, raw capture
near 6.5 Gbps, memory-mapped batching inflates receive estimates, and
the kernel-bypass path is accurate at wire speed.
"""

import random
from dataclasses import replace

from traincap import (
    PRESET_NAMES,
    TrainSpec,
    aggregate_stats,
    build_schedule,
    estimate_receive_rate,
    estimate_send_rate,
    ethernet_max_rate,
    preset,
    simulate_train,
)

print(f"{'preset':>14} {'est send':>10} {'est recv':>10}   (Gbps, deterministic, flat out)")
for name in PRESET_NAMES:
    cfg = preset(name)
    spec = TrainSpec(50, cfg.geometry, ethernet_max_rate(cfg))
    _, rec = simulate_train(build_schedule(spec, 0), cfg)
    print(f"{name:>14} {estimate_send_rate(rec)/1e9:>10.3f} "
          f"{estimate_receive_rate(rec)/1e9:>10.3f}")
print()

print("with 15% uniform jitter on the model delays, 10 repetitions each:")
print(f"{'preset':>14} {'mean':>8} {'min':>8} {'max':>8} {'rel std':>8}")
rng = random.Random(1)
for name in PRESET_NAMES:
    cfg = replace(preset(name), jitter=0.15)
    spec = TrainSpec(50, cfg.geometry, ethernet_max_rate(cfg))
    rates = []
    for _ in range(10):
        _, rec = simulate_train(build_schedule(spec, 0), cfg, rng=rng)
        rates.append(estimate_send_rate(rec))
    stats = aggregate_stats(rates)
    print(f"{name:>14} {stats.mean/1e9:>8.3f} {stats.min/1e9:>8.3f} "
          f"{stats.max/1e9:>8.3f} {stats.rel_std_pct:>7.2f}%")
