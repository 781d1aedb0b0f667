#!/usr/bin/env python3
"""Probe packet anatomy: byte layout and timestamp resolution.

Every probe is a UDP payload with a 20-byte header (sequence number,
32.32 fixed-point timestamp, error estimate, train id, train length)
followed by zero padding up to the frame's payload size. The train id
and length ride in-band so a receiver or reflector can tell where each
train starts and ends without any control channel.
"""

from traincap import (
    FrameGeometry,
    ProbePacket,
    decode_probe,
    encode_probe,
    ns_to_ntp,
    ntp_to_ns,
)

geometry = FrameGeometry(1514)
print("frame geometry for a full-size Ethernet frame")
print(f"  frame_size   {geometry.frame_size} bytes (headers through payload, no FCS)")
print(f"  payload_size {geometry.payload_size} bytes of UDP payload")
print(f"  counted_bits {geometry.counted_bits} (frame + FCS, what rate math uses)")
print(f"  wire_bits    {geometry.wire_bits} (adds preamble + inter-frame gap)")
print()

packet = ProbePacket(
    seq=7,
    send_ts=ns_to_ntp(1_500_000_000),
    error_estimate=0x8001,
    train_id=42,
    train_len=50,
)
data = encode_probe(packet, geometry.payload_size)
print(f"encoded probe: {len(data)} bytes, header hex:")
print(" ", data[:20].hex(" "))
print(f"  decoded back: {decode_probe(data)}")
print()

print("timestamp resolution: one fraction unit is 2**-32 s (~0.233 ns)")
for ns in (0, 1, 1_500_000_000, 123_456_789_012):
    ts = ns_to_ntp(ns)
    back = ntp_to_ns(ts)
    print(f"  {ns:>15} ns -> ({ts.seconds}, {ts.fraction:>10}) -> {back:>15} ns"
          f"   (error {back - ns:+d} ns)")
