"""Packet crafting and a synthetic multi-device capture generator.

Used for fixtures and for the end-to-end pipeline check; each synthetic device
has its own TTL, TCP window and port range, so single packets are separable.
"""

from __future__ import annotations

import random
import socket
import struct
from dataclasses import dataclass

from .dataset import DeviceMap
from .pcap import write_pcap


def _checksum(data: bytes) -> int:
    if len(data) % 2:
        data += b"\0"
    s = sum(struct.unpack(f"!{len(data) // 2}H", data))
    while s >> 16:
        s = (s & 0xFFFF) + (s >> 16)
    return ~s & 0xFFFF


def _mac(text: str) -> bytes:
    return bytes(int(b, 16) for b in text.split(":"))


def ether(src: str, dst: str, payload: bytes, ethertype: int = 0x0800) -> bytes:
    return _mac(dst) + _mac(src) + struct.pack("!H", ethertype) + payload


def ipv4(src: str, dst: str, proto: int, payload: bytes, *, ttl: int = 64,
         ident: int = 0, tos: int = 0, flags_frag: int = 0x4000,
         options: bytes = b"") -> bytes:
    if len(options) % 4:
        raise ValueError("IP options must be padded to 32-bit words")
    ihl = 5 + len(options) // 4
    total = ihl * 4 + len(payload)
    hdr = struct.pack("!BBHHHBBH4s4s", 0x40 | ihl, tos, total, ident, flags_frag, ttl,
                      proto, 0, socket.inet_aton(src), socket.inet_aton(dst)) + options
    hdr = hdr[:10] + struct.pack("!H", _checksum(hdr)) + hdr[12:]
    return hdr + payload


def _pseudo(src: str, dst: str, proto: int, length: int) -> bytes:
    return socket.inet_aton(src) + socket.inet_aton(dst) + struct.pack("!BBH", 0, proto, length)


def tcp(src: str, dst: str, sport: int, dport: int, *, seq: int = 0, ack: int = 0,
        flags: int = 0x10, window: int = 65535, options: bytes = b"",
        payload: bytes = b"") -> bytes:
    """TCP segment with a valid checksum; ``src``/``dst`` feed the pseudo-header."""
    if len(options) % 4:
        options += b"\x01" * (4 - len(options) % 4)
    doff = 5 + len(options) // 4
    hdr = struct.pack("!HHIIHHHH", sport, dport, seq & 0xFFFFFFFF, ack & 0xFFFFFFFF,
                      (doff << 12) | flags, window, 0, 0) + options
    seg = hdr + payload
    csum = _checksum(_pseudo(src, dst, 6, len(seg)) + seg)
    return seg[:16] + struct.pack("!H", csum) + seg[18:]


def udp(src: str, dst: str, sport: int, dport: int, payload: bytes = b"",
        checksum: bool = True) -> bytes:
    length = 8 + len(payload)
    seg = struct.pack("!HHHH", sport, dport, length, 0) + payload
    csum = _checksum(_pseudo(src, dst, 17, length) + seg) if checksum else 0
    if checksum and csum == 0:
        csum = 0xFFFF
    return seg[:6] + struct.pack("!H", csum) + seg[8:]


def opt_mss(mss: int = 1460) -> bytes:
    return struct.pack("!BBH", 2, 4, mss)


def opt_wscale(shift: int) -> bytes:
    return struct.pack("!BBB", 3, 3, shift)


def opt_timestamp(tsval: int, tsecr: int) -> bytes:
    return struct.pack("!BBII", 8, 10, tsval, tsecr)


SYN, ACK, PSH, FIN = 0x02, 0x10, 0x08, 0x01

GATEWAY_MAC = "02:00:00:00:00:fe"
GATEWAY_IP = "192.168.1.1"
SERVER_IP = "93.184.216.34"


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    mac: str
    ip: str
    ttl: int
    window: int
    wscale: int | None
    port_base: int


def default_profiles(n: int = 5) -> list[DeviceProfile]:
    ttls = [64, 128, 255, 32, 100, 60, 200, 150]
    windows = [29200, 65535, 8192, 14600, 5840, 4096, 16384, 32768]
    scales = [7, 8, None, 2, None, 6, 3, None]
    if n > len(ttls):
        raise ValueError(f"at most {len(ttls)} built-in device profiles")
    return [DeviceProfile(f"device{i + 1:02d}", f"02:00:00:00:00:{i + 1:02x}",
                          f"192.168.1.{10 + i}", ttls[i], windows[i], scales[i],
                          20000 + 5000 * i)
            for i in range(n)]


def device_session(p: DeviceProfile, rng: random.Random, t: float, ident: int):
    """One TCP conversation (handshake, HTTP request, reply) plus a DNS query.

    Yields ``(timestamp, frame)``; server replies come from the gateway MAC.
    """
    sport = p.port_base + rng.randrange(4000)
    isn, server_isn = rng.getrandbits(32), rng.getrandbits(32)
    opts = opt_mss() + (opt_wscale(p.wscale) if p.wscale is not None else b"")
    srv_opts = opt_mss() + (opt_wscale(7) if p.wscale is not None else b"")
    dev = lambda seg, proto=6: ether(p.mac, GATEWAY_MAC, ipv4(
        p.ip, SERVER_IP, proto, seg, ttl=p.ttl, ident=(ident + rng.randrange(3)) & 0xFFFF))
    srv = lambda seg: ether(GATEWAY_MAC, p.mac, ipv4(SERVER_IP, p.ip, 6, seg, ttl=52))
    req = b"GET /status HTTP/1.1\r\nHost: example.org\r\n\r\n"
    frames = [
        dev(tcp(p.ip, SERVER_IP, sport, 80, seq=isn, flags=SYN, window=p.window,
                options=opts)),
        srv(tcp(SERVER_IP, p.ip, 80, sport, seq=server_isn, ack=isn + 1,
                flags=SYN | ACK, window=65160, options=srv_opts)),
        dev(tcp(p.ip, SERVER_IP, sport, 80, seq=isn + 1, ack=server_isn + 1,
                flags=ACK, window=p.window)),
        dev(tcp(p.ip, SERVER_IP, sport, 80, seq=isn + 1, ack=server_isn + 1,
                flags=ACK | PSH, window=p.window, payload=req)),
        srv(tcp(SERVER_IP, p.ip, 80, sport, seq=server_isn + 1, ack=isn + 1 + len(req),
                flags=ACK | PSH, window=501, payload=b"HTTP/1.1 200 OK\r\n\r\n")),
        dev(tcp(p.ip, SERVER_IP, sport, 80, seq=isn + 1 + len(req), ack=server_isn + 20,
                flags=ACK | FIN, window=p.window)),
        dev(udp(p.ip, GATEWAY_IP, p.port_base + 4000 + rng.randrange(500), 53,
                b"\x12\x34" + bytes(rng.randrange(10, 40))), 17),
    ]
    for k, frame in enumerate(frames):
        yield t + 0.001 * k, frame


def synthetic_corpus(n_devices: int = 5, sessions: int = 20, seed: int = 0):
    """Frames for ``sessions`` rounds of every device, and the matching DeviceMap."""
    rng = random.Random(seed)
    profiles = default_profiles(n_devices)
    frames = []
    t = 1_600_000_000.0
    for s in range(sessions):
        for i, p in enumerate(profiles):
            frames.extend(device_session(p, rng, t, 1000 * i + s))
            t += 0.05
    devices = DeviceMap({p.mac: p.name for p in profiles})
    return frames, devices


def write_synthetic_corpus(path, n_devices: int = 5, sessions: int = 20,
                           seed: int = 0) -> DeviceMap:
    frames, devices = synthetic_corpus(n_devices, sessions, seed)
    write_pcap(path, frames)
    return devices
