"""Hand-crafted capture used by the dissection tests."""

from dfp.synth import (ACK, FIN, PSH, SYN, ether, ipv4, opt_mss, opt_timestamp, opt_wscale,
                       tcp, udp)

A_MAC, B_MAC, C_MAC, GW_MAC = ("02:00:00:00:00:0a", "02:00:00:00:00:0b",
                               "02:00:00:00:00:0c", "02:00:00:00:00:fe")
A, B, C, S1, S2 = "10.0.0.10", "10.0.0.11", "10.0.0.12", "198.51.100.7", "203.0.113.9"


def _t(src_mac, dst_mac, src, dst, sport, dport, *, ttl=64, tos=0, ident=1, ip_opts=b"",
       **kw):
    return ether(src_mac, dst_mac, ipv4(src, dst, 6, tcp(src, dst, sport, dport, **kw),
                                        ttl=ttl, tos=tos, ident=ident, options=ip_opts))


def _u(src_mac, dst_mac, src, dst, sport, dport, payload=b"", *, ttl=64, ident=1, **kw):
    return ether(src_mac, dst_mac, ipv4(src, dst, 17, udp(src, dst, sport, dport, payload, **kw),
                                        ttl=ttl, ident=ident))


def fixture_frames():
    """Frames in capture order, each tagged with what it exercises."""
    get1 = b"GET /a HTTP/1.1\r\nHost: x\r\n\r\n"
    get2 = b"POST /b HTTP/1.0\r\nContent-Length: 0\r\n\r\n"
    out = []
    add = lambda tag, frame: out.append((tag, frame))

    # Stream 0: full handshake, both sides scale, timestamps, two HTTP requests.
    add("syn wscale", _t(A_MAC, GW_MAC, A, S1, 40000, 80, seq=1000, flags=SYN, window=29200,
                         options=opt_mss() + opt_wscale(7) + opt_timestamp(111, 0)))
    add("synack wscale", _t(GW_MAC, A_MAC, S1, A, 80, 40000, seq=5000, ack=1001,
                            flags=SYN | ACK, window=65160, ttl=52,
                            options=opt_mss() + opt_wscale(9) + opt_timestamp(900, 111)))
    add("ack scaled", _t(A_MAC, GW_MAC, A, S1, 40000, 80, seq=1001, ack=5001, flags=ACK,
                         window=502, options=opt_timestamp(112, 900)))
    add("http get", _t(A_MAC, GW_MAC, A, S1, 40000, 80, seq=1001, ack=5001, flags=ACK | PSH,
                       window=502, payload=get1))
    add("server data", _t(GW_MAC, A_MAC, S1, A, 80, 40000, seq=5001, ack=1001 + len(get1),
                          flags=ACK | PSH, window=509, ttl=52,
                          payload=b"HTTP/1.1 200 OK\r\n\r\n"))
    add("http post", _t(A_MAC, GW_MAC, A, S1, 40000, 80, seq=1001 + len(get1), ack=5020,
                        flags=ACK | PSH, window=502, payload=get2))
    add("not http", _t(A_MAC, GW_MAC, A, S1, 40000, 80, seq=1001 + len(get1) + len(get2),
                       ack=5020, flags=ACK | PSH, window=502, payload=b"HELLO world\r\n"))
    add("fin", _t(A_MAC, GW_MAC, A, S1, 40000, 80, seq=1200, ack=5020, flags=ACK | FIN,
                  window=502))

    # Stream 1: only the client offers window scaling.
    add("syn one-sided", _t(B_MAC, GW_MAC, B, S2, 51000, 443, seq=2**32 - 5, flags=SYN,
                            window=8192, options=opt_mss() + opt_wscale(2), tos=0xB8, ttl=128))
    add("synack no wscale", _t(GW_MAC, B_MAC, S2, B, 443, 51000, seq=77, ack=2**32 - 4,
                               flags=SYN | ACK, window=14600, options=opt_mss(), ttl=50))
    add("ack unscaled wrap", _t(B_MAC, GW_MAC, B, S2, 51000, 443, seq=2**32 - 4, ack=78,
                                flags=ACK, window=8192, tos=0xB8, ttl=128))
    add("ack after wrap", _t(B_MAC, GW_MAC, B, S2, 51000, 443, seq=10, ack=300, flags=ACK,
                             window=8000, tos=0xB8, ttl=128))

    # Stream 2: picked up mid-conversation, no handshake seen.
    add("midstream", _t(C_MAC, GW_MAC, C, S1, 33333, 8080, seq=123456, ack=987654,
                        flags=ACK, window=1024, ttl=255))
    add("midstream reply", _t(GW_MAC, C_MAC, S1, C, 8080, 33333, seq=987654, ack=123500,
                              flags=ACK | PSH, window=2048, payload=b"data"))
    add("midstream http", _t(C_MAC, GW_MAC, C, S1, 33333, 8080, seq=123500, ack=987658,
                             flags=ACK | PSH, window=1024, ttl=255,
                             payload=b"GET /c HTTP/1.1\r\n\r\n"))

    # Stream 3: oversize shift is capped; SYN without ACK has no tcp.ack.
    add("syn big shift", _t(C_MAC, GW_MAC, C, S2, 33334, 80, seq=0, flags=SYN, window=4096,
                            options=opt_wscale(15)))
    add("synack big shift", _t(GW_MAC, C_MAC, S2, C, 80, 33334, seq=42, ack=1,
                               flags=SYN | ACK, window=4096, options=opt_wscale(3)))
    add("ack capped", _t(C_MAC, GW_MAC, C, S2, 33334, 80, seq=1, ack=43, flags=ACK, window=3))

    # IP options widen the header.
    add("ip options", _t(A_MAC, GW_MAC, A, S2, 40001, 22, seq=9, ack=10, flags=ACK,
                         window=100, ip_opts=b"\x01\x01\x01\x00"))

    # UDP: two conversations, a reply, a zero checksum and Ethernet padding.
    add("dns query", _u(A_MAC, GW_MAC, A, "10.0.0.1", 5353, 53, b"\x12\x34" + bytes(20)))
    add("dns reply", _u(GW_MAC, A_MAC, "10.0.0.1", A, 53, 5353, b"\x12\x34" + bytes(40)))
    add("udp other", _u(B_MAC, GW_MAC, B, "10.0.0.1", 123, 123, bytes(48), ttl=128))
    add("udp no checksum", _u(C_MAC, GW_MAC, C, "10.0.0.255", 9999, 9999, b"x",
                              checksum=False))
    short = _u(B_MAC, GW_MAC, B, "10.0.0.1", 123, 123, b"", ttl=128)
    add("udp padded", short + bytes(60 - len(short)))

    # Frames every dissector refuses.
    full = _t(A_MAC, GW_MAC, A, S1, 40002, 80, seq=1, ack=1, flags=ACK)
    add("truncated tcp header", full[:14 + 20 + 10])
    add("truncated ip header", full[:14 + 12])
    bad = bytearray(full)
    bad[14 + 20 + 12] = 0xF0 | (bad[14 + 20 + 12] & 0x0F)  # data offset 60 bytes
    add("bad data offset", bytes(bad))
    add("truncated udp header", _u(A_MAC, GW_MAC, A, S1, 1, 2, b"abc")[:14 + 20 + 4])
    add("icmp", ether(A_MAC, GW_MAC, ipv4(A, S1, 1, b"\x08\x00\x00\x00\x00\x01\x00\x01")))
    add("fragment", ether(A_MAC, GW_MAC, ipv4(A, S1, 17, bytes(16), flags_frag=0x2000 | 185)))
    add("arp", ether(A_MAC, "ff:ff:ff:ff:ff:ff", bytes(28), ethertype=0x0806))
    return out
