"""Ethernet/IPv4/TCP/UDP header dissection into fingerprint fields.

Field semantics follow the usual display-filter conventions of packet
analyzers: ``tcp.ack`` is relative to the peer's initial sequence number,
``tcp.window_size`` is the scaled window, and stream indices number
conversations in order of first appearance within one capture.
"""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass, field

from .dataset import mac_to_text
from .pcap import LINKTYPE_ETHERNET, RawPacket
from .schema import canonical_schema

FULL_FIELDS = tuple(canonical_schema("full24").names)

ETH_IPV4 = 0x0800
VLAN_TYPES = (0x8100, 0x88A8)
IPPROTO_TCP = 6
IPPROTO_UDP = 17

TH_SYN = 0x02
TH_ACK = 0x10

SCALE_UNKNOWN = -1
SCALE_NOT_USED = -2
MAX_WINDOW_SHIFT = 14

HTTP_METHODS = (b"GET ", b"POST ", b"PUT ", b"DELETE ", b"HEAD ", b"OPTIONS ",
                b"PATCH ", b"CONNECT ", b"TRACE ")


@dataclass
class _TcpDirection:
    base_seq: int | None = None
    syn_seen: bool = False
    shift: int | None = None  # window-scale shift from this side's SYN


@dataclass
class _TcpState:
    directions: dict = field(default_factory=dict)
    http_requests: int = 0
    last_request_frame: int | None = None


class ConversationTracker:
    """Per-capture conversation state: stream indices, TCP handshake and HTTP counters."""

    def __init__(self):
        self._streams = {"TCP": {}, "UDP": {}}
        self._tcp = {}
        self.diagnostics = Counter()

    def stream_index(self, proto: str, endpoints) -> int:
        """0-based index of the conversation between two (ip, port) endpoints.

        Lookup is direction-insensitive; TCP and UDP are numbered separately.
        """
        ip_a, port_a, ip_b, port_b = endpoints
        key = tuple(sorted([(ip_a, port_a), (ip_b, port_b)]))
        table = self._streams[proto]
        if key not in table:
            table[key] = len(table)
        return table[key]

    def stream_count(self, proto: str) -> int:
        return len(self._streams[proto])

    def tcp_state(self, stream: int) -> _TcpState:
        return self._tcp.setdefault(stream, _TcpState())


def http_state_update(tracker: ConversationTracker, tcp_stream: int, payload: bytes,
                      frame_number: int):
    """Return ``(http.request_number, http.prev_request_in)`` for a TCP payload.

    Only a segment that opens with a request line counts; anything else gives
    ``(None, None)`` and leaves the stream's counters alone.
    """
    if not payload.startswith(HTTP_METHODS):
        return None, None
    end = payload.find(b"\n")
    line = payload if end < 0 else payload[:end]
    line = line.rstrip(b"\r")
    if not (line.endswith(b" HTTP/1.0") or line.endswith(b" HTTP/1.1")):
        return None, None
    state = tracker.tcp_state(tcp_stream)
    state.http_requests += 1
    prev = state.last_request_frame
    state.last_request_frame = frame_number
    return state.http_requests, prev


@dataclass(frozen=True)
class PacketFields:
    values: dict  # feature name -> int or None, over FULL_FIELDS
    src_mac: str
    frame_number: int

    def project(self, names) -> tuple:
        return tuple(self.values.get(n) for n in names)


@dataclass(frozen=True)
class Skip:
    reason: str
    frame_number: int


def _ipv4_text(raw: bytes) -> str:
    return "%d.%d.%d.%d" % tuple(raw)


def _tcp_options(opts: bytes):
    """Return (window-scale shift or None, (tsval, tsecr) or None)."""
    shift = None
    stamps = None
    i = 0
    while i < len(opts):
        kind = opts[i]
        if kind == 0:
            break
        if kind == 1:
            i += 1
            continue
        if i + 1 >= len(opts):
            break
        length = opts[i + 1]
        if length < 2 or i + length > len(opts):
            break
        if kind == 3 and length == 3:
            shift = opts[i + 2]
        elif kind == 8 and length == 10:
            stamps = struct.unpack("!II", opts[i + 2:i + 10])
        i += length
    return shift, stamps


def dissect_packet(pkt: RawPacket, tracker: ConversationTracker):
    """Dissect one frame into ``PacketFields``, or return a ``Skip``.

    Skips are counted in ``tracker.diagnostics`` under their reason. Nothing
    here raises on malformed input.
    """

    def skip(reason):
        tracker.diagnostics[reason] += 1
        return Skip(reason, pkt.frame_number)

    if pkt.link_type != LINKTYPE_ETHERNET:
        return skip("non_ethernet")
    data = pkt.data
    if len(data) < 14:
        return skip("malformed")
    ethertype = struct.unpack_from("!H", data, 12)[0]
    if ethertype in VLAN_TYPES:
        return skip("vlan")
    if ethertype != ETH_IPV4:
        return skip("not_ipv4")
    src_mac = mac_to_text(data[6:12])

    ip = data[14:]
    if len(ip) < 20 or ip[0] >> 4 != 4:
        return skip("malformed")
    hdr_len = (ip[0] & 0x0F) * 4
    total_len, ip_id, frag = struct.unpack_from("!HHH", ip, 2)
    if hdr_len < 20 or len(ip) < hdr_len or total_len < hdr_len:
        return skip("malformed")
    if frag & 0x1FFF:
        return skip("fragment")
    ttl, proto = ip[8], ip[9]
    ds = ip[1]
    src_ip, dst_ip = _ipv4_text(ip[12:16]), _ipv4_text(ip[16:20])
    # Trailing Ethernet padding is not part of the datagram.
    l4 = ip[hdr_len:total_len]

    v = dict.fromkeys(FULL_FIELDS)
    v.update({
        "ip.len": total_len,
        "ip.hdr_len": hdr_len,
        "ip.id": ip_id,
        "ip.ttl": ttl,
        "ip.proto": proto,
        "ip.dsfield": ds,
        "ip.dsfield.dscp": ds >> 2,
    })

    if proto == IPPROTO_TCP:
        if len(l4) < 20:
            return skip("malformed")
        sport, dport, seq, ack, off_flags, win = struct.unpack_from("!HHIIHH", l4)
        doff = (off_flags >> 12) * 4
        flags = off_flags & 0x01FF
        if doff < 20 or len(l4) < doff:
            return skip("malformed")
        shift, stamps = _tcp_options(l4[20:doff])
        stream = tracker.stream_index("TCP", (src_ip, sport, dst_ip, dport))
        state = tracker.tcp_state(stream)
        fwd = state.directions.setdefault((src_ip, sport), _TcpDirection())
        rev = state.directions.setdefault((dst_ip, dport), _TcpDirection())
        syn = bool(flags & TH_SYN)
        if fwd.base_seq is None:
            fwd.base_seq = seq if syn else (seq - 1) & 0xFFFFFFFF
        if flags & TH_ACK:
            if rev.base_seq is None:
                rev.base_seq = (ack - 1) & 0xFFFFFFFF
            v["tcp.ack"] = (ack - rev.base_seq) & 0xFFFFFFFF
        if syn:
            fwd.syn_seen = True
            fwd.shift = None if shift is None else min(shift, MAX_WINDOW_SHIFT)
            v["tcp.window_size"] = win
        else:
            if fwd.syn_seen and rev.syn_seen:
                if fwd.shift is not None and rev.shift is not None:
                    scale = 1 << fwd.shift
                else:
                    scale = SCALE_NOT_USED
            else:
                scale = SCALE_UNKNOWN
            v["tcp.window_size_scalefactor"] = scale
            v["tcp.window_size"] = win * scale if scale > 0 else win
        v.update({
            "tcp.srcport": sport,
            "tcp.dstport": dport,
            "tcp.stream": stream,
            "tcp.window_size_value": win,
        })
        if stamps is not None:
            v["tcp.options.timestamp.tsval"], v["tcp.options.timestamp.tsecr"] = stamps
        req, prev = http_state_update(tracker, stream, l4[doff:], pkt.frame_number)
        v["http.request_number"] = req
        v["http.prev_request_in"] = prev
    elif proto == IPPROTO_UDP:
        if len(l4) < 8:
            return skip("malformed")
        sport, dport, ulen, csum = struct.unpack_from("!HHHH", l4)
        v.update({
            "udp.srcport": sport,
            "udp.dstport": dport,
            "udp.length": ulen,
            "udp.checksum": csum,
            "udp.stream": tracker.stream_index("UDP", (src_ip, sport, dst_ip, dport)),
        })
    else:
        return skip("not_tcp_udp")

    return PacketFields(v, src_mac, pkt.frame_number)
