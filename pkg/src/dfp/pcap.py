"""Classic libpcap file reading and writing (no pcapng)."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

LINKTYPE_ETHERNET = 1

_MAGICS = {
    b"\xd4\xc3\xb2\xa1": ("<", 1e-6),
    b"\xa1\xb2\xc3\xd4": (">", 1e-6),
    b"\x4d\x3c\xb2\xa1": ("<", 1e-9),
    b"\xa1\xb2\x3c\x4d": (">", 1e-9),
}
GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16


class PcapError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"offset {offset}: {message}")


@dataclass(frozen=True)
class RawPacket:
    frame_number: int
    timestamp: float
    link_type: int
    data: bytes
    orig_len: int = 0


def _open(source):
    if isinstance(source, (str, Path)):
        return open(source, "rb"), True
    return source, False


def read_pcap(source) -> Iterator[RawPacket]:
    """Yield packets from a classic pcap stream in file order.

    Both byte orders and both the microsecond and nanosecond magics are
    accepted. Frame numbers start at 1.
    """
    fh, owned = _open(source)
    try:
        head = fh.read(GLOBAL_HEADER_LEN)
        if len(head) < 4 or head[:4] not in _MAGICS:
            raise PcapError(f"bad pcap magic {head[:4].hex() or '(empty)'}", 0)
        if len(head) < GLOBAL_HEADER_LEN:
            raise PcapError("truncated global header", len(head))
        endian, tick = _MAGICS[head[:4]]
        link_type = struct.unpack(endian + "I", head[20:24])[0] & 0x0FFFFFFF
        record = struct.Struct(endian + "IIII")
        offset = GLOBAL_HEADER_LEN
        frame = 0
        while True:
            rec = fh.read(RECORD_HEADER_LEN)
            if not rec:
                return
            if len(rec) < RECORD_HEADER_LEN:
                raise PcapError("truncated record header", offset)
            sec, frac, incl_len, orig_len = record.unpack(rec)
            data = fh.read(incl_len)
            if len(data) < incl_len:
                raise PcapError(
                    f"truncated packet body ({len(data)} of {incl_len} bytes)",
                    offset + RECORD_HEADER_LEN)
            frame += 1
            yield RawPacket(frame, sec + frac * tick, link_type, data, orig_len)
            offset += RECORD_HEADER_LEN + incl_len
    finally:
        if owned:
            fh.close()


def write_pcap(sink: BinaryIO | str | Path, packets: Iterable[tuple[float, bytes]],
               link_type: int = LINKTYPE_ETHERNET, big_endian: bool = False,
               nanosecond: bool = False, snaplen: int = 65535) -> None:
    """Write ``(timestamp, frame_bytes)`` pairs as a classic pcap file."""
    e = ">" if big_endian else "<"
    magic = 0xA1B23C4D if nanosecond else 0xA1B2C3D4
    scale = 10**9 if nanosecond else 10**6
    fh, owned = (open(sink, "wb"), True) if isinstance(sink, (str, Path)) else (sink, False)
    try:
        fh.write(struct.pack(e + "IHHiIII", magic, 2, 4, 0, 0, snaplen, link_type))
        for ts, frame in packets:
            sec = int(ts)
            frac = int(round((ts - sec) * scale))
            fh.write(struct.pack(e + "IIII", sec, frac, len(frame), len(frame)))
            fh.write(frame)
    finally:
        if owned:
            fh.close()
