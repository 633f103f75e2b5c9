"""Capture files to a labelled fingerprint dataset."""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset, DeviceMap
from .dissect import FULL_FIELDS, ConversationTracker, PacketFields, dissect_packet
from .pcap import PcapError, read_pcap
from .schema import FeatureSchema

log = logging.getLogger(__name__)

NAN = float("nan")


@dataclass
class Diagnostics:
    packets: int = 0
    emitted: int = 0
    unknown_mac: int = 0
    skipped: Counter = field(default_factory=Counter)
    failed_files: list = field(default_factory=list)

    def merge(self, other: Diagnostics) -> None:
        self.packets += other.packets
        self.emitted += other.emitted
        self.unknown_mac += other.unknown_mac
        self.skipped.update(other.skipped)
        self.failed_files.extend(other.failed_files)

    def as_dict(self) -> dict:
        return {
            "packets": self.packets,
            "emitted": self.emitted,
            "unknown_mac": self.unknown_mac,
            "skipped": dict(sorted(self.skipped.items())),
            "failed_files": list(self.failed_files),
        }

    def summary(self) -> str:
        skipped = ", ".join(f"{k}={v}" for k, v in sorted(self.skipped.items())) or "none"
        return (f"packets={self.packets} emitted={self.emitted} "
                f"unknown_mac={self.unknown_mac} skipped: {skipped} "
                f"failed_files={len(self.failed_files)}")


class ExtractError(RuntimeError):
    pass


def dissect_capture(source):
    """Dissect every frame of one capture with a fresh tracker.

    Returns the list of ``PacketFields`` (skips dropped) and the tracker, whose
    ``diagnostics`` holds the skip counts.
    """
    tracker = ConversationTracker()
    out = []
    for pkt in read_pcap(source):
        fields = dissect_packet(pkt, tracker)
        if isinstance(fields, PacketFields):
            out.append(fields)
    return out, tracker


def _extract_one(source, devices: DeviceMap, names):
    diag = Diagnostics()
    rows, labels = [], []
    tracker = ConversationTracker()
    for pkt in read_pcap(source):
        diag.packets += 1
        fields = dissect_packet(pkt, tracker)
        if not isinstance(fields, PacketFields):
            continue
        label = devices.get(fields.src_mac)
        if label is None:
            diag.unknown_mac += 1
            continue
        vals = fields.values
        rows.append([NAN if (x := vals.get(n)) is None else x for n in names])
        labels.append(label)
    diag.skipped.update(tracker.diagnostics)
    diag.emitted = len(rows)
    return rows, labels, diag


def _extract_safe(args):
    source, devices, names = args
    try:
        return _extract_one(source, devices, names), None
    except (OSError, PcapError) as exc:
        return None, f"{source}: {exc}"


def extract_dataset(captures, devices: DeviceMap, schema: FeatureSchema, *,
                    strict: bool = False, diagnostics: Diagnostics | None = None,
                    jobs: int = 1, name: str = "") -> Dataset:
    """Build a dataset from device-originated packets across ``captures``.

    Each capture gets its own conversation tracker, so stream indices restart
    at 0 per file. Packets whose source MAC is not in ``devices`` are dropped
    and counted. An unreadable capture is reported and skipped unless
    ``strict`` is set, in which case ``ExtractError`` is raised.
    """
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    names = schema.names
    unknown = [n for n in names if n not in FULL_FIELDS]
    if unknown:
        log.warning("features with no dissector mapping will be Missing: %s", unknown)

    work = [(src, devices, names) for src in captures]
    if jobs > 1 and len(work) > 1 and all(isinstance(s, (str, Path)) for s in captures):
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_safe, work))
    else:
        results = [_extract_safe(w) for w in work]

    all_rows, all_labels = [], []
    for result, error in results:
        if error is not None:
            if strict:
                raise ExtractError(error)
            log.error("skipping capture %s", error)
            diagnostics.failed_files.append(error)
            continue
        rows, labels, diag = result
        all_rows.extend(rows)
        all_labels.extend(labels)
        diagnostics.merge(diag)

    classes = tuple(sorted(set(all_labels)))
    code = {c: i for i, c in enumerate(classes)}
    X = np.array(all_rows, dtype=np.float64).reshape(len(all_rows), len(names))
    y = np.array([code[c] for c in all_labels], dtype=np.int64)
    return Dataset(schema, X, y, classes, None, name)
