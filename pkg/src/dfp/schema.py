"""Packet-header feature definitions and the built-in fingerprint schemas."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

LAYER_OF = {
    "HTTP": "Application",
    "UDP": "Transport",
    "TCP": "Transport",
    "IP": "Network",
}

# Header fields in published table order. ip.dsfield.dscp appears twice in the
# source table; the duplicate is dropped here, leaving 21 distinct names.
_TABLE_ROWS = [
    ("http.request_number", "HTTP"),
    ("http.prev_request_in", "HTTP"),
    ("udp.srcport", "UDP"),
    ("udp.stream", "UDP"),
    ("udp.length", "UDP"),
    ("udp.dstport", "UDP"),
    ("udp.checksum", "UDP"),
    ("tcp.srcport", "TCP"),
    ("tcp.stream", "TCP"),
    ("tcp.dstport", "TCP"),
    ("tcp.window_size", "TCP"),
    ("tcp.ack", "TCP"),
    ("tcp.window_size_scalefactor", "TCP"),
    ("tcp.window_size_value", "TCP"),
    ("ip.len", "IP"),
    ("ip.dsfield.dscp", "IP"),
    ("ip.hdr_len", "IP"),
    ("ip.dsfield", "IP"),
    ("ip.id", "IP"),
    ("ip.ttl", "IP"),
    ("ip.proto", "IP"),
    ("ip.dsfield.dscp", "IP"),
]

TIMESTAMP_FEATURES = ("tcp.options.timestamp.tsval", "tcp.options.timestamp.tsecr")

# Inclusive (low, high) bounds for every built-in feature.
FIELD_DOMAINS = {
    "http.request_number": (1, 2**32 - 1),
    "http.prev_request_in": (1, 2**32 - 1),
    "udp.srcport": (0, 65535),
    "udp.stream": (0, 2**63 - 1),
    "udp.length": (0, 65535),
    "udp.dstport": (0, 65535),
    "udp.checksum": (0, 65535),
    "tcp.srcport": (0, 65535),
    "tcp.stream": (0, 2**63 - 1),
    "tcp.dstport": (0, 65535),
    "tcp.window_size": (0, 65535 << 14),
    "tcp.ack": (0, 2**32 - 1),
    "tcp.window_size_scalefactor": (-2, 1 << 14),
    "tcp.window_size_value": (0, 65535),
    "ip.len": (0, 65535),
    "ip.dsfield.dscp": (0, 63),
    "ip.hdr_len": (20, 60),
    "ip.dsfield": (0, 255),
    "ip.id": (0, 65535),
    "ip.ttl": (0, 255),
    "ip.proto": (0, 255),
    "tcp.options.timestamp.tsval": (0, 2**32 - 1),
    "tcp.options.timestamp.tsecr": (0, 2**32 - 1),
}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureDef:
    name: str
    protocol: str
    osi_layer: str
    kind: str = "numeric"

    def __post_init__(self):
        if not self.name:
            raise SchemaError("feature name must be non-empty")
        if self.protocol not in LAYER_OF:
            raise SchemaError(f"{self.name}: unknown protocol {self.protocol!r}")
        if LAYER_OF[self.protocol] != self.osi_layer:
            raise SchemaError(
                f"{self.name}: protocol {self.protocol} belongs to layer "
                f"{LAYER_OF[self.protocol]}, not {self.osi_layer}"
            )
        if self.kind != "numeric":
            raise SchemaError(f"{self.name}: only numeric features are supported")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        seen = set()
        for f in self.features:
            if f.name in seen:
                raise SchemaError(f"duplicate feature name {f.name!r}")
            seen.add(f.name)

    @classmethod
    def from_names(cls, names) -> FeatureSchema:
        """Build a schema from bare names, inferring protocol from the prefix.

        Names without a recognised ``http.``/``udp.``/``tcp.``/``ip.`` prefix are
        filed under IP; the protocol only matters for display.
        """
        feats = []
        for name in names:
            proto = name.split(".", 1)[0].upper()
            if proto not in LAYER_OF:
                proto = "IP"
            feats.append(FeatureDef(name, proto, LAYER_OF[proto]))
        return cls(tuple(feats))

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def __contains__(self, name):
        return any(f.name == name for f in self.features)

    def fingerprint(self) -> str:
        """Stable hash of the ordered feature names."""
        return hashlib.sha256("\n".join(self.names).encode()).hexdigest()[:16]

    def to_json(self) -> str:
        rows = [
            {"name": f.name, "protocol": f.protocol, "osi_layer": f.osi_layer}
            for f in self.features
        ]
        return json.dumps(rows, indent=2) + "\n"


def canonical_schema(mode: str = "reduced22") -> FeatureSchema:
    """Return the built-in schema.

    ``reduced22`` holds the distinct table names in table order; ``full24``
    appends the two TCP timestamp-option fields that the fingerprint drops.
    """
    if mode not in ("reduced22", "full24"):
        raise SchemaError(f"unknown built-in schema {mode!r}")
    feats = []
    seen = set()
    for name, proto in _TABLE_ROWS:
        if name in seen:
            continue
        seen.add(name)
        feats.append(FeatureDef(name, proto, LAYER_OF[proto]))
    if mode == "full24":
        feats.extend(FeatureDef(n, "TCP", "Transport") for n in TIMESTAMP_FEATURES)
    return FeatureSchema(tuple(feats))


def load_schema(spec: str | Path) -> FeatureSchema:
    """Resolve a built-in schema name or read a JSON schema file."""
    if str(spec) in ("reduced22", "full24"):
        return canonical_schema(str(spec))
    try:
        rows = json.loads(Path(spec).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{spec}: invalid JSON ({exc})") from exc
    if not isinstance(rows, list):
        raise SchemaError(f"{spec}: expected a JSON array of feature objects")
    feats = []
    for i, row in enumerate(rows):
        try:
            feats.append(FeatureDef(row["name"], row["protocol"], row["osi_layer"]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{spec}: entry {i} lacks field {exc}") from exc
    return FeatureSchema(tuple(feats))


def value_in_domain(name: str, value) -> bool:
    """True if ``value`` is Missing or inside the known bounds for ``name``."""
    if value is None:
        return True
    lo, hi = FIELD_DOMAINS.get(name, (None, None))
    if lo is None:
        return True
    return lo <= value <= hi
