"""Single-packet IoT device fingerprinting: header dissection, gain-ratio
feature ranking, C4.5 and Decision Table classifiers, hold-out evaluation."""

from .dataset import Dataset, DeviceMap, LabeledInstance, read_csv, write_csv
from .gain import apply_removal, entropy, gain_ratio, rank_features
from .schema import FeatureDef, FeatureSchema, canonical_schema
from .table import SearchParams, train_decision_table
from .tree import TreeParams, train

__version__ = "0.1.0"
