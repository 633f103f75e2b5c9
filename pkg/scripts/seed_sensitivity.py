"""Hold-out accuracy across split seeds, with the spread reported.

By default runs on a synthetic corpus with a fraction of labels shuffled so
the accuracies are not all 1.0; pass --data to use an extracted dataset CSV.

    python scripts/seed_sensitivity.py --seeds 10 --noise 0.1
    python scripts/seed_sensitivity.py --data iot_sentinel.csv --stratified
"""

import argparse
import tempfile
from pathlib import Path

import numpy as np

from dfp.dataset import Dataset, read_csv
from dfp.evaluation import SplitSpec, seed_sweep
from dfp.extract import extract_dataset
from dfp.schema import canonical_schema
from dfp.synth import write_synthetic_corpus
from dfp.table import train_decision_table
from dfp.tree import train


def synthetic(noise, seed):
    with tempfile.TemporaryDirectory() as tmp:
        pcap = Path(tmp) / "s.pcap"
        devices = write_synthetic_corpus(pcap, n_devices=8, sessions=30, seed=seed)
        ds = extract_dataset([pcap], devices, canonical_schema("reduced22"), name="synthetic")
    if noise > 0:
        rng = np.random.default_rng(seed)
        y = ds.y.copy()
        flip = rng.random(len(y)) < noise
        y[flip] = rng.integers(0, len(ds.classes), flip.sum())
        ds = Dataset(ds.schema, ds.X, y, ds.classes, ds.weights, ds.name)
    return ds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", help="dataset CSV (default: synthetic corpus)")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--noise", type=float, default=0.1, help="label noise for synthetic data")
    ap.add_argument("--split", type=float, default=0.8)
    ap.add_argument("--stratified", action="store_true")
    args = ap.parse_args()

    ds = read_csv(args.data) if args.data else synthetic(args.noise, 0)
    spec = SplitSpec(args.split, 0, args.stratified)
    print(f"{len(ds)} instances, {len(ds.classes)} classes, {len(ds.schema)} features, "
          f"seeds 0..{args.seeds - 1}, stratified={args.stratified}")
    for kind, fit in (("j48", train), ("dtable", train_decision_table)):
        accs, mean, std = seed_sweep(ds, fit, range(args.seeds), spec)
        cells = " ".join(f"{100 * a:.2f}" for a in accs)
        print(f"{kind:7s} mean {100 * mean:.2f}%  std {100 * std:.2f} pp  "
              f"min {100 * min(accs):.2f}  max {100 * max(accs):.2f}  [{cells}]")


if __name__ == "__main__":
    main()
