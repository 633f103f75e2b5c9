"""Paper-scale runs: J48 and Decision Table on the public IoT datasets.

Each dataset is given either as an extracted CSV or as captures plus a device
map, for example

    python scripts/reproduce.py \\
        --dataset "IoT Sentinel=data/iot_sentinel.csv" \\
        --dataset "UNSW=pcaps/unsw/*.pcap:data/unsw_devices.csv" \\
        --out results/

Both plain and stratified 80:20 splits are run. Every measured accuracy is
printed next to all cited values for that model and dataset, with the
acceptance window, and a comparison report is written to the output folder.
"""

import argparse
import glob
import json
import logging
import time
from pathlib import Path

from dfp.dataset import read_csv, read_device_map, write_csv
from dfp.evaluation import SplitSpec, comparison_report, evaluate, load_cited, split_dataset
from dfp.extract import Diagnostics, extract_dataset
from dfp.modelio import save_model
from dfp.schema import load_schema
from dfp.table import train_decision_table
from dfp.tree import train

# accuracy windows (percent) a faithful run is expected to land in
WINDOWS = {("j48", "IoT Sentinel"): (80.0, 88.0), ("j48", "UNSW"): (95.0, 99.5),
           ("dtable", "IoT Sentinel"): (85.0, 93.0), ("dtable", "UNSW"): (93.0, 99.0)}


def load(name, source, schema, jobs, out):
    if source.endswith(".csv") and ":" not in source:
        return read_csv(source, name=name)
    pattern, _, devices = source.rpartition(":")
    captures = sorted(glob.glob(pattern))
    if not captures:
        raise SystemExit(f"{name}: no captures match {pattern}")
    diag = Diagnostics()
    ds = extract_dataset(captures, read_device_map(devices), schema, diagnostics=diag,
                         jobs=jobs, name=name)
    logging.info("%s: %s", name, diag.summary())
    write_csv(ds, out / f"{slug(name)}.csv")
    return ds


def slug(text):
    return "".join(ch if ch.isalnum() else "_" for ch in text.lower()).strip("_")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", action="append", required=True,
                    help="NAME=file.csv or NAME=<capture glob>:<device map csv>")
    ap.add_argument("--schema", default="reduced22")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    schema = load_schema(args.schema)
    cited = load_cited()
    results, summary = [], []
    for spec in args.dataset:
        name, _, source = spec.partition("=")
        ds = load(name, source, schema, args.jobs, out)
        print(f"\n{name}: {len(ds)} instances, {len(ds.classes)} devices")
        for stratified in (False, True):
            train_part, test_part = split_dataset(ds, SplitSpec(0.8, args.seed, stratified))
            for kind, fit in (("j48", train), ("dtable", train_decision_table)):
                t0 = time.perf_counter()
                model = fit(train_part)
                m = evaluate(model, test_part, name)
                took = time.perf_counter() - t0
                tag = f"{slug(name)}_{kind}_{'strat' if stratified else 'plain'}"
                save_model(model, out / f"{tag}.model.json")
                (out / f"{tag}.metrics.json").write_text(m.to_json())
                acc = 100 * m.accuracy
                refs = [c for c in cited if c.model_kind == kind
                        and slug(c.dataset) in slug(name)]
                lo, hi = next((w for (k, d), w in WINDOWS.items()
                               if k == kind and slug(d) in slug(name)), (None, None))
                inside = "n/a" if lo is None else ("inside" if lo <= acc <= hi else "OUTSIDE")
                cites = ", ".join(f"{c.accuracy:g}% ({c.provenance})" for c in refs) or "none"
                print(f"  {kind:6s} {'stratified' if stratified else 'plain':10s} "
                      f"{acc:6.2f}%  window {lo}-{hi}: {inside}  cited: {cites}  [{took:.1f}s]")
                summary.append({"dataset": name, "model": kind, "stratified": stratified,
                                "accuracy": m.accuracy, "window": [lo, hi],
                                "cited": [c.accuracy for c in refs], "seconds": took})
                if not stratified:
                    results.append(m)
    report = comparison_report(results)
    (out / "report.md").write_text(report.to_markdown())
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"\nreport written to {out / 'report.md'}")


if __name__ == "__main__":
    main()
