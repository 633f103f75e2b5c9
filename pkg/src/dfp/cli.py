"""``dfp`` command line: extract -> rank -> train -> evaluate -> report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .dataset import DataFormatError, read_csv, read_device_map, write_csv
from .evaluation import (Metrics, SplitSpec, comparison_report, evaluate, load_cited,
                         load_literature, split_dataset)
from .extract import Diagnostics, ExtractError, extract_dataset
from .gain import apply_removal, rank_features, read_ranking, top_k, write_ranking
from .modelio import ModelFormatError, load_model, model_to_json
from .pcap import PcapError
from .schema import SchemaError, load_schema
from .table import SearchParams, train_decision_table
from .tree import SchemaMismatch, TreeParams, train

log = logging.getLogger("dfp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def atomic_write(path, data) -> None:
    """Write via a temp file in the target directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode("utf-8") if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _need_file(flag: str, path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{flag}: no such file: {path}")
    return p


def _default_seed() -> int:
    raw = os.environ.get("DFP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DFP_SEED must be an integer, got {raw!r}") from None


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dataset_csv(dataset) -> str:
    buf = io.StringIO()
    write_csv(dataset, buf)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dfp", description="Single-packet IoT device fingerprinting.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("-q", "--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    ex = sub.add_parser("extract", help="dissect pcap files into a labelled dataset CSV")
    ex.add_argument("--pcap", nargs="+", required=True)
    ex.add_argument("--devices", required=True, help="CSV of mac,device rows")
    ex.add_argument("--schema", default="reduced22", help="full24, reduced22 or a JSON file")
    ex.add_argument("--out", required=True)
    ex.add_argument("--diagnostics", help="also write the skip/unknown-MAC counts as JSON")
    ex.add_argument("--strict", action="store_true", help="fail on the first unreadable capture")
    ex.add_argument("--jobs", type=int, default=1)
    ex.add_argument("--name", default="")

    rk = sub.add_parser("rank", help="rank features by gain ratio")
    rk.add_argument("--data", required=True)
    rk.add_argument("--out", required=True)
    rk.add_argument("--remove", nargs="*", default=[])

    tr = sub.add_parser("train", help="split, then train j48 or dtable on the training part")
    tr.add_argument("--data", required=True)
    tr.add_argument("--classifier", choices=["j48", "dtable"], required=True)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--split", type=float, default=0.8)
    tr.add_argument("--model", required=True)
    tr.add_argument("--top-k", type=int)
    tr.add_argument("--ranking", help="ranking CSV for --top-k (default: rank the training part)")
    tr.add_argument("--remove", nargs="*", default=[])
    tr.add_argument("--no-prune", action="store_true")
    tr.add_argument("--confidence", type=float)
    tr.add_argument("--min-leaf", type=float)
    tr.add_argument("--max-depth", type=int)
    tr.add_argument("--stale-limit", type=int)
    tr.add_argument("--stratified", action="store_true")
    tr.add_argument("--test-out", help="write the held-out partition as CSV")

    ev = sub.add_parser("evaluate", help="score a model on a dataset")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--report", required=True)
    ev.add_argument("--holdout", action="store_true",
                    help="evaluate on the partition held out when the model was trained")
    ev.add_argument("--name", help="dataset name shown in reports")

    rp = sub.add_parser("report", help="comparison table of metrics and literature values")
    rp.add_argument("--metrics", nargs="+", required=True)
    rp.add_argument("--literature", help="literature CSV (default: built-in table)")
    rp.add_argument("--cited", help="cited-accuracy CSV (default: built-in)")
    rp.add_argument("--out", required=True, help=".md or .csv")
    return p


def cmd_extract(args) -> int:
    for path in args.pcap:
        _need_file("--pcap", path)
    devices = read_device_map(_need_file("--devices", args.devices))
    schema = load_schema(args.schema if args.schema in ("full24", "reduced22")
                         else _need_file("--schema", args.schema))
    diag = Diagnostics()
    dataset = extract_dataset(args.pcap, devices, schema, strict=args.strict,
                              diagnostics=diag, jobs=args.jobs, name=args.name)
    atomic_write(args.out, _dataset_csv(dataset))
    log.info("extract: %s", diag.summary())
    if args.diagnostics:
        atomic_write(args.diagnostics, json.dumps(diag.as_dict(), indent=2) + "\n")
    return EXIT_OK


def cmd_rank(args) -> int:
    data = read_csv(_need_file("--data", args.data))
    if args.remove:
        data = data.select_features(apply_removal(data.schema, args.remove).names)
    ranking = rank_features(data)
    buf = io.StringIO()
    write_ranking(ranking, buf)
    atomic_write(args.out, buf.getvalue())
    for s in ranking:
        log.info("%-32s gain_ratio=%.6f", s.feature, s.gain_ratio)
    return EXIT_OK


def cmd_train(args) -> int:
    if args.no_prune and args.confidence is not None:
        raise UsageError("--confidence conflicts with --no-prune")
    if args.classifier == "dtable":
        for flag, val in (("--no-prune", args.no_prune or None), ("--confidence", args.confidence),
                          ("--min-leaf", args.min_leaf), ("--max-depth", args.max_depth)):
            if val is not None:
                raise UsageError(f"{flag} applies to j48 only")
    elif args.stale_limit is not None:
        raise UsageError("--stale-limit applies to dtable only")
    if args.ranking and args.top_k is None:
        raise UsageError("--ranking requires --top-k")
    try:
        spec = SplitSpec(args.split, args.seed if args.seed is not None else _default_seed(),
                         args.stratified)
        if args.classifier == "j48":
            tree_params = TreeParams(
                min_leaf_weight=2.0 if args.min_leaf is None else args.min_leaf,
                confidence=0.25 if args.confidence is None else args.confidence,
                pruning=not args.no_prune, max_depth=args.max_depth)
        else:
            search = SearchParams(5 if args.stale_limit is None else args.stale_limit)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    data_path = _need_file("--data", args.data)
    data = read_csv(data_path)
    if args.remove:
        data = data.select_features(apply_removal(data.schema, args.remove).names)
    train_part, test_part = split_dataset(data, spec)
    selected = None
    if args.top_k is not None:
        ranking = (read_ranking(_need_file("--ranking", args.ranking)) if args.ranking
                   else rank_features(train_part))
        ranking = [s for s in ranking if s.feature in train_part.schema]
        selected = top_k(ranking, args.top_k)
        selected = [n for n in train_part.schema.names if n in selected]
        train_part = train_part.select_features(selected)
    meta = {
        "data_sha256": _sha256(data_path),
        "split": {"seed": spec.seed, "train_fraction": spec.train_fraction,
                  "stratified": spec.stratified},
        "removed": list(args.remove),
        "top_k": selected,
        "train_instances": len(train_part),
        "test_instances": len(test_part),
    }
    if args.classifier == "j48":
        model = train(train_part, tree_params, meta)
        log.info("j48: %d nodes", model.node_count)
    else:
        model = train_decision_table(train_part, search, meta)
        log.info("dtable: features %s, merit %.4f", list(model.selected_features), model.merit)
    atomic_write(args.model, model_to_json(model))
    if args.test_out:
        atomic_write(args.test_out, _dataset_csv(test_part))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = load_model(_need_file("--model", args.model))
    data_path = _need_file("--data", args.data)
    data = read_csv(data_path)
    if args.holdout:
        meta = model.metadata
        if "split" not in meta:
            raise UsageError("--holdout: model carries no split record")
        if meta.get("data_sha256") != _sha256(data_path):
            raise DataFormatError("--holdout: --data differs from the training data file")
        s = meta["split"]
        _, data = split_dataset(data, SplitSpec(s["train_fraction"], s["seed"], s["stratified"]))
    name = args.name if args.name is not None else Path(args.data).stem
    metrics = evaluate(model, data, name)
    atomic_write(args.report, metrics.to_json())
    log.info("evaluate: accuracy %.4f on %d instances", metrics.accuracy,
             metrics.instance_count)
    return EXIT_OK


def cmd_report(args) -> int:
    metrics = []
    for path in args.metrics:
        try:
            metrics.append(Metrics.from_dict(json.loads(_need_file("--metrics", path).read_text())))
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataFormatError(f"{path}: not a metrics document ({exc})") from None
    literature = load_literature(_need_file("--literature", args.literature)
                                 if args.literature else None)
    cited = load_cited(_need_file("--cited", args.cited) if args.cited else None)
    report = comparison_report(metrics, literature, cited)
    text = report.to_csv() if args.out.endswith(".csv") else report.to_markdown()
    atomic_write(args.out, text)
    return EXIT_OK


COMMANDS = {"extract": cmd_extract, "rank": cmd_rank, "train": cmd_train,
            "evaluate": cmd_evaluate, "report": cmd_report}

DATA_ERRORS = (DataFormatError, PcapError, SchemaError, ModelFormatError, SchemaMismatch,
               ExtractError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
    except UsageError as exc:
        print(f"dfp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING if args.quiet else (logging.DEBUG if args.verbose > 1 else logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dfp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"dfp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"dfp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"dfp: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
