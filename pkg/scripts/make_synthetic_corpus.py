"""Write a synthetic multi-device capture and its MAC -> device map.

    python scripts/make_synthetic_corpus.py --out-dir corpus --devices 5 --sessions 20
"""

import argparse
from pathlib import Path

from dfp.dataset import write_device_map
from dfp.synth import write_synthetic_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="corpus")
    ap.add_argument("--devices", type=int, default=5)
    ap.add_argument("--sessions", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    devices = write_synthetic_corpus(out / "synthetic.pcap", args.devices, args.sessions,
                                     args.seed)
    write_device_map(devices, out / "devices.csv")
    print(f"wrote {out / 'synthetic.pcap'} and {out / 'devices.csv'} "
          f"({len(devices.devices)} devices)")


if __name__ == "__main__":
    main()
