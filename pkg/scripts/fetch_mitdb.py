#!/usr/bin/env python3
"""Download PhysioNet record sets used by the benchmarks.

Needs internet access; run it on a networked machine and copy the
directory into the sandbox if necessary. The benchmark tests look in
data/mitdb and data/cdb by default (override with ECGZ_MITDB_DIR and
ECGZ_CDB_DIR).

    python3 scripts/fetch_mitdb.py                     # arrhythmia set -> data/mitdb
    python3 scripts/fetch_mitdb.py --database cdb      # compression test set -> data/cdb
"""

import argparse
import sys
import urllib.request
from pathlib import Path

BASES = {
    "mitdb": "https://physionet.org/files/mitdb/1.0.0",
    "cdb": "https://physionet.org/files/cdb/1.0.0",
}


def fetch(url: str, dest: Path) -> bool:
    if dest.is_file() and dest.stat().st_size > 0:
        return False
    dest.parent.mkdir(parents=True, exist_ok=True)
    tmp = dest.with_suffix(dest.suffix + ".part")
    with urllib.request.urlopen(url) as response, open(tmp, "wb") as fh:
        while chunk := response.read(1 << 16):
            fh.write(chunk)
    tmp.rename(dest)
    return True


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--database", choices=sorted(BASES), default="mitdb")
    parser.add_argument("--dest", help="target directory (default: data/<database>)")
    args = parser.parse_args(argv)

    base = BASES[args.database]
    dest = Path(args.dest) if args.dest else Path("data") / args.database
    dest.mkdir(parents=True, exist_ok=True)

    with urllib.request.urlopen(f"{base}/RECORDS") as response:
        records = response.read().decode().split()
    print(f"{args.database}: {len(records)} records -> {dest}")
    for i, rec in enumerate(records, 1):
        downloaded = False
        for ext in (".hea", ".dat"):
            downloaded |= fetch(f"{base}/{rec}{ext}", dest / f"{rec}{ext}")
        status = "fetched" if downloaded else "cached"
        print(f"  [{i}/{len(records)}] {rec} {status}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
