#!/usr/bin/env python3
"""Compression-ratio and prediction-error benchmarks over a record directory.

Prints both tables and writes bcr_report.csv and predictor_report.csv
to the output directory.

    python3 scripts/run_benchmarks.py data/mitdb
    python3 scripts/run_benchmarks.py data/cdb --out-dir out/cdb
"""

import argparse
import sys
from pathlib import Path

from ecgz import bench, ingest
from ecgz.encoder import EncoderConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data_dir", help="directory holding .hea/.dat record pairs")
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--resync-seconds", type=float, default=4.0)
    parser.add_argument("--orig-bits", type=int, default=12,
                        help="source sample width used in the ratio (default 12)")
    args = parser.parse_args(argv)

    paths = bench.discover_records(args.data_dir)
    if not paths:
        print(f"no records found in {args.data_dir}; run scripts/fetch_mitdb.py first",
              file=sys.stderr)
        return 1

    rate = ingest.parse_wfdb_header(paths[0].with_suffix(".hea").read_text()).sampling_frequency
    cfg = EncoderConfig(resync_interval_samples=int(round(args.resync_seconds * rate)))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    report = bench.run_database_eval(paths, cfg, orig_bits=args.orig_bits)
    report.to_csv(out / "bcr_report.csv")
    print(report.format_table())
    print()
    print(f"packer avg {report.average_bcr():.3f} (max {report.max_bcr():.3f})  "
          f"selective avg {report.best_selective_bcr():.3f} at m={report.best_m()}  "
          f"ideal avg {report.average_ideal_bcr():.3f}")

    pred = bench.predictor_comparison(paths)
    pred.to_csv(out / "predictor_report.csv")
    print()
    print(pred.format_table())
    print()
    print(f"lowest average error at order {pred.argmin_mape_order()} (mape), "
          f"order {pred.argmin_rmspe_order()} (rmspe)")

    for miss in report.missing:
        print(f"skipped: {miss}", file=sys.stderr)
    print(f"\nwrote {out / 'bcr_report.csv'} and {out / 'predictor_report.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
