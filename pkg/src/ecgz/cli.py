"""Command line front end.

Subcommands: compress, decompress, verify, bench, predict-eval,
simulate-loss. Inputs are integer CSV (one row per time step, one column
per channel) or WFDB format-212 records; outputs are .ecgz containers
and CSV reports.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, container, decoder, encoder, ingest
from .errors import EcgzError

DOWNLOAD_HELP = """\
No records found. The benchmark records are two-lead Holter archives
published on PhysioNet; fetch them on a networked machine with:

    python3 scripts/fetch_mitdb.py --dest data/mitdb
    python3 scripts/fetch_mitdb.py --database cdb --dest data/cdb   (optional)

or download any mirror of the 48-record arrhythmia set (*.hea/*.dat,
format 212) and point --data or ECGZ_MITDB_DIR at the directory.
"""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ecgz", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_codec_flags(sp, rate_default=512.0):
        sp.add_argument("--format", choices=("csv", "wfdb"), default=None, help="input format (default: by suffix)")
        sp.add_argument("--channels", type=int, default=None, help="expected channel count for CSV input")
        sp.add_argument("--rate", type=float, default=rate_default, help="sample rate in Hz for CSV input")
        sp.add_argument("--resync-seconds", type=float, default=4.0, help="resync spacing in seconds (0 disables)")
        sp.add_argument("--resync-samples", type=int, default=None, help="resync spacing in samples, overrides --resync-seconds")
        sp.add_argument("--order", type=int, default=2, choices=(1, 2, 3, 4), help="predictor order")

    sp = sub.add_parser("compress", help="pack a recording into a .ecgz container")
    sp.add_argument("input", type=Path)
    sp.add_argument("output", type=Path)
    add_codec_flags(sp)
    sp.add_argument("--orig-bits", type=int, default=12, help="raw bits per sample for the ratio summary")
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help="expand a .ecgz container to CSV")
    sp.add_argument("input", type=Path)
    sp.add_argument("output", type=Path)
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("verify", help="check a .ecgz container against its source recording")
    sp.add_argument("original", type=Path)
    sp.add_argument("compressed", type=Path)
    sp.add_argument("--format", choices=("csv", "wfdb"), default=None)
    sp.add_argument("--channels", type=int, default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="compression-ratio table over a record directory")
    sp.add_argument("--data", type=Path, default=Path("data/mitdb"), help="directory of .hea/.dat records")
    sp.add_argument("--records", default=None, help="comma-separated record names (default: all)")
    sp.add_argument("--orig-bits", type=int, default=12, choices=(11, 12))
    sp.add_argument("--m", default="8,16,32,64", help="comma-separated codebook sizes for the selective estimator")
    sp.add_argument("--resync-seconds", type=float, default=4.0)
    sp.add_argument("--resync-samples", type=int, default=None)
    sp.add_argument("--order", type=int, default=2, choices=(1, 2, 3, 4))
    sp.add_argument("--out-dir", type=Path, default=None, help="also write CSV reports here")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("predict-eval", help="prediction-error table per predictor order")
    sp.add_argument("--data", type=Path, default=Path("data/mitdb"))
    sp.add_argument("--records", default=None)
    sp.add_argument("--out-dir", type=Path, default=None)
    sp.set_defaults(func=cmd_predict_eval)

    sp = sub.add_parser("simulate-loss", help="drop wire units and audit the recovery")
    sp.add_argument("record", nargs="?", default="synthetic", help="record prefix, CSV file, or 'synthetic'")
    sp.add_argument("--loss-mode", choices=("none", "single", "random", "burst"), default="single")
    sp.add_argument("--loss-prob", type=float, default=0.001, help="per-unit drop probability for random mode")
    sp.add_argument("--burst-length", type=int, default=2)
    sp.add_argument("--unit-index", type=int, default=None, help="fix the dropped unit instead of a seeded choice")
    sp.add_argument("--runs", type=int, default=1, help="number of seeded simulations")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rate", type=float, default=360.0, help="sample rate for synthetic input")
    sp.add_argument("--duration", type=float, default=30.0, help="synthetic input length in seconds")
    sp.add_argument("--resync-seconds", type=float, default=4.0)
    sp.add_argument("--resync-samples", type=int, default=None)
    sp.add_argument("--order", type=int, default=2, choices=(1, 2, 3, 4))
    sp.add_argument("--out", type=Path, default=None, help="write a CSV of per-run results")
    sp.set_defaults(func=cmd_simulate_loss)
    return p


def _resync_samples(args, rate: float) -> int:
    if args.resync_samples is not None:
        if args.resync_samples < 0:
            raise ValueError("resync spacing cannot be negative")
        return args.resync_samples
    if args.resync_seconds < 0:
        raise ValueError("resync spacing cannot be negative")
    return int(round(args.resync_seconds * rate))


def _detect_format(path: Path, flag) -> str:
    if flag:
        return flag
    return "csv" if path.suffix.lower() == ".csv" else "wfdb"


def _load_input(path: Path, fmt: str, channels_flag, rate: float):
    """Returns (channels as lists, sample_rate)."""
    if fmt == "csv":
        chans = ingest.read_csv(path.read_text(), channels_flag)
        return chans, rate
    record, arrays = ingest.load_record(path)
    if channels_flag is not None and channels_flag != len(arrays):
        raise ValueError(f"record has {len(arrays)} channels, --channels says {channels_flag}")
    return [a.tolist() for a in arrays], record.sampling_frequency


def cmd_compress(args) -> int:
    fmt = _detect_format(args.input, args.format)
    channels, rate = _load_input(args.input, fmt, args.channels, args.rate)
    if not channels:
        raise ValueError("input has no channels")
    if len(channels) > encoder.MAX_CHANNELS:
        raise ValueError(f"input has {len(channels)} channels; at most {encoder.MAX_CHANNELS} supported")
    cfg = encoder.EncoderConfig(
        resync_interval_samples=_resync_samples(args, rate),
        channel_count=len(channels),
        order=args.order,
    )
    result = encoder.encode_channels(channels, cfg)
    meta = container.RecordMeta(
        channel_count=len(channels),
        sample_rate_hz=int(round(rate)),
        resync_interval_samples=cfg.resync_interval_samples,
        predictor_order=cfg.order,
        sample_counts=tuple(len(c) for c in channels),
    )
    args.output.write_bytes(container.write_ecgz(meta, result.channel_frames))
    n = sum(len(c) for c in channels)
    frames = sum(len(f) for f in result.channel_frames)
    ratio = bench.bcr(n, args.orig_bits, 16 * frames) if frames else float("nan")
    print(f"{args.input}: {n} samples in {len(channels)} channel(s), {frames} frames, bcr {ratio:.3f}")
    return 0


def cmd_decompress(args) -> int:
    meta, channel_frames = container.read_ecgz(args.input.read_bytes())
    channels = [
        decoder.decode_channel(frames, count, meta.predictor_order)
        for frames, count in zip(channel_frames, meta.sample_counts)
    ]
    with open(args.output, "w") as fh:
        for row in zip(*channels) if channels else []:
            fh.write(",".join(str(v) for v in row) + "\n")
    print(f"{args.input}: restored {sum(meta.sample_counts)} samples to {args.output}")
    return 0


def cmd_verify(args) -> int:
    fmt = _detect_format(args.original, args.format)
    channels, _ = _load_input(args.original, fmt, args.channels, 0.0)
    meta, channel_frames = container.read_ecgz(args.compressed.read_bytes())
    if len(channels) != meta.channel_count:
        print(f"channel count differs: source {len(channels)}, container {meta.channel_count}")
        return 1
    for ch, samples in enumerate(channels):
        if meta.sample_counts[ch] != len(samples):
            print(f"channel {ch}: length differs, source {len(samples)}, container {meta.sample_counts[ch]}")
            return 1
        decoded = decoder.decode_channel(channel_frames[ch], meta.sample_counts[ch], meta.predictor_order)
        for i, (a, b) in enumerate(zip(samples, decoded)):
            if a != b:
                print(f"channel {ch}: mismatch at sample index {i} ({a} != {b})")
                return 1
    print(f"{args.compressed}: matches {args.original} exactly")
    return 0


def _select_records(args) -> list[Path]:
    paths = bench.discover_records(args.data)
    if args.records:
        wanted = {r.strip() for r in args.records.split(",") if r.strip()}
        paths = [p for p in paths if p.name in wanted]
    return paths


def cmd_bench(args) -> int:
    paths = _select_records(args)
    if not paths:
        print(DOWNLOAD_HELP, file=sys.stderr)
        print("no records evaluated")
        return 0
    rate = ingest.parse_wfdb_header((paths[0].with_suffix(".hea")).read_text()).sampling_frequency
    cfg = encoder.EncoderConfig(resync_interval_samples=_resync_samples(args, rate), order=args.order)
    m_values = tuple(int(v) for v in args.m.split(","))
    report = bench.run_database_eval(paths, cfg, orig_bits=args.orig_bits, m_values=m_values)
    print(report.format_table())
    for line in report.missing:
        print(f"skipped: {line}", file=sys.stderr)
    if report.rows:
        print(
            f"\npacker avg {report.average_bcr():.3f} (max {report.max_bcr():.3f})  "
            f"selective avg {report.best_selective_bcr():.3f} at m={report.best_m()}  "
            f"ideal avg {report.average_ideal_bcr():.3f}"
        )
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        report.to_csv(args.out_dir / "bcr_report.csv")
        print(f"wrote {args.out_dir / 'bcr_report.csv'}")
    return 0


def cmd_predict_eval(args) -> int:
    paths = _select_records(args)
    if not paths:
        print(DOWNLOAD_HELP, file=sys.stderr)
        print("no records evaluated")
        return 0
    report = bench.predictor_comparison(paths)
    print(report.format_table())
    for line in report.missing:
        print(f"skipped: {line}", file=sys.stderr)
    if report.rows:
        print(
            f"\nlowest average error at order {report.argmin_mape_order()} (mape), "
            f"order {report.argmin_rmspe_order()} (rmspe)"
        )
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        report.to_csv(args.out_dir / "predictor_report.csv")
        print(f"wrote {args.out_dir / 'predictor_report.csv'}")
    return 0


def cmd_simulate_loss(args) -> int:
    if args.record == "synthetic":
        n = int(round(args.duration * args.rate))
        channels = [bench.synthetic_ecg(n, args.rate, seed=args.seed).tolist()]
        rate = args.rate
    elif args.record.endswith(".csv"):
        channels = ingest.read_csv(Path(args.record).read_text())
        rate = args.rate
    else:
        _, arrays = ingest.load_record(args.record)
        channels = [a.tolist() for a in arrays]
        rate = ingest.parse_wfdb_header(Path(args.record).with_suffix(".hea").read_text()).sampling_frequency
    interval = _resync_samples(args, rate)
    cfg = encoder.EncoderConfig(
        resync_interval_samples=interval,
        channel_count=len(channels),
        order=args.order,
    )
    pattern = bench.LossPattern(
        mode=args.loss_mode,
        drop_probability=args.loss_prob,
        burst_length=args.burst_length,
        unit_index=args.unit_index,
    )
    bound = interval + 6 if interval and args.loss_mode == "single" else None
    harness = bench.LossHarness(channels, cfg)
    rows = []
    worst = 0
    for run in range(args.runs):
        report = harness.run(pattern, seed=args.seed + run, span_bound=bound)
        worst = max(worst, report.max_span)
        rows.append(report)
        status = "ok" if report.known_samples_exact and report.bound_ok else "FAIL"
        print(
            f"seed {report.seed}: dropped {len(report.dropped_units)} unit(s), "
            f"corrupted {report.corrupted_samples}/{report.total_samples} samples "
            f"({100 * report.corrupted_fraction:.3f}%), max span {report.max_span}, {status}"
        )
    if args.runs > 1:
        print(f"worst span over {args.runs} runs: {worst}" + (f" (bound {bound})" if bound else ""))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            import csv as _csv

            w = _csv.writer(fh)
            w.writerow(["seed", "dropped_units", "corrupted", "total", "max_span", "exact"])
            for r in rows:
                w.writerow(
                    [r.seed, len(r.dropped_units), r.corrupted_samples, r.total_samples, r.max_span, r.known_samples_exact]
                )
        print(f"wrote {args.out}")
    ok = all(r.known_samples_exact and r.bound_ok for r in rows)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 2
    except (EcgzError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
