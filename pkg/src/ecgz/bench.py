"""Benchmark harness: compression ratios, predictor sweeps, loss recovery.

Ratios always compare against the raw storage cost of the original
samples (orig_bits per sample, 12 by default) and charge the codec 16
bits per emitted frame, nothing for container headers. Entropy-coding
estimators from the baselines module ride along so every record row
shows the packer between its selective and ideal reference points.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import baselines, container, decoder, encoder, ingest, predictor
from .errors import WfdbParseError

DEFAULT_M_VALUES = (8, 16, 32, 64)
ORIG_BITS_DEFAULT = 12


def bcr(n_samples: int, orig_bits: int, compressed_bits: int) -> float:
    """Bit compression ratio: original bits over compressed bits."""
    if n_samples < 0 or orig_bits < 1:
        raise ValueError("need a non-negative sample count and positive original width")
    if compressed_bits <= 0:
        raise ValueError("compressed size must be positive")
    return n_samples * orig_bits / compressed_bits


def discover_records(directory: str | Path) -> list[Path]:
    """Record prefixes (paths without extension) for every .hea in a directory."""
    d = Path(directory)
    if not d.is_dir():
        return []
    return sorted(p.with_suffix("") for p in d.glob("*.hea"))


# ---------------------------------------------------------------------------
# Compression-ratio evaluation


@dataclass
class ChannelRow:
    record: str
    channel: int
    n_samples: int
    frame_count: int
    compressed_bits: int
    bcr: float
    ideal_bits: int
    ideal_bcr: float
    selective_bits: dict[int, int]
    selective_bcr: dict[int, float]


@dataclass
class RecordRow:
    """Per-record aggregate: channels pooled by total bits."""

    record: str
    n_samples: int
    compressed_bits: int
    bcr: float
    ideal_bcr: float
    selective_bcr: dict[int, float]


@dataclass
class DatabaseReport:
    rows: list[ChannelRow]
    missing: list[str]
    orig_bits: int
    m_values: tuple[int, ...]
    config: encoder.EncoderConfig

    def record_rows(self) -> list[RecordRow]:
        grouped: dict[str, list[ChannelRow]] = {}
        for row in self.rows:
            grouped.setdefault(row.record, []).append(row)
        out = []
        for name, rows in grouped.items():
            n = sum(r.n_samples for r in rows)
            raw = n * self.orig_bits
            packed = sum(r.compressed_bits for r in rows)
            ideal = sum(r.ideal_bits for r in rows)
            sel = {
                m: raw / sum(r.selective_bits[m] for r in rows) for m in self.m_values
            }
            out.append(RecordRow(name, n, packed, raw / packed, raw / ideal, sel))
        return out

    def average_bcr(self) -> float:
        rows = self.record_rows()
        return sum(r.bcr for r in rows) / len(rows)

    def max_bcr(self) -> float:
        return max(r.bcr for r in self.record_rows())

    def min_bcr(self) -> float:
        return min(r.bcr for r in self.record_rows())

    def average_ideal_bcr(self) -> float:
        rows = self.record_rows()
        return sum(r.ideal_bcr for r in rows) / len(rows)

    def max_ideal_bcr(self) -> float:
        return max(r.ideal_bcr for r in self.record_rows())

    def average_selective_bcr(self, m: int) -> float:
        rows = self.record_rows()
        return sum(r.selective_bcr[m] for r in rows) / len(rows)

    def best_m(self) -> int:
        return max(self.m_values, key=self.average_selective_bcr)

    def best_selective_bcr(self) -> float:
        return self.average_selective_bcr(self.best_m())

    def max_selective_bcr(self, m: int | None = None) -> float:
        m = self.best_m() if m is None else m
        return max(r.selective_bcr[m] for r in self.record_rows())

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["record", "channel", "samples", "frames", "bits", "bcr", "ideal_bcr"]
            head += [f"selective_bcr_m{m}" for m in self.m_values]
            w.writerow(head)
            for r in self.rows:
                w.writerow(
                    [r.record, r.channel, r.n_samples, r.frame_count, r.compressed_bits]
                    + [f"{r.bcr:.4f}", f"{r.ideal_bcr:.4f}"]
                    + [f"{r.selective_bcr[m]:.4f}" for m in self.m_values]
                )

    def format_table(self) -> str:
        rows = self.record_rows()
        if not rows:
            return "no records evaluated"
        lines = [_format_row(["record", "samples", "packer", "selective(best m)", "ideal"])]
        best = self.best_m()
        for r in sorted(rows, key=lambda r: r.record):
            lines.append(
                _format_row(
                    [r.record, r.n_samples, f"{r.bcr:.3f}", f"{r.selective_bcr[best]:.3f}", f"{r.ideal_bcr:.3f}"]
                )
            )
        lines.append(
            _format_row(
                [
                    "average",
                    sum(r.n_samples for r in rows),
                    f"{self.average_bcr():.3f}",
                    f"{self.best_selective_bcr():.3f}",
                    f"{self.average_ideal_bcr():.3f}",
                ]
            )
        )
        return "\n".join(lines)


def _format_row(cells: Sequence[object]) -> str:
    return "  ".join(f"{str(c):>12}" for c in cells)


def evaluate_channels(
    record_name: str,
    channels: Sequence[Sequence[int]],
    config: encoder.EncoderConfig,
    orig_bits: int = ORIG_BITS_DEFAULT,
    m_values: Sequence[int] = DEFAULT_M_VALUES,
) -> list[ChannelRow]:
    """Score one record's channels; also cross-checks the serialized size."""
    result = encoder.encode_channels(channels, config)
    meta = container.RecordMeta(
        channel_count=len(channels),
        sample_rate_hz=0,
        resync_interval_samples=config.resync_interval_samples,
        predictor_order=config.order,
        sample_counts=tuple(len(c) for c in channels),
    )
    blob = container.write_ecgz(meta, result.channel_frames)
    header_len = 13 + 8 * len(channels)
    payload_bits = 8 * (len(blob) - header_len)
    total_frames = sum(len(f) for f in result.channel_frames)
    if payload_bits != 16 * total_frames:
        raise AssertionError("serialized payload disagrees with 16 bits per frame")

    rows = []
    for ch, samples in enumerate(channels):
        words = result.channel_frames[ch]
        bits = 16 * len(words)
        raw = len(samples) * orig_bits
        errors = predictor.residuals(samples, config.order)
        hist = baselines.build_histogram(errors.tolist())
        ideal = baselines.ideal_huffman_bits_from_hist(hist)
        sel = {m: baselines.selective_huffman_bits_from_hist(hist, m) for m in m_values}
        rows.append(
            ChannelRow(
                record=record_name,
                channel=ch,
                n_samples=len(samples),
                frame_count=len(words),
                compressed_bits=bits,
                bcr=raw / bits,
                ideal_bits=ideal,
                ideal_bcr=raw / ideal,
                selective_bits=sel,
                selective_bcr={m: raw / b for m, b in sel.items()},
            )
        )
    return rows


def run_database_eval(
    record_paths: Sequence[str | Path],
    config: encoder.EncoderConfig | None = None,
    orig_bits: int = ORIG_BITS_DEFAULT,
    m_values: Sequence[int] = DEFAULT_M_VALUES,
) -> DatabaseReport:
    """Compress every record and tabulate packer and estimator ratios.

    Records that cannot be read are listed in .missing rather than
    aborting the run. The resync interval comes from the config; pass
    one scaled to the records' sampling rate.
    """
    cfg = config or encoder.EncoderConfig()
    rows: list[ChannelRow] = []
    missing: list[str] = []
    for path in record_paths:
        try:
            record, channels = ingest.load_record(path)
        except (OSError, WfdbParseError) as exc:
            missing.append(f"{path}: {exc}")
            continue
        ch_cfg = encoder.EncoderConfig(
            resync_interval_samples=cfg.resync_interval_samples,
            channel_count=min(len(channels), encoder.MAX_CHANNELS),
            order=cfg.order,
            resync_e_frames=cfg.resync_e_frames,
        )
        use = channels[: encoder.MAX_CHANNELS]
        rows.extend(
            evaluate_channels(record.name, [c.tolist() for c in use], ch_cfg, orig_bits, m_values)
        )
    return DatabaseReport(rows, missing, orig_bits, tuple(m_values), cfg)


# ---------------------------------------------------------------------------
# Predictor comparison


@dataclass
class PredictorRow:
    record: str
    channel: int
    mape: dict[int, float]
    rmspe: dict[int, float]


@dataclass
class PredictorReport:
    rows: list[PredictorRow]
    missing: list[str]
    orders: tuple[int, ...]

    def record_values(self, record: str, channel: int = 0) -> PredictorRow:
        for row in self.rows:
            if row.record == record and row.channel == channel:
                return row
        raise KeyError(f"record {record} channel {channel} not in report")

    def average_mape(self, order: int, channel: int | None = 0) -> float:
        rows = [r for r in self.rows if channel is None or r.channel == channel]
        return sum(r.mape[order] for r in rows) / len(rows)

    def average_rmspe(self, order: int, channel: int | None = 0) -> float:
        rows = [r for r in self.rows if channel is None or r.channel == channel]
        return sum(r.rmspe[order] for r in rows) / len(rows)

    def argmin_mape_order(self, channel: int | None = 0) -> int:
        return min(self.orders, key=lambda o: self.average_mape(o, channel))

    def argmin_rmspe_order(self, channel: int | None = 0) -> int:
        return min(self.orders, key=lambda o: self.average_rmspe(o, channel))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["record", "channel"]
            head += [f"mape_{o}" for o in self.orders] + [f"rmspe_{o}" for o in self.orders]
            w.writerow(head)
            for r in self.rows:
                w.writerow(
                    [r.record, r.channel]
                    + [f"{r.mape[o]:.4f}" for o in self.orders]
                    + [f"{r.rmspe[o]:.4f}" for o in self.orders]
                )

    def format_table(self) -> str:
        if not self.rows:
            return "no records evaluated"
        lines = [
            _format_row(
                ["record", "ch"]
                + [f"mape o{o}" for o in self.orders]
                + [f"rmspe o{o}" for o in self.orders]
            )
        ]
        for r in sorted(self.rows, key=lambda r: (r.record, r.channel)):
            lines.append(
                _format_row(
                    [r.record, r.channel]
                    + [f"{r.mape[o]:.3f}" for o in self.orders]
                    + [f"{r.rmspe[o]:.3f}" for o in self.orders]
                )
            )
        lines.append(
            _format_row(
                ["average(ch0)", ""]
                + [f"{self.average_mape(o):.3f}" for o in self.orders]
                + [f"{self.average_rmspe(o):.3f}" for o in self.orders]
            )
        )
        return "\n".join(lines)


def predictor_comparison(
    record_paths: Sequence[str | Path], orders: Sequence[int] = (1, 2, 3, 4)
) -> PredictorReport:
    """Score every record and channel under each predictor order."""
    rows: list[PredictorRow] = []
    missing: list[str] = []
    for path in record_paths:
        try:
            record, channels = ingest.load_record(path)
        except (OSError, WfdbParseError) as exc:
            missing.append(f"{path}: {exc}")
            continue
        for ch, samples in enumerate(channels):
            rows.append(
                PredictorRow(
                    record=record.name,
                    channel=ch,
                    mape={o: predictor.mape(samples, o) for o in orders},
                    rmspe={o: predictor.rmspe(samples, o) for o in orders},
                )
            )
    return PredictorReport(rows, missing, tuple(orders))


# ---------------------------------------------------------------------------
# Loss simulation


@dataclass(frozen=True)
class LossPattern:
    """Which wire units to drop.

    mode "single" drops one unit (unit_index, or seeded choice), "burst"
    drops burst_length consecutive units, "random" drops each unit
    independently with drop_probability, "none" drops nothing.
    """

    mode: str = "single"
    drop_probability: float = 0.0
    burst_length: int = 1
    unit_index: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("none", "single", "random", "burst"):
            raise ValueError(f"unknown loss mode {self.mode!r}")
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError("drop probability must be in [0, 1]")
        if self.burst_length < 1:
            raise ValueError("burst length must be positive")


@dataclass
class LossReport:
    seed: int
    pattern: LossPattern
    n_channels: int
    samples_per_channel: list[int]
    dropped_units: list[int]
    spans: list[list[tuple[int, int]]]  # per channel, [start, stop) of corrupted runs
    recovery_indices: list[list[int]]  # per channel, first exact sample after each run
    corrupted_samples: int
    total_samples: int
    known_samples_exact: bool
    span_bound: int | None = None

    @property
    def corrupted_fraction(self) -> float:
        return self.corrupted_samples / self.total_samples if self.total_samples else 0.0

    @property
    def max_span(self) -> int:
        widths = [stop - start for spans in self.spans for start, stop in spans]
        return max(widths, default=0)

    @property
    def bound_ok(self) -> bool:
        return self.span_bound is None or self.max_span <= self.span_bound


def _choose_drops(pattern: LossPattern, n_units: int, rng: random.Random) -> set[int]:
    if pattern.mode == "none" or n_units == 0:
        return set()
    if pattern.mode == "single":
        idx = pattern.unit_index if pattern.unit_index is not None else rng.randrange(n_units)
        if not 0 <= idx < n_units:
            raise ValueError(f"unit index {idx} outside 0..{n_units - 1}")
        return {idx}
    if pattern.mode == "burst":
        start = pattern.unit_index if pattern.unit_index is not None else rng.randrange(n_units)
        if not 0 <= start < n_units:
            raise ValueError(f"unit index {start} outside 0..{n_units - 1}")
        return set(range(start, min(start + pattern.burst_length, n_units)))
    return {i for i in range(n_units) if rng.random() < pattern.drop_probability}


class LossHarness:
    """One record, encoded once, for repeated loss experiments.

    Encoding and wire serialization are the expensive part and do not
    depend on the loss pattern, so the constructor does them once; run()
    only drops units, decodes, and audits.
    """

    def __init__(
        self,
        channels: Sequence[Sequence[int]],
        config: encoder.EncoderConfig | None = None,
    ) -> None:
        self.channels = [[int(v) for v in ch] for ch in channels]
        self.config = config or encoder.EncoderConfig(channel_count=len(channels) or 1)
        result = encoder.encode_channels(self.channels, self.config)
        self.channel_frames = result.channel_frames
        self.wire = container.wire_encode(result.emission_log)
        self.n_units = len(result.emission_log)
        self.expected_frames = [len(f) for f in result.channel_frames]
        self._counts = [
            [decoder.frame_sample_count(w) for w in frames] for frames in result.channel_frames
        ]

    def run(
        self,
        pattern: LossPattern = LossPattern(),
        seed: int = 0,
        span_bound: int | None = None,
        drops: set[int] | None = None,
    ) -> LossReport:
        """Drop wire units, decode resiliently, audit against the input.

        Pass drops to name the lost unit indices directly instead of
        drawing them from the pattern.

        The audit walks the true frame list (which it knows, having
        encoded), so every received frame's samples land at their true
        positions. A sample counts as corrupted when its frame was
        dropped or the decoder returned None for it; every other sample
        must match the input exactly, which the report records in
        known_samples_exact.
        """
        if drops is None:
            rng = random.Random(seed)
            drops = _choose_drops(pattern, self.n_units, rng)
        elif any(not 0 <= i < self.n_units for i in drops):
            raise ValueError(f"drop indices must lie in 0..{self.n_units - 1}")
        kept = _drop_units(self.wire, drops)
        decoded = container.wire_decode(
            kept, len(self.channels), expected_frame_counts=self.expected_frames
        )

        all_spans: list[list[tuple[int, int]]] = []
        recoveries: list[list[int]] = []
        corrupted_total = 0
        exact = True
        for ch, samples in enumerate(self.channels):
            received = decoded.channels[ch]
            if len(received) != self.expected_frames[ch]:
                raise AssertionError("wire reconciliation lost track of the frame count")
            out, _ = decoder.decode_resilient(received, len(samples), self.config.order)
            corrupted = _audit_channel(samples, self._counts[ch], received, out)
            if corrupted is None:
                exact = False
                corrupted = [True] * len(samples)
            spans = _bool_runs(corrupted)
            all_spans.append(spans)
            recoveries.append([stop for _, stop in spans])
            corrupted_total += sum(stop - start for start, stop in spans)
        return LossReport(
            seed=seed,
            pattern=pattern,
            n_channels=len(self.channels),
            samples_per_channel=[len(c) for c in self.channels],
            dropped_units=sorted(drops),
            spans=all_spans,
            recovery_indices=recoveries,
            corrupted_samples=corrupted_total,
            total_samples=sum(len(c) for c in self.channels),
            known_samples_exact=exact,
            span_bound=span_bound,
        )


def loss_simulation(
    channels: Sequence[Sequence[int]],
    config: encoder.EncoderConfig | None = None,
    pattern: LossPattern = LossPattern(),
    seed: int = 0,
    span_bound: int | None = None,
) -> LossReport:
    """Single encode-drop-decode-audit run; see LossHarness.run."""
    return LossHarness(channels, config).run(pattern, seed=seed, span_bound=span_bound)


def loss_sweep(
    channels: Sequence[Sequence[int]],
    config: encoder.EncoderConfig | None = None,
    pattern: LossPattern = LossPattern(),
    seeds: Sequence[int] = range(100),
    span_bound: int | None = None,
) -> list[LossReport]:
    """Run many seeded loss experiments against one shared encode."""
    harness = LossHarness(channels, config)
    return [harness.run(pattern, seed=s, span_bound=span_bound) for s in seeds]


def _drop_units(wire: bytes, drops: set[int]) -> bytes:
    if not drops:
        return wire
    parts = []
    prev = 0
    for i in sorted(drops):
        parts.append(wire[3 * prev : 3 * i])
        prev = i + 1
    parts.append(wire[3 * prev :])
    return b"".join(parts)


def _audit_channel(
    truth: list[int],
    counts: Sequence[int],
    received: Sequence[int | None],
    resilient_out: list[int | None],
) -> list[bool] | None:
    """Mark each true sample position corrupted or verified-exact.

    Returns None if any decoded value disagrees with the truth, which
    would mean the decoder claimed knowledge it did not have.
    """
    corrupted = [False] * len(truth)
    pos = 0
    ptr = 0
    for frame_idx, count in enumerate(counts):
        if received[frame_idx] is None:
            corrupted[pos : pos + count] = [True] * count
        else:
            seg = resilient_out[ptr : ptr + count]
            ptr += count
            if seg != truth[pos : pos + count]:
                for k, v in enumerate(seg, start=pos):
                    if v is None:
                        corrupted[k] = True
                    elif v != truth[k]:
                        return None
        pos += count
    if pos != len(truth) or ptr != len(resilient_out):
        raise AssertionError("frame accounting disagrees with the sample count")
    return corrupted


def _bool_runs(flags: Sequence[bool]) -> list[tuple[int, int]]:
    spans = []
    start = None
    for i, f in enumerate(flags):
        if f and start is None:
            start = i
        elif not f and start is not None:
            spans.append((start, i))
            start = None
    if start is not None:
        spans.append((start, len(flags)))
    return spans


# ---------------------------------------------------------------------------
# Synthetic input


def synthetic_ecg(
    n_samples: int,
    sample_rate: float = 360.0,
    heart_rate_bpm: float = 75.0,
    amplitude: float = 900.0,
    seed: int = 0,
) -> np.ndarray:
    """Deterministic ECG-shaped test signal in the 12-bit sample range.

    One beat is a sum of Gaussian bumps (P, Q, R, S, T) over the beat
    phase, plus slow baseline wander and a little quantization-scale
    noise. Shaped enough to exercise every frame type; not physiology.
    """
    if n_samples <= 0:
        return np.zeros(0, dtype=np.int64)
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate
    phase = (t * heart_rate_bpm / 60.0) % 1.0
    #         center width  height (fraction of amplitude)
    waves = [
        (0.12, 0.05, 0.14),
        (0.24, 0.012, -0.12),
        (0.265, 0.014, 1.0),
        (0.29, 0.012, -0.24),
        (0.45, 0.055, 0.33),
    ]
    signal = np.zeros(n_samples)
    for center, width, height in waves:
        signal += height * np.exp(-0.5 * ((phase - center) / width) ** 2)
    signal *= amplitude
    signal += 60.0 * np.sin(2 * np.pi * 0.25 * t)  # baseline wander
    signal += rng.normal(0.0, 3.0, n_samples)
    return np.clip(np.rint(signal), predictor.SAMPLE_MIN, predictor.SAMPLE_MAX).astype(np.int64)
