"""Record ingestion: WFDB headers, format-212 signal files, CSV.

Only the subset of the WFDB header grammar that two-lead Holter archives
actually use is parsed: a record line (name, signal count, sampling
frequency, samples per signal) and one line per signal. Signal data must
be format 212, where each pair of 12-bit two's-complement samples packs
into three bytes:

    sample 2k   = byte[3k]   | low  nibble of byte[3k+1] << 8
    sample 2k+1 = byte[3k+2] | high nibble of byte[3k+1] << 8

Samples interleave across signals fastest, one frame of all signals per
time step.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import TruncationError, UnsupportedFormatError, WfdbParseError
from .predictor import SAMPLE_MAX, SAMPLE_MIN


@dataclass(frozen=True)
class SignalSpec:
    file_name: str
    fmt: int
    gain: float
    adc_resolution: int
    adc_zero: int
    baseline: int
    description: str = ""


@dataclass(frozen=True)
class WfdbRecord:
    name: str
    signal_count: int
    sampling_frequency: float
    samples_per_signal: int
    signals: tuple[SignalSpec, ...]


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_wfdb_header(text: str) -> WfdbRecord:
    lines = list(_content_lines(text))
    if not lines:
        raise WfdbParseError("header has no content lines")
    lineno, record_line = lines[0]
    tok = record_line.split()
    if len(tok) < 4:
        raise WfdbParseError(f"line {lineno}: record line needs name, signals, rate, samples")
    name = tok[0]
    if "/" in name:
        raise WfdbParseError(f"line {lineno}: multi-segment records are not supported")
    try:
        nsig = int(tok[1])
        freq = float(tok[2].split("/")[0])  # ignore any counter-frequency suffix
        nsamp = int(tok[3])
    except ValueError as exc:
        raise WfdbParseError(f"line {lineno}: {exc}") from None
    if nsig < 1:
        raise WfdbParseError(f"line {lineno}: signal count must be positive")
    if nsamp < 0:
        raise WfdbParseError(f"line {lineno}: negative sample count")

    signal_lines = lines[1:]
    if len(signal_lines) < nsig:
        raise WfdbParseError(f"record declares {nsig} signals but header has {len(signal_lines)} signal lines")
    signals = tuple(_parse_signal_line(lineno, line) for lineno, line in signal_lines[:nsig])
    return WfdbRecord(name, nsig, freq, nsamp, signals)


def _parse_signal_line(lineno: int, line: str) -> SignalSpec:
    tok = line.split()
    if len(tok) < 2:
        raise WfdbParseError(f"line {lineno}: signal line needs a file name and format")
    file_name = tok[0]
    if not tok[1].isdigit():
        raise UnsupportedFormatError(f"line {lineno}: unsupported signal format {tok[1]!r}")
    fmt = int(tok[1])
    if fmt != 212:
        raise UnsupportedFormatError(f"line {lineno}: only format 212 is supported, got {fmt}")

    gain, paren_baseline = 200.0, None
    if len(tok) > 2:
        gain, paren_baseline = _parse_gain(lineno, tok[2])
        if gain == 0:
            gain = 200.0  # zero means the archive's default
    try:
        adc_res = int(tok[3]) if len(tok) > 3 else 12
        adc_zero = int(tok[4]) if len(tok) > 4 else 0
    except ValueError as exc:
        raise WfdbParseError(f"line {lineno}: {exc}") from None
    baseline = paren_baseline if paren_baseline is not None else adc_zero
    description = " ".join(tok[8:]) if len(tok) > 8 else ""
    return SignalSpec(file_name, fmt, gain, adc_res, adc_zero, baseline, description)


def _parse_gain(lineno: int, token: str) -> tuple[float, int | None]:
    # Forms: "200", "200/mV", "200(1024)/mV"
    body = token.split("/")[0]
    baseline = None
    if "(" in body:
        if not body.endswith(")"):
            raise WfdbParseError(f"line {lineno}: malformed gain field {token!r}")
        body, inner = body[:-1].split("(", 1)
        try:
            baseline = int(inner)
        except ValueError:
            raise WfdbParseError(f"line {lineno}: malformed baseline in {token!r}") from None
    try:
        return float(body), baseline
    except ValueError:
        raise WfdbParseError(f"line {lineno}: malformed gain field {token!r}") from None


def read_format212(data: bytes, n_samples: int, n_signals: int) -> list[np.ndarray]:
    """Unpack interleaved format-212 bytes into one int array per signal."""
    if n_samples < 0 or n_signals < 1:
        raise ValueError("need a non-negative sample count and at least one signal")
    total = n_samples * n_signals
    need = (total * 3 + 1) // 2
    if len(data) < need:
        raise TruncationError(f"signal file holds {len(data)} bytes, {need} required")
    ntrip = (total + 1) // 2
    buf = np.zeros(3 * ntrip, dtype=np.uint8)
    take = min(len(data), 3 * ntrip)
    buf[:take] = np.frombuffer(data[:take], dtype=np.uint8)
    b0 = buf[0::3].astype(np.int64)
    b1 = buf[1::3].astype(np.int64)
    b2 = buf[2::3].astype(np.int64)
    values = np.empty(2 * ntrip, dtype=np.int64)
    values[0::2] = b0 | ((b1 & 0x0F) << 8)
    values[1::2] = b2 | ((b1 & 0xF0) << 4)
    values = values[:total]
    values[values >= 2048] -= 4096  # 12-bit two's complement
    return [values[k::n_signals].copy() for k in range(n_signals)]


def normalize_to_12bit(raw_signals: Sequence[np.ndarray], record: WfdbRecord) -> list[np.ndarray]:
    """Center each signal on its baseline so values sit in the codec range."""
    if len(raw_signals) != record.signal_count:
        raise ValueError(f"record has {record.signal_count} signals, got {len(raw_signals)} arrays")
    out = []
    for spec, raw in zip(record.signals, raw_signals):
        v = np.asarray(raw, dtype=np.int64) - spec.baseline
        if v.size and (v.min() < SAMPLE_MIN or v.max() > SAMPLE_MAX):
            raise ValueError(
                f"signal {spec.file_name}:{spec.description or '?'} leaves "
                f"{SAMPLE_MIN}..{SAMPLE_MAX} after centering on {spec.baseline}"
            )
        out.append(v)
    return out


def load_record(path: str | Path) -> tuple[WfdbRecord, list[np.ndarray]]:
    """Read <record>.hea plus its signal file and return centered channels."""
    head = Path(path)
    if head.suffix != ".hea":
        head = head.with_suffix(".hea")
    record = parse_wfdb_header(head.read_text())
    dat_names = {s.file_name for s in record.signals}
    if len(dat_names) != 1:
        raise WfdbParseError(f"record {record.name} spreads signals over {len(dat_names)} files")
    dat = head.parent / dat_names.pop()
    raw = read_format212(dat.read_bytes(), record.samples_per_signal, record.signal_count)
    return record, normalize_to_12bit(raw, record)


def read_csv(text: str, channel_count: int | None = None) -> list[list[int]]:
    """Parse integer CSV, one row per time step, one column per channel."""
    channels: list[list[int]] | None = None
    for rowno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row:
            continue
        if channels is None:
            width = channel_count if channel_count is not None else len(row)
            channels = [[] for _ in range(width)]
        if len(row) != len(channels):
            raise ValueError(f"row {rowno}: expected {len(channels)} columns, got {len(row)}")
        for ch, cell in enumerate(row):
            try:
                value = int(cell.strip())
            except ValueError:
                raise ValueError(f"row {rowno}: {cell!r} is not an integer") from None
            if not SAMPLE_MIN <= value <= SAMPLE_MAX:
                raise ValueError(f"row {rowno}: sample {value} outside {SAMPLE_MIN}..{SAMPLE_MAX}")
            channels[ch].append(value)
    if channels is None:
        return [[] for _ in range(channel_count)] if channel_count else []
    return channels
