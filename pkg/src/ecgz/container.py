"""On-disk .ecgz container and the tagged wire framing used in loss tests.

All multi-byte integers are big-endian. File layout:

    offset  size  field
    0       4     magic "ECGZ"
    4       1     version (1)
    5       1     channel_count (1..4)
    6       2     sample_rate_hz
    8       4     resync_interval_samples (0 = resync disabled)
    12      1     predictor_order
    13      8*C   per channel: sample_count u32, frame_count u32
    13+8C   ...   payload: each channel's frames in order, 16-bit words

A wire unit is 3 bytes: one tag byte holding the channel id in the top
2 bits and a mod-64 sequence number below, then the 16-bit frame word.
Receivers spot dropped units through sequence-number gaps; a burst of 64
or more in one channel wraps the counter, so its size is only recoverable
from the declared frame counts.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    BadMagicError,
    BadVersionError,
    ContainerError,
    CorruptStreamError,
    CountMismatchError,
    TruncationError,
)

MAGIC = b"ECGZ"
VERSION = 1
_HEAD = struct.Struct(">BBHIB")  # version, channel_count, rate, resync, order
SEQ_MOD = 64


@dataclass(frozen=True)
class RecordMeta:
    channel_count: int
    sample_rate_hz: int
    resync_interval_samples: int
    predictor_order: int
    sample_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.channel_count <= 4:
            raise ValueError("channel count must be 1..4")
        if len(self.sample_counts) != self.channel_count:
            raise ValueError("one sample count per channel required")
        if not 0 <= self.sample_rate_hz <= 0xFFFF:
            raise ValueError("sample rate must fit 16 bits")
        if not 0 <= self.resync_interval_samples <= 0xFFFFFFFF:
            raise ValueError("resync interval must fit 32 bits")
        if not 1 <= self.predictor_order <= 4:
            raise ValueError("predictor order must be 1..4")
        if any(n < 0 or n > 0xFFFFFFFF for n in self.sample_counts):
            raise ValueError("sample counts must fit 32 bits")


def write_ecgz(meta: RecordMeta, channel_frames: Sequence[Sequence[int]]) -> bytes:
    if len(channel_frames) != meta.channel_count:
        raise ValueError(f"meta declares {meta.channel_count} channels, got {len(channel_frames)}")
    head = bytearray(MAGIC)
    head += _HEAD.pack(
        VERSION,
        meta.channel_count,
        meta.sample_rate_hz,
        meta.resync_interval_samples,
        meta.predictor_order,
    )
    for count, frames in zip(meta.sample_counts, channel_frames):
        head += struct.pack(">II", count, len(frames))
    parts = [bytes(head)]
    for frames in channel_frames:
        parts.append(struct.pack(f">{len(frames)}H", *frames))
    return b"".join(parts)


def read_ecgz(data: bytes) -> tuple[RecordMeta, list[list[int]]]:
    if len(data) < 4 + _HEAD.size:
        raise TruncationError(f"file of {len(data)} bytes is shorter than the fixed header")
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    version, channel_count, rate, resync, order = _HEAD.unpack_from(data, 4)
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    if not 1 <= channel_count <= 4:
        raise ContainerError(f"channel count {channel_count} outside 1..4")
    if not 1 <= order <= 4:
        raise ContainerError(f"predictor order {order} outside 1..4")
    off = 4 + _HEAD.size
    if len(data) < off + 8 * channel_count:
        raise TruncationError("file ends inside the per-channel count table")
    sample_counts = []
    frame_counts = []
    for _ in range(channel_count):
        ns, nf = struct.unpack_from(">II", data, off)
        sample_counts.append(ns)
        frame_counts.append(nf)
        off += 8
    payload_len = len(data) - off
    need = 2 * sum(frame_counts)
    if payload_len < need:
        raise TruncationError(f"payload holds {payload_len} bytes, counts require {need}")
    if payload_len > need:
        raise CountMismatchError(f"{payload_len - need} payload bytes beyond the declared frames")
    channels = []
    for nf in frame_counts:
        channels.append(list(struct.unpack_from(f">{nf}H", data, off)))
        off += 2 * nf
    meta = RecordMeta(channel_count, rate, resync, order, tuple(sample_counts))
    return meta, channels


def wire_encode(emission_log: Sequence[tuple[int, int]]) -> bytes:
    """Serialize (channel, frame) pairs into 3-byte tagged wire units."""
    seq = [0, 0, 0, 0]
    out = bytearray()
    for ch, word in emission_log:
        if not 0 <= ch <= 3:
            raise ValueError(f"channel id {ch} outside 0..3")
        if not 0 <= word <= 0xFFFF:
            raise ValueError(f"frame word {word!r} is not a 16-bit value")
        out.append((ch << 6) | (seq[ch] % SEQ_MOD))
        out += word.to_bytes(2, "big")
        seq[ch] += 1
    return bytes(out)


@dataclass
class WireGap:
    """A detected run of dropped units within one channel's stream."""

    channel: int
    index: int  # position in the per-channel frame list where the run sits
    missing: int
    ambiguous: bool = False  # True when mod-64 wraparound may hide the true extent


@dataclass
class WireDecodeResult:
    channels: list[list[int | None]]  # None marks a lost frame
    gaps: list[WireGap] = field(default_factory=list)

    def missing_per_channel(self) -> list[int]:
        counts = [0] * len(self.channels)
        for g in self.gaps:
            counts[g.channel] += g.missing
        return counts


def wire_decode(
    data: bytes,
    channel_count: int,
    expected_frame_counts: Sequence[int] | None = None,
) -> WireDecodeResult:
    """Rebuild per-channel frame streams from wire units, marking losses.

    Sequence-number gaps turn into None entries, one per missing unit.
    Losses the sequence numbers cannot see (whole mod-64 cycles, or units
    dropped after a channel's last received one) are only found when
    expected_frame_counts is given; such repairs are flagged ambiguous
    when the missing units' positions cannot be pinned down.
    """
    if len(data) % 3:
        raise TruncationError(f"wire stream of {len(data)} bytes is not whole 3-byte units")
    if not 1 <= channel_count <= 4:
        raise ValueError("channel count must be 1..4")
    channels: list[list[int | None]] = [[] for _ in range(channel_count)]
    gaps: list[WireGap] = []
    next_seq = [0] * channel_count
    for off in range(0, len(data), 3):
        tag = data[off]
        ch = tag >> 6
        if ch >= channel_count:
            raise CorruptStreamError(f"unit at byte {off} tagged for unknown channel {ch}")
        seq = tag & (SEQ_MOD - 1)
        gap = (seq - next_seq[ch]) % SEQ_MOD
        if gap:
            gaps.append(WireGap(ch, len(channels[ch]), gap))
            channels[ch].extend([None] * gap)
        channels[ch].append(int.from_bytes(data[off + 1 : off + 3], "big"))
        next_seq[ch] = (seq + 1) % SEQ_MOD
    result = WireDecodeResult(channels, gaps)
    if expected_frame_counts is not None:
        if len(expected_frame_counts) != channel_count:
            raise ValueError("one expected frame count per channel required")
        for ch in range(channel_count):
            _reconcile_channel(result, ch, expected_frame_counts[ch])
    return result


def _reconcile_channel(result: WireDecodeResult, ch: int, expected: int) -> None:
    frames = result.channels[ch]
    deficit = expected - len(frames)
    if deficit < 0:
        raise CountMismatchError(f"channel {ch} received {len(frames)} frames, expected {expected}")
    if deficit == 0:
        return
    ch_gaps = [g for g in result.gaps if g.channel == ch]
    if len(ch_gaps) == 1:
        # A lone gap with a shortfall means whole mod-64 cycles vanished
        # inside it; grow it, but its true extent stays uncertain.
        gap = ch_gaps[0]
        frames[gap.index : gap.index] = [None] * deficit
        gap.missing += deficit
        gap.ambiguous = True
        return
    # No gap (pure tail loss, exact when under one mod-64 cycle) or several
    # gaps (no way to tell which one swallowed the extra cycles).
    ambiguous = bool(ch_gaps) or deficit >= SEQ_MOD
    result.gaps.append(WireGap(ch, len(frames), deficit, ambiguous=ambiguous))
    frames.extend([None] * deficit)
