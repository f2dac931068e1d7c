"""Residual classification and fixed 16-bit frame packing.

Every emitted frame is exactly 16 bits: a prefix-free header followed by
equal-width two's-complement fields.

    type  header  fields           carries
    A     1       3 x 5 bits       residuals
    B     01      2 x 7 bits       residuals
    C     0001    4 x 3 bits       residuals
    D     0000    6 x 2 bits       residuals
    E     0011    1 x 12 bits      one original sample

Header 0010 is reserved. Residuals are classified by the smallest field
width that holds them (2, 3, 5, or 7 bits); anything wider escapes to
Type E, which stores the raw sample instead. Pending samples queue up
(at most 6) and whenever the queue is full the densest applicable type
wins, in priority order D, C, A, B, E.

Type E doubles as the resynchronization frame: at a configurable sample
interval the encoder forces consecutive E frames so a decoder that lost
frames can rebuild its predictor history from the raw samples.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import predictor
from .predictor import SAMPLE_BITS

# Worth a reminder: 4 seconds of samples, the default resync spacing,
# is 2048 samples at the 512 Hz front-end rate.
DEFAULT_RESYNC_INTERVAL = 2048

MAX_CHANNELS = 4


@dataclass(frozen=True)
class FrameType:
    tag: str
    header_bits: int
    header_len: int
    field_width: int
    field_count: int
    carries_original: bool = False


FRAME_A = FrameType("A", 0b1, 1, 5, 3)
FRAME_B = FrameType("B", 0b01, 2, 7, 2)
FRAME_C = FrameType("C", 0b0001, 4, 3, 4)
FRAME_D = FrameType("D", 0b0000, 4, 2, 6)
FRAME_E = FrameType("E", 0b0011, 4, SAMPLE_BITS, 1, carries_original=True)

FRAME_TYPES: dict[str, FrameType] = {ft.tag: ft for ft in (FRAME_A, FRAME_B, FRAME_C, FRAME_D, FRAME_E)}
PRIORITY: tuple[FrameType, ...] = (FRAME_D, FRAME_C, FRAME_A, FRAME_B, FRAME_E)
RESERVED_HEADER_BITS = 0b0010

WIDTH_CLASSES = (2, 3, 5, 7)
# Pseudo-width for residuals wider than 7 bits; only Type E can carry those.
ESC = 8


def min_width_class(e: int) -> int:
    """Smallest field width whose two's-complement range holds e, else ESC.

    A residual fits c bits exactly when every bit above bit c-1 equals
    the sign bit, i.e. the arithmetic shift e >> (c-1) is 0 or -1.
    """
    for c in WIDTH_CLASSES:
        if (e >> (c - 1)) in (0, -1):
            return c
    return ESC


def width_classes(errors: np.ndarray) -> np.ndarray:
    """Vectorized min_width_class over an int64 residual array."""
    e = np.asarray(errors, dtype=np.int64)
    out = np.full(e.shape, ESC, dtype=np.int64)
    for c in reversed(WIDTH_CLASSES):
        shifted = e >> (c - 1)
        out = np.where((shifted == 0) | (shifted == -1), c, out)
    return out


@dataclass(frozen=True)
class PendingSample:
    original: int
    error: int
    width: int


def _enabled_tags(widths: Sequence[int]) -> set[str]:
    tags = {"E"}
    for ft in (FRAME_D, FRAME_C, FRAME_A, FRAME_B):
        n = ft.field_count
        if len(widths) >= n and all(w <= ft.field_width for w in widths[:n]):
            tags.add(ft.tag)
    return tags


def frame_enable(queue: Sequence[PendingSample]) -> set[str]:
    """Tags of the frame types the queue front can legally fill."""
    if not queue:
        raise ValueError("frame_enable needs at least one queued sample")
    return _enabled_tags([p.width for p in queue])


def _select_type(widths: Sequence[int]) -> FrameType:
    enabled = _enabled_tags(widths)
    for ft in PRIORITY:
        if ft.tag in enabled:
            return ft
    raise AssertionError("unreachable: Type E is always enabled")


def select_frame(queue: Sequence[PendingSample], resync_pending: int = 0) -> FrameType:
    """Pick the frame type for the queue front.

    A pending resynchronization overrides the density priority and forces
    Type E so the raw sample goes out.
    """
    if not queue:
        raise ValueError("select_frame needs at least one queued sample")
    if resync_pending > 0:
        return FRAME_E
    return _select_type([p.width for p in queue])


def pack_frame(ftype: FrameType, payload: Sequence[PendingSample]) -> int:
    """Assemble one 16-bit frame word, header first, fields MSB-first."""
    if len(payload) != ftype.field_count:
        raise ValueError(f"Type {ftype.tag} packs {ftype.field_count} samples, got {len(payload)}")
    if ftype.carries_original:
        return (ftype.header_bits << SAMPLE_BITS) | (payload[0].original & ((1 << SAMPLE_BITS) - 1))
    w = ftype.field_width
    mask = (1 << w) - 1
    half = 1 << (w - 1)
    word = ftype.header_bits
    for p in payload:
        if not -half <= p.error < half:
            raise AssertionError(f"residual {p.error} overflows a {w}-bit field; selection must prevent this")
        word = (word << w) | (p.error & mask)
    return word


@dataclass(frozen=True)
class EncoderConfig:
    resync_interval_samples: int = DEFAULT_RESYNC_INTERVAL  # 0 disables resync
    channel_count: int = 1
    order: int = 2
    resync_e_frames: int = 2  # raw samples per resync event; 2 rebuilds order-2 state

    def __post_init__(self) -> None:
        if self.resync_interval_samples < 0:
            raise ValueError("resync interval cannot be negative")
        if not 1 <= self.channel_count <= MAX_CHANNELS:
            raise ValueError(f"channel count must be 1..{MAX_CHANNELS}")
        predictor.coefficients(self.order)
        if self.resync_e_frames not in (1, 2):
            raise ValueError("resync_e_frames must be 1 or 2")


class ChannelEncoder:
    """Streams one channel's samples into 16-bit frame words."""

    def __init__(self, config: EncoderConfig | None = None) -> None:
        self.config = config or EncoderConfig()
        self._history = predictor.zero_state(self.config.order)
        self.queue: deque[PendingSample] = deque()
        self.samples_since_resync = 0
        self.resync_pending = 0

    def push_sample(self, x: int) -> list[int]:
        """Accept one sample; return the frames it caused (possibly none)."""
        err = predictor.prediction_error(x, self._history, self.config.order)
        self._history = predictor.advance(self._history, x)
        self.queue.append(PendingSample(x, err, min_width_class(err)))
        emitted = []
        if len(self.queue) == 6:
            emitted.append(self._emit(use_pending=True))
        self.samples_since_resync += 1
        interval = self.config.resync_interval_samples
        if interval and self.samples_since_resync >= interval:
            self.resync_pending = self.config.resync_e_frames
            self.samples_since_resync = 0
        return emitted

    def flush(self) -> list[int]:
        """Drain the queue at end of input; every queued sample gets framed."""
        words = []
        while self.queue:
            words.append(self._emit(use_pending=False))
        return words

    def _emit(self, use_pending: bool) -> int:
        pending = self.resync_pending if use_pending else 0
        ftype = select_frame(self.queue, pending)
        payload = [self.queue.popleft() for _ in range(ftype.field_count)]
        if pending and ftype.carries_original:
            self.resync_pending -= 1
        return pack_frame(ftype, payload)


def encode_channel(samples: Sequence[int], config: EncoderConfig | None = None) -> list[int]:
    """Encode one whole channel; equals push_sample over samples then flush."""
    words, _ = encode_channel_indexed(samples, config)
    return words


def encode_channel_indexed(
    samples: Sequence[int], config: EncoderConfig | None = None
) -> tuple[list[int], list[int]]:
    """Array fast path. Returns (words, positions).

    positions[i] is the index of the sample whose arrival emitted
    words[i]; frames emitted by the final flush get position
    len(samples). Output is bit-identical to the streaming encoder.
    """
    cfg = config or EncoderConfig()
    err_arr = predictor.residuals(samples, cfg.order)  # validates sample range
    widths = width_classes(err_arr).tolist()
    errs = err_arr.tolist()
    origs = np.asarray(samples, dtype=np.int64).tolist()
    n = len(errs)

    words: list[int] = []
    positions: list[int] = []
    qs = 0  # queue = samples[qs .. i]
    pending = 0
    since = 0
    interval = cfg.resync_interval_samples
    e_frames = cfg.resync_e_frames
    for i in range(n):
        if i + 1 - qs == 6:
            ftype = FRAME_E if pending else _select_type(widths[qs : i + 1])
            words.append(_pack_at(ftype, origs, errs, qs))
            positions.append(i)
            if pending:
                pending -= 1
            qs += ftype.field_count
        since += 1
        if interval and since >= interval:
            pending = e_frames
            since = 0
    while qs < n:
        ftype = _select_type(widths[qs:n])
        words.append(_pack_at(ftype, origs, errs, qs))
        positions.append(n)
        qs += ftype.field_count
    return words, positions


def _pack_at(ftype: FrameType, origs: list[int], errs: list[int], qs: int) -> int:
    if ftype.carries_original:
        return (ftype.header_bits << SAMPLE_BITS) | (origs[qs] & ((1 << SAMPLE_BITS) - 1))
    w = ftype.field_width
    mask = (1 << w) - 1
    word = ftype.header_bits
    for j in range(qs, qs + ftype.field_count):
        word = (word << w) | (errs[j] & mask)
    return word


@dataclass
class MultiChannelResult:
    channel_frames: list[list[int]]
    emission_log: list[tuple[int, int]] = field(default_factory=list)  # (channel, word) in emission order


def encode_multichannel(
    stream: Iterable[tuple[int, int]], config: EncoderConfig | None = None
) -> MultiChannelResult:
    """Encode an interleaved stream of (channel, sample) pairs.

    Channels compress independently; the emission log records the frame
    interleaving a shared link would see. On end of input every channel
    is flushed, in channel order.
    """
    cfg = config or EncoderConfig()
    encoders = [ChannelEncoder(cfg) for _ in range(cfg.channel_count)]
    frames: list[list[int]] = [[] for _ in range(cfg.channel_count)]
    log: list[tuple[int, int]] = []
    for ch, x in stream:
        if not 0 <= ch < cfg.channel_count:
            raise ValueError(f"channel id {ch} outside 0..{cfg.channel_count - 1}")
        for word in encoders[ch].push_sample(x):
            frames[ch].append(word)
            log.append((ch, word))
    for ch, enc in enumerate(encoders):
        for word in enc.flush():
            frames[ch].append(word)
            log.append((ch, word))
    return MultiChannelResult(frames, log)


def encode_channels(
    channels: Sequence[Sequence[int]], config: EncoderConfig | None = None
) -> MultiChannelResult:
    """Fast path for simultaneously sampled, equal-length channel arrays.

    Matches encode_multichannel over the round-robin interleave
    (ch0[0], ch1[0], ..., ch0[1], ...) frame for frame.
    """
    cfg = config or EncoderConfig(channel_count=len(channels) or 1)
    if len(channels) != cfg.channel_count:
        raise ValueError(f"got {len(channels)} channels but config says {cfg.channel_count}")
    lengths = {len(c) for c in channels}
    if len(lengths) > 1:
        raise ValueError("channel arrays must have equal lengths; stream unequal channels instead")
    nch = len(channels)
    frames: list[list[int]] = []
    keyed: list[tuple[int, int, int]] = []
    for ch, samples in enumerate(channels):
        words, positions = encode_channel_indexed(samples, cfg)
        frames.append(words)
        for word, pos in zip(words, positions):
            keyed.append((pos * nch + ch, ch, word))
    keyed.sort(key=lambda t: t[0])  # stable: flush frames keep channel order
    return MultiChannelResult(frames, [(ch, word) for _, ch, word in keyed])
