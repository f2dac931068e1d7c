"""Lossless multi-channel ECG codec built on integer slope prediction.

Residuals from a small integer predictor are packed into fixed 16-bit
frames whose type adapts to the local signal activity; periodic raw
sample frames bound how long a receiver stays dark after packet loss.
"""

from .container import RecordMeta, read_ecgz, write_ecgz
from .decoder import decode_channel, decode_resilient
from .encoder import ChannelEncoder, EncoderConfig, encode_channel, encode_channels, encode_multichannel

__version__ = "0.1.0"

__all__ = [
    "ChannelEncoder",
    "EncoderConfig",
    "RecordMeta",
    "compress",
    "decode_channel",
    "decode_resilient",
    "decompress",
    "encode_channel",
    "encode_channels",
    "encode_multichannel",
    "read_ecgz",
    "write_ecgz",
]


def compress(channels, sample_rate_hz: int, config: EncoderConfig | None = None) -> bytes:
    """Encode equal-length channel arrays straight into container bytes."""
    cfg = config or EncoderConfig(channel_count=len(channels) or 1)
    result = encode_channels(channels, cfg)
    meta = RecordMeta(
        channel_count=len(channels),
        sample_rate_hz=sample_rate_hz,
        resync_interval_samples=cfg.resync_interval_samples,
        predictor_order=cfg.order,
        sample_counts=tuple(len(c) for c in channels),
    )
    return write_ecgz(meta, result.channel_frames)


def decompress(data: bytes) -> tuple[RecordMeta, list[list[int]]]:
    """Inverse of compress: container bytes back to (meta, channels)."""
    meta, channel_frames = read_ecgz(data)
    channels = [
        decode_channel(frames, count, meta.predictor_order)
        for frames, count in zip(channel_frames, meta.sample_counts)
    ]
    return meta, channels
